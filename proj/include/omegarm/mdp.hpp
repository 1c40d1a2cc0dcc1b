#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace omegarm {

using StateId = std::size_t;
using ActionIndex = std::size_t;

/// Set of atomic propositions as a bitmask over the model's AP list.
using Label = std::uint64_t;

inline constexpr std::size_t kMaxAtomicPropositions = 64;
inline constexpr double kProbabilityTolerance = 1e-9;

struct Branch {
  StateId target = 0;
  double prob = 0.0;
};

struct Action {
  std::string name;
  std::vector<Branch> branches;
};

/// Finite labelled MDP with per-state enabled actions.
///
/// Actions are local to their state: action index i at state s is the i-th
/// entry of actions(s). Action names are informational and need not be
/// unique across states.
class Mdp {
 public:
  Mdp() = default;
  Mdp(std::vector<std::string> ap, std::size_t num_states, StateId init = 0);

  StateId add_state(Label label = 0);
  ActionIndex add_action(StateId s, std::string name, std::vector<Branch> branches);
  void set_label(StateId s, Label label) { labels_.at(s) = label; }
  void set_init(StateId s) { init_ = s; }

  std::size_t num_states() const { return actions_.size(); }
  StateId init() const { return init_; }
  const std::vector<std::string>& ap() const { return ap_; }
  Label label(StateId s) const { return labels_[s]; }
  std::span<const Action> actions(StateId s) const { return actions_[s]; }
  const Action& action(StateId s, ActionIndex a) const { return actions_[s][a]; }
  std::size_t num_actions(StateId s) const { return actions_[s].size(); }
  std::size_t num_branches() const;

  friend bool operator==(const Mdp&, const Mdp&);

 private:
  std::vector<std::string> ap_;
  StateId init_ = 0;
  std::vector<Label> labels_;
  std::vector<std::vector<Action>> actions_;
};

bool operator==(const Branch& a, const Branch& b);
bool operator==(const Action& a, const Action& b);

/// One value per (state, action, branch) triple of a fixed Mdp shape.
template <typename T>
class TransitionMap {
 public:
  TransitionMap() = default;
  explicit TransitionMap(const Mdp& m, T fill = T{}) {
    state_offset_.reserve(m.num_states() + 1);
    std::size_t total = 0;
    for (StateId s = 0; s < m.num_states(); ++s) {
      state_offset_.push_back(action_offset_.size());
      for (const Action& act : m.actions(s)) {
        action_offset_.push_back(total);
        total += act.branches.size();
      }
    }
    state_offset_.push_back(action_offset_.size());
    action_offset_.push_back(total);
    values_.assign(total, fill);
  }

  T& operator()(StateId s, ActionIndex a, std::size_t k) { return values_[index(s, a) + k]; }
  const T& operator()(StateId s, ActionIndex a, std::size_t k) const {
    return values_[index(s, a) + k];
  }

  /// Values of all branches of (s, a), aligned with Action::branches.
  std::span<const T> of(StateId s, ActionIndex a) const {
    const std::size_t slot = state_offset_[s] + a;
    return {values_.data() + action_offset_[slot], action_offset_[slot + 1] - action_offset_[slot]};
  }

  std::span<const T> values() const { return values_; }
  bool empty() const { return values_.empty(); }

  friend bool operator==(const TransitionMap&, const TransitionMap&) = default;

 private:
  std::size_t index(StateId s, ActionIndex a) const { return action_offset_[state_offset_[s] + a]; }

  std::vector<std::size_t> state_offset_;
  std::vector<std::size_t> action_offset_;
  std::vector<T> values_;
};

using TransitionRewards = TransitionMap<double>;
/// Accepting marks; std::uint8_t avoids the vector<bool> proxy.
using AcceptingSet = TransitionMap<std::uint8_t>;

/// Pure memoryless strategy: one action index per state.
struct PositionalStrategy {
  std::vector<ActionIndex> choice;

  friend bool operator==(const PositionalStrategy&, const PositionalStrategy&) = default;
};

/// Memoryless randomised strategy: a distribution over action indices per state.
struct StationaryStrategy {
  std::vector<std::vector<double>> weights;

  static StationaryStrategy from(const Mdp& m, const PositionalStrategy& sigma);
  static StationaryStrategy uniform(const Mdp& m);
};

struct ValidationIssue {
  enum class Kind { kNoActions, kBadProbability, kMassMismatch, kBadTarget, kBadInit, kTooManyAps };
  Kind kind;
  StateId state;
  std::string message;
};

/// Checks every Mdp invariant and reports all violations found.
std::vector<ValidationIssue> validate(const Mdp& m);

/// End component: a closed, strongly connected sub-MDP.
struct Mec {
  std::vector<StateId> states;                    // ascending
  std::vector<std::vector<ActionIndex>> actions;  // aligned with states, ascending

  friend bool operator==(const Mec&, const Mec&) = default;
};

/// Maximal end components, ordered by smallest member state. Optionally
/// restricted to the actions allowed by a mask shaped like the Mdp.
std::vector<Mec> mec_decomposition(const Mdp& m);
std::vector<Mec> mec_decomposition(const Mdp& m, const std::vector<std::vector<char>>& allowed);

/// Index of the branch selected by a uniform draw u in [0,1).
std::size_t sample_branch(std::span<const Branch> branches, double u);

/// Discounted value of a positional strategy by direct linear solve of
/// v = R + lambda * P v. Requires lambda in [0,1).
std::vector<double> evaluate_positional(const Mdp& m, const PositionalStrategy& sigma,
                                        const TransitionRewards& rewards, double lambda);
std::vector<double> evaluate_stationary(const Mdp& m, const StationaryStrategy& sigma,
                                        const TransitionRewards& rewards, double lambda);

/// Probability, per start state, that the chain induced by sigma takes an
/// accepting transition infinitely often.
std::vector<double> buchi_prob_of_strategy(const Mdp& m, const PositionalStrategy& sigma,
                                           const AcceptingSet& accepting);
std::vector<double> buchi_prob_of_strategy(const Mdp& m, const StationaryStrategy& sigma,
                                           const AcceptingSet& accepting);

}  // namespace omegarm
