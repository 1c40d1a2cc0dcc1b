#pragma once

#include <random>
#include <stdexcept>
#include <vector>

#include "omegarm/mdp.hpp"
#include "omegarm/rm.hpp"

namespace omegarm {

struct ProductState {
  StateId mdp_state = 0;
  MachineState machine_state = 0;

  friend bool operator==(const ProductState&, const ProductState&) = default;
};

/// Product action (a, u'): the MDP action and the machine step that resolves
/// the machine's nondeterminism.
struct ProductChoice {
  ActionIndex mdp_action = 0;
  MachineStep step;

  friend bool operator==(const ProductChoice&, const ProductChoice&) = default;
};

/// MDP with transition rewards and accepting transitions. Built by
/// build_product (then the back-maps are filled) or directly, for synthetic
/// instances (back-maps empty).
struct ProductMdp {
  Mdp mdp;
  TransitionRewards rewards;
  AcceptingSet accepting;
  std::vector<ProductState> states;               // empty for synthetic instances
  std::vector<std::vector<ProductChoice>> choices;  // aligned with mdp actions

  std::size_t num_states() const { return mdp.num_states(); }
  StateId init() const { return mdp.init(); }
  bool has_back_maps() const { return !states.empty(); }
  /// Largest |reward| over all transitions.
  double max_abs_reward() const;
};

class IncompleteMachineError : public std::runtime_error {
 public:
  IncompleteMachineError(const std::string& what, std::vector<CompletenessGap> gaps)
      : std::runtime_error(what), gaps_(std::move(gaps)) {}
  const std::vector<CompletenessGap>& gaps() const { return gaps_; }

 private:
  std::vector<CompletenessGap> gaps_;
};

/// Machine steps enabled from u on label, with identical steps merged.
std::vector<MachineStep> product_steps(const OmegaRewardMachine& rm, MachineState u, Label label);

/// Reachable part of M x R from (s0, u0). Product state ids follow BFS
/// discovery order; actions are ordered MDP-action-major, machine-step-minor.
/// Throws IncompleteMachineError listing every (u, label) without an
/// enabled edge met during exploration.
ProductMdp build_product(const Mdp& m, const OmegaRewardMachine& rm);

/// Product id of (s, u), or num_states() when (s, u) is unreachable.
StateId find_product_state(const ProductMdp& p, ProductState q);

struct LazyStep {
  ProductState next;
  double reward = 0.0;
  bool accepting = false;
};

/// On-the-fly product walker: MDP and machine states are kept separately and
/// combined at each step. One walker per episode; the model is shared.
class LazyProduct {
 public:
  LazyProduct(const Mdp& m, const OmegaRewardMachine& rm);

  ProductState reset();
  ProductState current() const { return current_; }

  /// Enabled choices at the current state, in build_product's order.
  std::vector<ProductChoice> enabled() const;

  /// Takes (a, step) from the current state with the successor chosen by the
  /// uniform draw u in [0,1). Throws std::invalid_argument if not enabled.
  LazyStep step_with(const ProductChoice& choice, double u);

  template <typename Rng>
  LazyStep step(const ProductChoice& choice, Rng& rng) {
    return step_with(choice, std::uniform_real_distribution<double>(0.0, 1.0)(rng));
  }

 private:
  const Mdp* mdp_;
  const OmegaRewardMachine* rm_;
  ProductState current_;
};

}  // namespace omegarm
