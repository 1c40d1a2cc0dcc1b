#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "omegarm/guard.hpp"
#include "omegarm/mdp.hpp"

namespace omegarm {

using MachineState = std::size_t;

/// Guarded, possibly nondeterministic edge. Acceptance is transition-based.
struct MachineEdge {
  MachineState source = 0;
  Guard guard;
  MachineState target = 0;
  double reward = 0.0;
  bool accepting = false;

  friend bool operator==(const MachineEdge&, const MachineEdge&) = default;
};

struct MachineStep {
  MachineState target = 0;
  double reward = 0.0;
  bool accepting = false;

  friend bool operator==(const MachineStep&, const MachineStep&) = default;
};

/// Omega-regular reward machine: a nondeterministic Büchi automaton over
/// 2^AP whose transitions also carry scalar rewards.
class OmegaRewardMachine {
 public:
  OmegaRewardMachine() = default;
  OmegaRewardMachine(std::vector<std::string> ap, std::size_t num_states, MachineState init = 0);

  void add_edge(MachineEdge edge);
  /// Convenience: parses guard_text against ap().
  void add_edge(MachineState source, const std::string& guard_text, MachineState target,
                double reward = 0.0, bool accepting = false);

  std::size_t num_states() const { return num_states_; }
  MachineState init() const { return init_; }
  const std::vector<std::string>& ap() const { return ap_; }
  const std::vector<MachineEdge>& edges() const { return edges_; }

  /// All edges from u enabled on label, in declaration order.
  std::vector<MachineStep> step(MachineState u, Label label) const;

  /// Machine with every reward set to zero.
  OmegaRewardMachine as_buchi() const;
  /// Machine with every accepting mark cleared.
  OmegaRewardMachine as_reward_machine() const;

  friend bool operator==(const OmegaRewardMachine&, const OmegaRewardMachine&) = default;

 private:
  std::vector<std::string> ap_;
  std::size_t num_states_ = 0;
  MachineState init_ = 0;
  std::vector<MachineEdge> edges_;
  std::vector<std::vector<std::size_t>> out_;  // edge indices per source
};

struct CompletenessGap {
  MachineState state;
  Label label;

  friend bool operator==(const CompletenessGap&, const CompletenessGap&) = default;
};

/// Labels of the states of m reachable from its initial state, ascending.
std::vector<Label> reachable_labels(const Mdp& m);

/// Pairs (u, label) with no enabled edge, where label ranges over the labels
/// of reachable MDP states and u over machine states reachable from the
/// initial state when reading only those labels. Empty means complete.
std::vector<CompletenessGap> completeness_check(const OmegaRewardMachine& rm, const Mdp& m);

}  // namespace omegarm
