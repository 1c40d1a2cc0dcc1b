#include "omegarm/rm.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "omegarm/errors.hpp"

namespace omegarm {

OmegaRewardMachine::OmegaRewardMachine(std::vector<std::string> ap, std::size_t num_states,
                                       MachineState init)
    : ap_(std::move(ap)), num_states_(num_states), init_(init), out_(num_states) {
  if (num_states == 0) throw ModelError("reward machine needs at least one state");
  if (init >= num_states) throw ModelError("machine initial state out of range");
}

void OmegaRewardMachine::add_edge(MachineEdge edge) {
  if (edge.source >= num_states_ || edge.target >= num_states_) {
    throw ModelError("machine edge " + std::to_string(edge.source) + " -> " +
                     std::to_string(edge.target) + " references an unknown state");
  }
  out_[edge.source].push_back(edges_.size());
  edges_.push_back(std::move(edge));
}

void OmegaRewardMachine::add_edge(MachineState source, const std::string& guard_text,
                                  MachineState target, double reward, bool accepting) {
  add_edge({source, Guard::parse(guard_text, ap_), target, reward, accepting});
}

std::vector<MachineStep> OmegaRewardMachine::step(MachineState u, Label label) const {
  std::vector<MachineStep> out;
  for (std::size_t i : out_.at(u)) {
    const MachineEdge& e = edges_[i];
    if (e.guard.eval(label)) out.push_back({e.target, e.reward, e.accepting});
  }
  return out;
}

OmegaRewardMachine OmegaRewardMachine::as_buchi() const {
  OmegaRewardMachine out = *this;
  for (auto& e : out.edges_) e.reward = 0.0;
  return out;
}

OmegaRewardMachine OmegaRewardMachine::as_reward_machine() const {
  OmegaRewardMachine out = *this;
  for (auto& e : out.edges_) e.accepting = false;
  return out;
}

std::vector<Label> reachable_labels(const Mdp& m) {
  std::vector<char> seen(m.num_states(), 0);
  std::deque<StateId> queue{m.init()};
  seen[m.init()] = 1;
  std::set<Label> labels;
  while (!queue.empty()) {
    const StateId s = queue.front();
    queue.pop_front();
    labels.insert(m.label(s));
    for (const Action& act : m.actions(s)) {
      for (const Branch& b : act.branches) {
        if (!seen[b.target]) {
          seen[b.target] = 1;
          queue.push_back(b.target);
        }
      }
    }
  }
  return {labels.begin(), labels.end()};
}

std::vector<CompletenessGap> completeness_check(const OmegaRewardMachine& rm, const Mdp& m) {
  if (rm.ap() != m.ap()) throw ModelError("machine and MDP atomic propositions differ");
  const auto labels = reachable_labels(m);
  std::vector<char> seen(rm.num_states(), 0);
  std::deque<MachineState> queue{rm.init()};
  seen[rm.init()] = 1;
  std::vector<CompletenessGap> gaps;
  while (!queue.empty()) {
    const MachineState u = queue.front();
    queue.pop_front();
    for (Label l : labels) {
      const auto steps = rm.step(u, l);
      if (steps.empty()) gaps.push_back({u, l});
      for (const MachineStep& st : steps) {
        if (!seen[st.target]) {
          seen[st.target] = 1;
          queue.push_back(st.target);
        }
      }
    }
  }
  std::sort(gaps.begin(), gaps.end(), [](const auto& a, const auto& b) {
    return a.state != b.state ? a.state < b.state : a.label < b.label;
  });
  return gaps;
}

}  // namespace omegarm
