#include "omegarm/product.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

#include "omegarm/errors.hpp"

namespace omegarm {

double ProductMdp::max_abs_reward() const {
  double r = 0.0;
  for (double v : rewards.values()) r = std::max(r, std::abs(v));
  return r;
}

std::vector<MachineStep> product_steps(const OmegaRewardMachine& rm, MachineState u, Label label) {
  std::vector<MachineStep> out;
  for (const MachineStep& st : rm.step(u, label)) {
    if (std::find(out.begin(), out.end(), st) == out.end()) out.push_back(st);
  }
  return out;
}

ProductMdp build_product(const Mdp& m, const OmegaRewardMachine& rm) {
  if (rm.ap() != m.ap()) throw ModelError("machine and MDP atomic propositions differ");
  const std::size_t nu = rm.num_states();
  std::vector<StateId> id(m.num_states() * nu, static_cast<StateId>(-1));
  auto key = [nu](StateId s, MachineState u) { return s * nu + u; };

  ProductMdp p;
  p.mdp = Mdp(m.ap(), 0);
  std::vector<CompletenessGap> gaps;
  std::deque<StateId> queue;

  auto intern = [&](StateId s, MachineState u) {
    StateId& slot = id[key(s, u)];
    if (slot == static_cast<StateId>(-1)) {
      slot = p.mdp.add_state(m.label(s));
      p.states.push_back({s, u});
      queue.push_back(slot);
    }
    return slot;
  };

  intern(m.init(), rm.init());
  std::map<std::pair<MachineState, Label>, std::vector<MachineStep>> cache;
  while (!queue.empty()) {
    const StateId q = queue.front();
    queue.pop_front();
    const auto [s, u] = p.states[q];
    auto [it, fresh] = cache.try_emplace({u, m.label(s)});
    if (fresh) it->second = product_steps(rm, u, m.label(s));
    const auto& steps = it->second;
    if (steps.empty()) {
      const CompletenessGap gap{u, m.label(s)};
      if (std::find(gaps.begin(), gaps.end(), gap) == gaps.end()) gaps.push_back(gap);
      continue;
    }
    for (ActionIndex a = 0; a < m.num_actions(s); ++a) {
      const Action& act = m.action(s, a);
      for (const MachineStep& st : steps) {
        std::vector<Branch> branches;
        branches.reserve(act.branches.size());
        for (const Branch& b : act.branches) branches.push_back({intern(b.target, st.target), b.prob});
        p.mdp.add_action(q, act.name + "/" + std::to_string(st.target), std::move(branches));
        if (p.choices.size() <= q) p.choices.resize(q + 1);
        p.choices[q].push_back({a, st});
      }
    }
  }
  if (!gaps.empty()) {
    std::string msg = "reward machine is not input-enabled on:";
    for (const auto& g : gaps) {
      msg += " (u=" + std::to_string(g.state) + ", {";
      const auto names = label_names(g.label, m.ap());
      for (std::size_t i = 0; i < names.size(); ++i) msg += (i ? "," : "") + names[i];
      msg += "})";
    }
    throw IncompleteMachineError(msg, std::move(gaps));
  }
  p.mdp.set_init(0);
  p.choices.resize(p.mdp.num_states());

  p.rewards = TransitionRewards(p.mdp, 0.0);
  p.accepting = AcceptingSet(p.mdp, 0);
  for (StateId q = 0; q < p.mdp.num_states(); ++q) {
    for (ActionIndex a = 0; a < p.mdp.num_actions(q); ++a) {
      const MachineStep& st = p.choices[q][a].step;
      for (std::size_t k = 0; k < p.mdp.action(q, a).branches.size(); ++k) {
        p.rewards(q, a, k) = st.reward;
        p.accepting(q, a, k) = st.accepting ? 1 : 0;
      }
    }
  }
  return p;
}

StateId find_product_state(const ProductMdp& p, ProductState q) {
  const auto it = std::find(p.states.begin(), p.states.end(), q);
  return static_cast<StateId>(it - p.states.begin());
}

LazyProduct::LazyProduct(const Mdp& m, const OmegaRewardMachine& rm) : mdp_(&m), rm_(&rm) {
  if (rm.ap() != m.ap()) throw ModelError("machine and MDP atomic propositions differ");
  reset();
}

ProductState LazyProduct::reset() {
  current_ = {mdp_->init(), rm_->init()};
  return current_;
}

std::vector<ProductChoice> LazyProduct::enabled() const {
  const auto steps = product_steps(*rm_, current_.machine_state, mdp_->label(current_.mdp_state));
  std::vector<ProductChoice> out;
  for (ActionIndex a = 0; a < mdp_->num_actions(current_.mdp_state); ++a) {
    for (const MachineStep& st : steps) out.push_back({a, st});
  }
  return out;
}

LazyStep LazyProduct::step_with(const ProductChoice& choice, double u) {
  const StateId s = current_.mdp_state;
  if (choice.mdp_action >= mdp_->num_actions(s)) {
    throw std::invalid_argument("action " + std::to_string(choice.mdp_action) +
                                " not enabled at MDP state " + std::to_string(s));
  }
  const auto steps = rm_->step(current_.machine_state, mdp_->label(s));
  if (std::find(steps.begin(), steps.end(), choice.step) == steps.end()) {
    throw std::invalid_argument("machine step to " + std::to_string(choice.step.target) +
                                " not enabled at machine state " +
                                std::to_string(current_.machine_state));
  }
  const auto& branches = mdp_->action(s, choice.mdp_action).branches;
  const StateId next = branches[sample_branch(branches, u)].target;
  current_ = {next, choice.step.target};
  return {current_, choice.step.reward, choice.step.accepting};
}

}  // namespace omegarm
