#include "omegarm/translate.hpp"

#include <deque>
#include <stdexcept>

#include "omegarm/errors.hpp"
#include "policy_iteration.hpp"

namespace omegarm {

std::string TranslatedMdp::state_name(StateId s) const {
  if (is_trap(s)) return "t";
  return "(" + std::to_string(base(s)) + "," + std::to_string(copy(s)) + ")";
}

TranslatedMdp translate(const ProductMdp& p, double lambda, double zeta, double f) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw ParameterError("lambda must lie in (0,1)");
  if (!(zeta >= 0.0 && zeta < 1.0)) throw ParameterError("zeta must lie in [0,1)");
  if (!(f >= 1.0)) throw ParameterError("f must be at least 1");

  const Mdp& base = p.mdp;
  const std::size_t n = base.num_states();
  TranslatedMdp tm;
  tm.base_states = n;
  tm.lambda = lambda;
  tm.zeta = zeta;
  tm.f = f;
  tm.mdp = Mdp(base.ap(), 2 * n + 1, p.init());

  // Per-branch (reward, accepting) recorded alongside construction.
  std::vector<std::vector<std::vector<std::pair<double, std::uint8_t>>>> meta(2 * n + 1);
  for (StateId q = 0; q < n; ++q) {
    tm.mdp.set_label(q, base.label(q));
    tm.mdp.set_label(n + q, base.label(q));
    for (ActionIndex a = 0; a < base.num_actions(q); ++a) {
      const Action& act = base.action(q, a);
      const auto r = p.rewards.of(q, a);
      const auto acc = p.accepting.of(q, a);

      std::vector<Branch> b0;
      auto& m0 = meta[q].emplace_back();
      for (std::size_t k = 0; k < act.branches.size(); ++k) {
        const Branch& br = act.branches[k];
        b0.push_back({br.target, lambda * br.prob});
        m0.emplace_back(r[k], acc[k]);
        b0.push_back({n + br.target, (1.0 - lambda) * br.prob});
        m0.emplace_back(r[k], acc[k]);
      }
      tm.mdp.add_action(q, act.name, std::move(b0));

      std::vector<Branch> b1;
      auto& m1 = meta[n + q].emplace_back();
      double trapped = 0.0;
      for (std::size_t k = 0; k < act.branches.size(); ++k) {
        const Branch& br = act.branches[k];
        if (acc[k]) {
          trapped += (1.0 - zeta) * br.prob;
          if (zeta > 0.0) {
            b1.push_back({n + br.target, zeta * br.prob});
            m1.emplace_back(0.0, 1);
          }
        } else {
          b1.push_back({n + br.target, br.prob});
          m1.emplace_back(0.0, 0);
        }
      }
      if (trapped > 0.0) {
        b1.push_back({2 * n, trapped});
        m1.emplace_back(f, 1);
      }
      tm.mdp.add_action(n + q, act.name, std::move(b1));
    }
  }
  tm.mdp.add_action(2 * n, "trap", {{2 * n, 1.0}});
  meta[2 * n].push_back({{0.0, 0}});

  tm.rewards = TransitionRewards(tm.mdp, 0.0);
  tm.accepting_edge = AcceptingSet(tm.mdp, 0);
  for (StateId s = 0; s < tm.mdp.num_states(); ++s) {
    for (ActionIndex a = 0; a < tm.mdp.num_actions(s); ++a) {
      for (std::size_t k = 0; k < meta[s][a].size(); ++k) {
        tm.rewards(s, a, k) = meta[s][a][k].first;
        tm.accepting_edge(s, a, k) = meta[s][a][k].second;
      }
    }
  }
  return tm;
}

namespace {

/// Copy-1 states that reach t with positive probability, with an action
/// that moves one layer closer (attractor order).
void trap_attractor(const TranslatedMdp& tm, std::vector<char>& reaches,
                    std::vector<ActionIndex>& choice) {
  const Mdp& m = tm.mdp;
  const std::size_t total = m.num_states();
  std::vector<std::vector<std::pair<StateId, ActionIndex>>> pred(total);
  for (StateId s = tm.base_states; s < total; ++s) {
    for (ActionIndex a = 0; a < m.num_actions(s); ++a) {
      for (const Branch& b : m.action(s, a).branches) pred[b.target].emplace_back(s, a);
    }
  }
  reaches.assign(total, 0);
  choice.assign(total, 0);
  std::deque<StateId> queue{tm.trap()};
  reaches[tm.trap()] = 1;
  while (!queue.empty()) {
    const StateId t = queue.front();
    queue.pop_front();
    for (const auto& [s, a] : pred[t]) {
      if (reaches[s]) continue;
      reaches[s] = 1;
      choice[s] = a;
      queue.push_back(s);
    }
  }
}

detail::TotalRewardSystem make_system(const TranslatedMdp& tm, const std::vector<char>& reaches) {
  const Mdp& m = tm.mdp;
  const std::size_t total = m.num_states();
  detail::TotalRewardSystem sys;
  sys.actions.resize(total);
  sys.fixed.assign(total, 0);
  sys.fixed_value.assign(total, 0.0);
  for (StateId s = 0; s < total; ++s) {
    if (tm.is_trap(s) || (tm.copy(s) == 1 && !reaches[s])) {
      sys.fixed[s] = 1;
      continue;
    }
    for (ActionIndex a = 0; a < m.num_actions(s); ++a) {
      detail::SystemAction act{a, 0.0, {}};
      const auto& br = m.action(s, a).branches;
      const auto r = tm.rewards.of(s, a);
      for (std::size_t k = 0; k < br.size(); ++k) {
        act.immediate += br[k].prob * r[k];
        act.next.emplace_back(br[k].target, br[k].prob);
      }
      sys.actions[s].push_back(std::move(act));
    }
  }
  return sys;
}

}  // namespace

TotalValueSolution solve_total(const TranslatedMdp& tm) {
  std::vector<char> reaches;
  std::vector<ActionIndex> choice;
  trap_attractor(tm, reaches, choice);
  const auto sys = make_system(tm, reaches);
  std::vector<std::size_t> initial(tm.mdp.num_states(), 0);
  for (StateId s = tm.base_states; s < tm.trap(); ++s) {
    if (reaches[s]) initial[s] = choice[s];
  }
  const auto pi = detail::policy_iteration(sys, std::move(initial), false);
  double scale = 1.0;
  for (double v : pi.values) scale = std::max(scale, std::abs(v));
  const double residual = detail::bellman_residual(sys, pi.values);
  if (residual > 1e-9 * scale) {
    throw SolverError("total-reward Bellman residual " + std::to_string(residual));
  }
  TotalValueSolution out;
  out.v = pi.values;
  out.witness.choice.assign(tm.mdp.num_states(), 0);
  for (StateId s = 0; s < tm.mdp.num_states(); ++s) {
    if (!sys.fixed[s]) out.witness.choice[s] = sys.actions[s][pi.policy[s]].original;
  }
  return out;
}

std::vector<double> evaluate_total(const TranslatedMdp& tm, const PositionalStrategy& sigma) {
  // Under a fixed strategy, copy-1 states whose chain never reaches t earn 0.
  const Mdp& m = tm.mdp;
  const std::size_t total = m.num_states();
  std::vector<std::vector<StateId>> pred(total);
  for (StateId s = 0; s < total; ++s) {
    for (const Branch& b : m.action(s, sigma.choice.at(s)).branches) pred[b.target].push_back(s);
  }
  std::vector<char> reaches(total, 0);
  std::deque<StateId> queue{tm.trap()};
  reaches[tm.trap()] = 1;
  while (!queue.empty()) {
    const StateId t = queue.front();
    queue.pop_front();
    for (StateId s : pred[t]) {
      if (!reaches[s]) {
        reaches[s] = 1;
        queue.push_back(s);
      }
    }
  }
  const auto sys = make_system(tm, reaches);
  std::vector<std::size_t> policy(total, 0);
  for (StateId s = 0; s < total; ++s) {
    if (!sys.fixed[s]) policy[s] = sigma.choice[s];
  }
  return detail::evaluate_policy(sys, policy);
}

TranslatedStep sample_with(const TranslatedMdp& tm, StateId state, ActionIndex action, double u) {
  if (tm.is_trap(state)) return {state, 0.0, false};
  if (action >= tm.mdp.num_actions(state)) {
    throw std::invalid_argument("action " + std::to_string(action) + " not enabled at " +
                                tm.state_name(state));
  }
  const auto& br = tm.mdp.action(state, action).branches;
  const std::size_t k = sample_branch(br, u);
  return {br[k].target, tm.rewards(state, action, k), tm.accepting_edge(state, action, k) != 0};
}

}  // namespace omegarm
