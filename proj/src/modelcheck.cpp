#include "omegarm/modelcheck.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "omegarm/errors.hpp"
#include "policy_iteration.hpp"

namespace omegarm {

namespace {

constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();
constexpr double kBellmanTolerance = 1e-9;

struct StateAction {
  StateId state;
  ActionIndex action;
};

std::vector<std::vector<StateAction>> predecessors(const Mdp& m) {
  std::vector<std::vector<StateAction>> pred(m.num_states());
  for (StateId s = 0; s < m.num_states(); ++s) {
    for (ActionIndex a = 0; a < m.num_actions(s); ++a) {
      for (const Branch& b : m.action(s, a).branches) pred[b.target].push_back({s, a});
    }
  }
  return pred;
}

/// Backward BFS from the seeded states over allowed actions. Each reached
/// state records the action that first led it one layer closer.
void attract(const std::vector<std::vector<StateAction>>& pred,
             const std::vector<std::vector<char>>& allowed, const std::vector<char>& eligible,
             std::deque<StateId> queue, std::vector<std::size_t>& layer,
             std::vector<ActionIndex>& choice) {
  while (!queue.empty()) {
    const StateId t = queue.front();
    queue.pop_front();
    for (const auto& [s, a] : pred[t]) {
      if (!eligible[s] || !allowed[s][a] || layer[s] != kUnreached) continue;
      layer[s] = layer[t] + 1;
      choice[s] = a;
      queue.push_back(s);
    }
  }
}

}  // namespace

std::size_t PrunedProduct::num_alive() const {
  return static_cast<std::size_t>(std::count(alive.begin(), alive.end(), 1));
}

std::size_t PrunedProduct::num_actions() const {
  std::size_t n = 0;
  for (const auto& a : actions) n += a.size();
  return n;
}

QualitativeResult qualitative(const ProductMdp& p) {
  const Mdp& m = p.mdp;
  const std::size_t n = m.num_states();
  const auto pred = predecessors(m);
  std::vector<char> alive(n, 1);
  std::vector<std::vector<char>> allowed(n);
  std::vector<std::size_t> count(n);
  for (StateId s = 0; s < n; ++s) {
    allowed[s].assign(m.num_actions(s), 1);
    count[s] = m.num_actions(s);
  }

  std::vector<ActionIndex> choice(n, 0);
  for (;;) {
    // Keep only states from which an accepting transition is reachable.
    std::vector<std::size_t> layer(n, kUnreached);
    std::fill(choice.begin(), choice.end(), 0);
    std::deque<StateId> queue;
    for (StateId s = 0; s < n; ++s) {
      if (!alive[s]) continue;
      for (ActionIndex a = 0; a < m.num_actions(s) && layer[s] == kUnreached; ++a) {
        if (!allowed[s][a]) continue;
        for (std::uint8_t acc : p.accepting.of(s, a)) {
          if (acc) {
            layer[s] = 0;
            choice[s] = a;
            queue.push_back(s);
            break;
          }
        }
      }
    }
    attract(pred, allowed, alive, std::move(queue), layer, choice);

    std::deque<StateId> removed;
    for (StateId s = 0; s < n; ++s) {
      if (alive[s] && layer[s] == kUnreached) {
        alive[s] = 0;
        removed.push_back(s);
      }
    }
    if (removed.empty()) break;

    // Remove pairs that may move into removed states, cascading.
    while (!removed.empty()) {
      const StateId t = removed.front();
      removed.pop_front();
      for (const auto& [s, a] : pred[t]) {
        if (!allowed[s][a]) continue;
        allowed[s][a] = 0;
        if (--count[s] == 0 && alive[s]) {
          alive[s] = 0;
          removed.push_back(s);
        }
      }
    }
  }

  QualitativeResult out;
  out.almost_sure = alive;
  out.strategy.choice.assign(n, 0);
  for (StateId s = 0; s < n; ++s) {
    if (alive[s]) out.strategy.choice[s] = choice[s];
  }
  return out;
}

BuchiSolution quantitative(const ProductMdp& p) {
  const Mdp& m = p.mdp;
  const std::size_t n = m.num_states();
  const auto qual = qualitative(p);
  const auto pred = predecessors(m);

  std::vector<std::vector<char>> all(n);
  for (StateId s = 0; s < n; ++s) all[s].assign(m.num_actions(s), 1);
  std::vector<std::size_t> layer(n, kUnreached);
  std::vector<ActionIndex> attractor(n, 0);
  std::deque<StateId> queue;
  std::vector<char> eligible(n, 1);
  for (StateId s = 0; s < n; ++s) {
    if (qual.almost_sure[s]) {
      layer[s] = 0;
      queue.push_back(s);
      eligible[s] = 0;
    }
  }
  attract(pred, all, eligible, std::move(queue), layer, attractor);

  detail::TotalRewardSystem sys;
  sys.actions.resize(n);
  sys.fixed.assign(n, 0);
  sys.fixed_value.assign(n, 0.0);
  std::vector<std::size_t> initial(n, 0);
  for (StateId s = 0; s < n; ++s) {
    if (qual.almost_sure[s] || layer[s] == kUnreached) {
      sys.fixed[s] = 1;
      sys.fixed_value[s] = qual.almost_sure[s] ? 1.0 : 0.0;
      continue;
    }
    for (ActionIndex a = 0; a < m.num_actions(s); ++a) {
      detail::SystemAction act{a, 0.0, {}};
      for (const Branch& b : m.action(s, a).branches) act.next.emplace_back(b.target, b.prob);
      sys.actions[s].push_back(std::move(act));
    }
    initial[s] = attractor[s];
  }
  const auto pi = detail::policy_iteration(sys, std::move(initial), false);

  BuchiSolution sol;
  sol.p = pi.values;
  for (double& x : sol.p) x = std::clamp(x, 0.0, 1.0);
  sol.almost_sure = qual.almost_sure;
  sol.p_action.resize(n);
  sol.safe_actions.resize(n);
  sol.witness.choice.assign(n, 0);
  for (StateId s = 0; s < n; ++s) {
    for (ActionIndex a = 0; a < m.num_actions(s); ++a) {
      double pa = 0.0;
      for (const Branch& b : m.action(s, a).branches) pa += b.prob * sol.p[b.target];
      sol.p_action[s].push_back(pa);
      if (std::abs(pa - sol.p[s]) <= kSafeActionTolerance) sol.safe_actions[s].push_back(a);
    }
    if (qual.almost_sure[s]) {
      sol.witness.choice[s] = qual.strategy.choice[s];
    } else if (!sys.fixed[s]) {
      sol.witness.choice[s] = sys.actions[s][pi.policy[s]].original;
    }
  }
  const double residual = detail::bellman_residual(sys, pi.values);
  if (residual > kBellmanTolerance) {
    throw SolverError("reachability Bellman residual " + std::to_string(residual));
  }
  return sol;
}

PrunedProduct prune(const ProductMdp& p, const BuchiSolution& sol) {
  const Mdp& m = p.mdp;
  const std::size_t n = m.num_states();
  PrunedProduct out;
  out.alive.assign(n, 1);
  out.actions = sol.safe_actions;
  for (bool changed = true; changed;) {
    changed = false;
    for (StateId s = 0; s < n; ++s) {
      if (!out.alive[s]) continue;
      auto& acts = out.actions[s];
      const auto keep_end = std::remove_if(acts.begin(), acts.end(), [&](ActionIndex a) {
        for (const Branch& b : m.action(s, a).branches) {
          if (!out.alive[b.target]) return true;
        }
        return false;
      });
      if (keep_end != acts.end()) {
        acts.erase(keep_end, acts.end());
        changed = true;
      }
      if (acts.empty()) {
        out.alive[s] = 0;
        changed = true;
      }
    }
  }
  return out;
}

ProductMdp materialize(const ProductMdp& p, const PrunedProduct& pruned,
                       std::vector<StateId>* original_state) {
  const std::size_t n = p.num_states();
  std::vector<StateId> new_id(n, n);
  std::vector<StateId> old_id;
  for (StateId s = 0; s < n; ++s) {
    if (pruned.alive[s]) {
      new_id[s] = old_id.size();
      old_id.push_back(s);
    }
  }
  ProductMdp out;
  out.mdp = Mdp(p.mdp.ap(), 0);
  for (StateId s : old_id) out.mdp.add_state(p.mdp.label(s));
  if (pruned.alive[p.init()]) out.mdp.set_init(new_id[p.init()]);
  for (StateId i = 0; i < old_id.size(); ++i) {
    const StateId s = old_id[i];
    for (ActionIndex a : pruned.actions[s]) {
      const Action& act = p.mdp.action(s, a);
      std::vector<Branch> branches;
      for (const Branch& b : act.branches) branches.push_back({new_id[b.target], b.prob});
      out.mdp.add_action(i, act.name, std::move(branches));
    }
    if (p.has_back_maps()) {
      out.states.push_back(p.states[s]);
      auto& ch = out.choices.emplace_back();
      for (ActionIndex a : pruned.actions[s]) ch.push_back(p.choices[s][a]);
    }
  }
  out.rewards = TransitionRewards(out.mdp, 0.0);
  out.accepting = AcceptingSet(out.mdp, 0);
  for (StateId i = 0; i < old_id.size(); ++i) {
    const StateId s = old_id[i];
    for (std::size_t j = 0; j < pruned.actions[s].size(); ++j) {
      const ActionIndex a = pruned.actions[s][j];
      const auto r = p.rewards.of(s, a);
      const auto acc = p.accepting.of(s, a);
      for (std::size_t k = 0; k < r.size(); ++k) {
        out.rewards(i, j, k) = r[k];
        out.accepting(i, j, k) = acc[k];
      }
    }
  }
  if (original_state) *original_state = std::move(old_id);
  return out;
}

double max_abs_reward(const ProductMdp& p, const PrunedProduct& pruned) {
  double r = 0.0;
  for (StateId s = 0; s < p.num_states(); ++s) {
    if (!pruned.alive[s]) continue;
    for (ActionIndex a : pruned.actions[s]) {
      for (double x : p.rewards.of(s, a)) r = std::max(r, std::abs(x));
    }
  }
  return r;
}

DiscountedSolution discounted_optimal(const ProductMdp& p, const PrunedProduct& pruned, double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw ParameterError("lambda must lie in [0,1)");
  const Mdp& m = p.mdp;
  const std::size_t n = m.num_states();
  detail::TotalRewardSystem sys;
  sys.actions.resize(n);
  sys.fixed.assign(n, 0);
  sys.fixed_value.assign(n, 0.0);
  for (StateId s = 0; s < n; ++s) {
    if (!pruned.alive[s]) {
      sys.fixed[s] = 1;
      continue;
    }
    for (ActionIndex a : pruned.actions[s]) {
      detail::SystemAction act{a, 0.0, {}};
      const auto& br = m.action(s, a).branches;
      const auto r = p.rewards.of(s, a);
      for (std::size_t k = 0; k < br.size(); ++k) {
        act.immediate += br[k].prob * r[k];
        act.next.emplace_back(br[k].target, lambda * br[k].prob);
      }
      sys.actions[s].push_back(std::move(act));
    }
  }
  const auto pi = detail::policy_iteration(sys, std::vector<std::size_t>(n, 0), true);
  const double residual = detail::bellman_residual(sys, pi.values);
  double scale = 1.0;
  for (double v : pi.values) scale = std::max(scale, std::abs(v));
  if (residual > kBellmanTolerance * scale) {
    throw SolverError("discounted Bellman residual " + std::to_string(residual));
  }

  DiscountedSolution out;
  out.rho.assign(n, std::numeric_limits<double>::quiet_NaN());
  out.tau.choice.assign(n, 0);
  for (StateId s = 0; s < n; ++s) {
    if (!pruned.alive[s]) continue;
    out.rho[s] = pi.values[s];
    out.tau.choice[s] = sys.actions[s][pi.policy[s]].original;
  }
  return out;
}

std::size_t switch_step(double lambda, double epsilon, double rmax) {
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
  if (!(lambda >= 0.0 && lambda < 1.0)) throw ParameterError("lambda must lie in [0,1)");
  const double bound = rmax / (1.0 - lambda);
  if (rmax == 0.0 || bound <= epsilon) return 0;
  if (lambda == 0.0) return 1;
  auto tail = [&](std::size_t k) { return std::pow(lambda, static_cast<double>(k)) * bound; };
  auto k = static_cast<std::size_t>(std::max(0.0, std::ceil(std::log(epsilon / bound) / std::log(lambda))));
  while (k > 0 && tail(k - 1) <= epsilon) --k;
  while (tail(k) > epsilon) ++k;
  return k;
}

StitchedStrategy stitch(const BuchiSolution& sol, const DiscountedSolution& disc, double lambda,
                        double epsilon, double rmax) {
  return {switch_step(lambda, epsilon, rmax), disc.tau, sol.witness};
}

StitchedEvaluation evaluate_stitched(const ProductMdp& p, const StitchedStrategy& st, double lambda,
                                     StateId start) {
  const Mdp& m = p.mdp;
  const std::size_t n = m.num_states();
  std::vector<double> dist(n, 0.0), next(n, 0.0);
  dist.at(start) = 1.0;
  double value = 0.0;
  double discount = 1.0;
  for (std::size_t i = 0; i < st.switch_step; ++i) {
    std::fill(next.begin(), next.end(), 0.0);
    for (StateId q = 0; q < n; ++q) {
      if (dist[q] == 0.0) continue;
      const ActionIndex a = st.head.choice[q];
      const auto& br = m.action(q, a).branches;
      const auto r = p.rewards.of(q, a);
      for (std::size_t k = 0; k < br.size(); ++k) {
        const double mass = dist[q] * br[k].prob;
        value += discount * mass * r[k];
        next[br[k].target] += mass;
      }
    }
    dist.swap(next);
    discount *= lambda;
  }
  const auto tail_value = evaluate_positional(m, st.tail, p.rewards, lambda);
  const auto tail_psat = buchi_prob_of_strategy(m, st.tail, p.accepting);
  StitchedEvaluation out;
  out.value = value;
  for (StateId q = 0; q < n; ++q) {
    out.value += discount * dist[q] * tail_value[q];
    out.psat += dist[q] * tail_psat[q];
  }
  return out;
}

ModelCheckResult model_check(const ProductMdp& p, double lambda) {
  ModelCheckResult r;
  r.lambda = lambda;
  r.buchi = quantitative(p);
  r.pruned = prune(p, r.buchi);
  r.discounted = discounted_optimal(p, r.pruned, lambda);
  r.rmax = max_abs_reward(p, r.pruned);
  return r;
}

}  // namespace omegarm
