#include "policy_iteration.hpp"

#include <algorithm>
#include <cmath>

#include "linear.hpp"
#include "omegarm/errors.hpp"

namespace omegarm::detail {

namespace {
constexpr double kImprovementTolerance = 1e-11;
constexpr std::size_t kMaxIterations = 100000;

double scale_of(const std::vector<double>& v) {
  double m = 1.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}
}  // namespace

double q_value(const SystemAction& act, const std::vector<double>& v) {
  double q = act.immediate;
  for (const auto& [t, w] : act.next) q += w * v[t];
  return q;
}

std::vector<double> evaluate_policy(const TotalRewardSystem& sys, const std::vector<std::size_t>& policy) {
  const std::size_t n = sys.actions.size();
  std::vector<std::size_t> slot(n, n);
  std::vector<StateId> free;
  for (StateId s = 0; s < n; ++s) {
    if (!sys.fixed[s]) {
      slot[s] = free.size();
      free.push_back(s);
    }
  }
  std::vector<Entry> entries;
  std::vector<double> rhs(free.size(), 0.0);
  for (std::size_t i = 0; i < free.size(); ++i) {
    const SystemAction& act = sys.actions[free[i]].at(policy[free[i]]);
    entries.push_back({i, i, 1.0});
    rhs[i] = act.immediate;
    for (const auto& [t, w] : act.next) {
      if (sys.fixed[t]) {
        rhs[i] += w * sys.fixed_value[t];
      } else {
        entries.push_back({i, slot[t], -w});
      }
    }
  }
  const auto x = solve_sparse(free.size(), entries, rhs);
  std::vector<double> v(n, 0.0);
  for (StateId s = 0; s < n; ++s) v[s] = sys.fixed[s] ? sys.fixed_value[s] : x[slot[s]];
  return v;
}

PolicyIterationResult policy_iteration(const TotalRewardSystem& sys, std::vector<std::size_t> policy,
                                       bool lowest_index_ties) {
  const std::size_t n = sys.actions.size();
  PolicyIterationResult out;
  std::vector<double> v;
  for (;;) {
    if (++out.iterations > kMaxIterations) throw SolverError("policy iteration did not converge");
    v = evaluate_policy(sys, policy);
    const double tol = kImprovementTolerance * scale_of(v);
    bool changed = false;
    for (StateId s = 0; s < n; ++s) {
      if (sys.fixed[s]) continue;
      const auto& acts = sys.actions[s];
      double best = q_value(acts[policy[s]], v);
      for (std::size_t a = 0; a < acts.size(); ++a) {
        const double q = q_value(acts[a], v);
        if (q > best + tol) {
          best = q;
          policy[s] = a;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  if (lowest_index_ties) {
    const double tol = kImprovementTolerance * scale_of(v);
    bool changed = false;
    for (StateId s = 0; s < n; ++s) {
      if (sys.fixed[s]) continue;
      const auto& acts = sys.actions[s];
      double best = -INFINITY;
      for (const auto& act : acts) best = std::max(best, q_value(act, v));
      for (std::size_t a = 0; a < acts.size(); ++a) {
        if (q_value(acts[a], v) >= best - tol) {
          changed = changed || a != policy[s];
          policy[s] = a;
          break;
        }
      }
    }
    if (changed) v = evaluate_policy(sys, policy);
  }
  out.values = std::move(v);
  out.policy = std::move(policy);
  return out;
}

double bellman_residual(const TotalRewardSystem& sys, const std::vector<double>& v) {
  double r = 0.0;
  for (StateId s = 0; s < sys.actions.size(); ++s) {
    if (sys.fixed[s]) continue;
    double best = -INFINITY;
    for (const auto& act : sys.actions[s]) best = std::max(best, q_value(act, v));
    r = std::max(r, std::abs(v[s] - best));
  }
  return r;
}

}  // namespace omegarm::detail
