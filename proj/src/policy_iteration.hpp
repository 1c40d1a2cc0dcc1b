#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "omegarm/mdp.hpp"

namespace omegarm::detail {

/// Q(s,a) = immediate + sum_k weight_k * v(target_k), with sum weight <= 1.
struct SystemAction {
  ActionIndex original = 0;  // index in the caller's action list
  double immediate = 0.0;
  std::vector<std::pair<StateId, double>> next;
};

/// Maximisation problem over a substochastic system. States marked fixed
/// keep their given value and need no actions.
struct TotalRewardSystem {
  std::vector<std::vector<SystemAction>> actions;
  std::vector<char> fixed;
  std::vector<double> fixed_value;
};

struct PolicyIterationResult {
  std::vector<double> values;
  std::vector<std::size_t> policy;  // position in actions[s]; 0 for fixed states
  std::size_t iterations = 0;
};

double q_value(const SystemAction& act, const std::vector<double>& v);

/// Exact value of a policy (positions into actions[s]).
std::vector<double> evaluate_policy(const TotalRewardSystem& sys, const std::vector<std::size_t>& policy);

/// Howard policy iteration with exact solves. The initial policy must reach
/// the fixed states (or leak mass) with probability 1 from every free state;
/// strict improvement then keeps every iterate that way. With
/// lowest_index_ties the final policy is re-chosen as the lowest-position
/// action within tolerance of the optimum and re-evaluated; only safe when
/// every policy is proper (contracting systems).
PolicyIterationResult policy_iteration(const TotalRewardSystem& sys, std::vector<std::size_t> initial,
                                       bool lowest_index_ties);

/// Max Bellman residual |v(s) - max_a Q(s,a)| over free states.
double bellman_residual(const TotalRewardSystem& sys, const std::vector<double>& v);

}  // namespace omegarm::detail
