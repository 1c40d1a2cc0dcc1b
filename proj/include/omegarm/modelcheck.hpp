#pragma once

#include <cstddef>
#include <vector>

#include "omegarm/mdp.hpp"
#include "omegarm/product.hpp"

namespace omegarm {

/// Tolerance for p_q == p_(q,a) when selecting safe actions.
inline constexpr double kSafeActionTolerance = 1e-9;

struct QualitativeResult {
  std::vector<char> almost_sure;  // membership in Q1
  /// On Q1: an action that stays in Q1 and moves strictly closer to an
  /// accepting transition. Lowest action index elsewhere.
  PositionalStrategy strategy;
};

/// Optimal Büchi satisfaction probabilities on a product.
struct BuchiSolution {
  std::vector<double> p;                         // p_q
  std::vector<std::vector<double>> p_action;     // p_(q,a)
  std::vector<char> almost_sure;                 // Q1
  std::vector<std::vector<ActionIndex>> safe_actions;
  PositionalStrategy witness;                    // sigma*, achieves p from every state
};

/// Product restricted to safe actions; removed states have no actions.
struct PrunedProduct {
  std::vector<char> alive;
  std::vector<std::vector<ActionIndex>> actions;

  std::size_t num_alive() const;
  std::size_t num_actions() const;
};

struct DiscountedSolution {
  std::vector<double> rho;  // NaN on removed states
  PositionalStrategy tau;   // meaningful on alive states only
};

/// Play head for switch_step product steps, then tail forever.
struct StitchedStrategy {
  std::size_t switch_step = 0;
  PositionalStrategy head;
  PositionalStrategy tail;
};

struct StitchedEvaluation {
  double psat = 0.0;
  double value = 0.0;
};

/// Alternates removal of states that cannot reach an accepting transition
/// and of state-action pairs that may leave the surviving set, to a fixed
/// point. The survivors are the states winning the Büchi objective almost
/// surely.
QualitativeResult qualitative(const ProductMdp& p);

/// Maximal probability of reaching Q1 (hence of Büchi acceptance), as the
/// least fixed point of the max-reachability equations, by policy iteration
/// from an attractor policy.
BuchiSolution quantitative(const ProductMdp& p);

/// Keeps safe actions only, then drops states left without actions (and
/// actions leading to them) until stable.
PrunedProduct prune(const ProductMdp& p, const BuchiSolution& sol);

/// Product restricted to the pruned actions as a standalone ProductMdp.
/// original_state maps new ids to old ones.
ProductMdp materialize(const ProductMdp& p, const PrunedProduct& pruned,
                       std::vector<StateId>* original_state = nullptr);

/// Largest |reward| over transitions that survive pruning.
double max_abs_reward(const ProductMdp& p, const PrunedProduct& pruned);

/// Optimal discounted values over the pruned action sets. tau is greedy
/// with respect to rho, ties broken towards the lowest action index.
DiscountedSolution discounted_optimal(const ProductMdp& p, const PrunedProduct& pruned, double lambda);

/// Smallest k with lambda^k * rmax / (1 - lambda) <= epsilon; 0 when rmax is 0.
std::size_t switch_step(double lambda, double epsilon, double rmax);

StitchedStrategy stitch(const BuchiSolution& sol, const DiscountedSolution& disc, double lambda,
                        double epsilon, double rmax);

/// Exact Büchi probability and discounted value of a stitched strategy
/// from start, by propagating the state distribution through the head
/// phase and solving the tail's induced chain.
StitchedEvaluation evaluate_stitched(const ProductMdp& p, const StitchedStrategy& st, double lambda,
                                     StateId start);
inline StitchedEvaluation evaluate_stitched(const ProductMdp& p, const StitchedStrategy& st,
                                            double lambda) {
  return evaluate_stitched(p, st, lambda, p.init());
}

/// Everything the model checker computes for one product and discount.
struct ModelCheckResult {
  BuchiSolution buchi;
  PrunedProduct pruned;
  DiscountedSolution discounted;
  double lambda = 0.0;
  double rmax = 0.0;

  double blike(StateId q) const { return buchi.p[q]; }
  double bval(StateId q) const { return discounted.rho[q]; }
};

ModelCheckResult model_check(const ProductMdp& p, double lambda);

}  // namespace omegarm
