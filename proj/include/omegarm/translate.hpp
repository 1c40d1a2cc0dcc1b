#pragma once

#include <random>
#include <string>
#include <vector>

#include "omegarm/mdp.hpp"
#include "omegarm/product.hpp"

namespace omegarm {

/// Total-reward MDP over (Q x {0,1}) + {t} that embeds the Büchi-discounted
/// objective of a product.
///
/// Copy 0 plays the discounted phase: each step keeps the base reward, stays
/// in copy 0 with probability lambda and moves to copy 1 with probability
/// 1 - lambda. Copy 1 plays the Büchi phase: every accepting base transition
/// diverts probability 1 - zeta to the trap t and pays f on the way; all other
/// copy-1 rewards are 0. t is absorbing.
///
/// State ids: (q,0) = q, (q,1) = n + q, t = 2n, where n is the base size.
/// Action indices at (q,c) equal the base action indices at q; t has a single
/// action but accepts any index when sampled.
struct TranslatedMdp {
  Mdp mdp;
  TransitionRewards rewards;
  AcceptingSet accepting_edge;  // branch stems from an accepting base transition
  std::size_t base_states = 0;
  double lambda = 0.0;
  double zeta = 0.0;
  double f = 0.0;

  StateId state(StateId q, int copy) const { return copy == 0 ? q : base_states + q; }
  StateId trap() const { return 2 * base_states; }
  StateId init() const { return mdp.init(); }
  bool is_trap(StateId s) const { return s == trap(); }
  int copy(StateId s) const { return s < base_states ? 0 : 1; }
  StateId base(StateId s) const { return s < base_states ? s : s - base_states; }
  std::string state_name(StateId s) const;
};

/// lambda in (0,1), zeta in [0,1), f >= 1. zeta = 0 is accepted as the
/// boundary case where the first accepting copy-1 transition always traps.
TranslatedMdp translate(const ProductMdp& p, double lambda, double zeta, double f);

struct TotalValueSolution {
  std::vector<double> v;  // optimal expected total reward, v(t) = 0
  PositionalStrategy witness;
};

/// Optimal total reward by policy iteration; copy-1 states that cannot reach
/// t have value 0.
TotalValueSolution solve_total(const TranslatedMdp& tm);

/// Exact total reward of a positional strategy on the translated MDP.
std::vector<double> evaluate_total(const TranslatedMdp& tm, const PositionalStrategy& sigma);

struct TranslatedStep {
  StateId next = 0;
  double reward = 0.0;
  bool accepting_edge = false;
};

/// One step from state under action using the uniform draw u in [0,1).
/// Throws std::invalid_argument if action is not enabled (t accepts any).
TranslatedStep sample_with(const TranslatedMdp& tm, StateId state, ActionIndex action, double u);

template <typename Rng>
TranslatedStep sample(const TranslatedMdp& tm, StateId state, ActionIndex action, Rng& rng) {
  return sample_with(tm, state, action, std::uniform_real_distribution<double>(0.0, 1.0)(rng));
}

}  // namespace omegarm
