#include <doctest.h>

#include <cmath>
#include <random>

#include "omegarm/envs.hpp"
#include "omegarm/modelcheck.hpp"
#include "test_util.hpp"

using namespace omegarm;
using namespace omegarm::testing;

namespace {

ProductMdp synthetic(Mdp m) {
  ProductMdp p;
  p.mdp = std::move(m);
  p.rewards = TransitionRewards(p.mdp, 0.0);
  p.accepting = AcceptingSet(p.mdp, 0);
  return p;
}

// 0 --alpha--> {1: 0.5, 2: 0.5}, 0 --beta--> 1; 1 accepting loop; 2 sink.
ProductMdp coin_flip() {
  Mdp m({}, 3, 0);
  m.add_action(0, "alpha", {{1, 0.5}, {2, 0.5}});
  m.add_action(0, "beta", {{1, 1.0}});
  m.add_action(1, "loop", {{1, 1.0}});
  m.add_action(2, "loop", {{2, 1.0}});
  ProductMdp p = synthetic(std::move(m));
  p.accepting(1, 0, 0) = 1;
  return p;
}

ProductMdp lemma1_product() {
  const auto env = lemma1_env();
  return build_product(env.mdp, env.machine);
}

// Discounted value of the stitched strategy by solving the chain unrolled
// over k + 1 time layers.
double oracle_stitched_value(const ProductMdp& p, const StitchedStrategy& st, double lambda) {
  const std::size_t n = p.num_states(), k = st.switch_step, layers = k + 1;
  const std::size_t dim = n * layers;
  std::vector<std::vector<double>> a(dim, std::vector<double>(dim, 0.0));
  std::vector<double> b(dim, 0.0);
  for (std::size_t layer = 0; layer < layers; ++layer) {
    const auto& sigma = layer < k ? st.head.choice : st.tail.choice;
    const std::size_t next_layer = std::min(layer + 1, k);
    for (StateId s = 0; s < n; ++s) {
      const std::size_t row = layer * n + s;
      a[row][row] += 1.0;
      const auto& br = p.mdp.action(s, sigma[s]).branches;
      for (std::size_t j = 0; j < br.size(); ++j) {
        a[row][next_layer * n + br[j].target] -= lambda * br[j].prob;
        b[row] += br[j].prob * p.rewards(s, sigma[s], j);
      }
    }
  }
  return dense_solve(std::move(a), std::move(b))[p.init()];
}

}  // namespace

TEST_CASE("qualitative examples") {
  Mdp m({}, 1, 0);
  m.add_action(0, "loop", {{0, 1.0}});
  ProductMdp p = synthetic(m);
  CHECK(qualitative(p).almost_sure == std::vector<char>{0});
  p.accepting(0, 0, 0) = 1;
  CHECK(qualitative(p).almost_sure == std::vector<char>{1});
  CHECK(qualitative(coin_flip()).almost_sure == std::vector<char>{1, 1, 0});
}

TEST_CASE("qualitative matches the accepting-MEC almost-sure oracle") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const ProductMdp p = random_product(rng);
    const auto q = qualitative(p);
    CAPTURE(trial);
    REQUIRE(q.almost_sure == oracle_almost_sure(p));
    // The strategy keeps Q1 closed and wins from every Q1 state.
    const auto win = buchi_prob_of_strategy(p.mdp, q.strategy, p.accepting);
    for (StateId s = 0; s < p.num_states(); ++s) {
      if (!q.almost_sure[s]) continue;
      for (const Branch& b : p.mdp.action(s, q.strategy.choice[s]).branches) CHECK(q.almost_sure[b.target]);
      CHECK(win[s] == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("quantitative examples") {
  Mdp m({}, 2, 0);
  m.add_action(0, "go", {{1, 1.0}});
  m.add_action(0, "stay", {{0, 1.0}});
  m.add_action(1, "back", {{0, 1.0}});
  ProductMdp all = synthetic(m);
  all.accepting(1, 0, 0) = 1;
  const auto sol = quantitative(all);
  CHECK(sol.p == std::vector<double>{1.0, 1.0});
  CHECK(sol.safe_actions[0] == std::vector<ActionIndex>{0, 1});

  const auto coin = quantitative(coin_flip());
  CHECK(coin.p[0] == 1.0);
  CHECK(coin.safe_actions[0] == std::vector<ActionIndex>{1});
  CHECK(coin.p_action[0][0] == doctest::Approx(0.5));
}

TEST_CASE("quantitative matches positional enumeration") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    const bool tiny = trial < 150;
    const ProductMdp p = random_product(rng, tiny ? RandomSpec{.max_states = 3, .max_actions = 2}
                                                  : RandomSpec{});
    const auto sol = quantitative(p);
    const auto ref = oracle_max_buchi(p);
    CAPTURE(trial);
    for (StateId s = 0; s < p.num_states(); ++s) {
      CHECK(sol.p[s] == doctest::Approx(ref[s]).epsilon(1e-9));
      CHECK(sol.p[s] >= 0.0);
      CHECK(sol.p[s] <= 1.0);
      CHECK((sol.almost_sure[s] != 0) == (sol.p[s] == 1.0));
      if (sol.p[s] > 0.0) CHECK_FALSE(sol.safe_actions[s].empty());
    }
    const auto achieved = buchi_prob_of_strategy(p.mdp, sol.witness, p.accepting);
    for (StateId s = 0; s < p.num_states(); ++s) CHECK(achieved[s] == doctest::Approx(sol.p[s]).epsilon(1e-9));
  }
}

TEST_CASE("p is the least fixed point of the reachability equations") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const ProductMdp p = random_product(rng);
    const auto sol = quantitative(p);
    const std::size_t n = p.num_states();
    // Bellman equality for max-reachability of Q1.
    for (StateId s = 0; s < n; ++s) {
      if (sol.almost_sure[s]) continue;
      double best = 0.0;
      for (ActionIndex a = 0; a < p.mdp.num_actions(s); ++a) {
        double v = 0.0;
        for (const Branch& b : p.mdp.action(s, a).branches) v += b.prob * sol.p[b.target];
        best = std::max(best, v);
        CHECK(sol.p_action[s][a] == doctest::Approx(v).epsilon(1e-9));
      }
      CHECK(std::abs(best - sol.p[s]) <= 1e-9);
    }
    // Value iteration from 0 converges to the least fixed point from below.
    std::vector<double> x(n, 0.0);
    for (StateId s = 0; s < n; ++s) x[s] = sol.almost_sure[s] ? 1.0 : 0.0;
    for (int it = 0; it < 20000; ++it) {
      std::vector<double> y = x;
      for (StateId s = 0; s < n; ++s) {
        if (sol.almost_sure[s]) continue;
        double best = 0.0;
        for (ActionIndex a = 0; a < p.mdp.num_actions(s); ++a) {
          double v = 0.0;
          for (const Branch& b : p.mdp.action(s, a).branches) v += b.prob * x[b.target];
          best = std::max(best, v);
        }
        y[s] = best;
      }
      x.swap(y);
    }
    for (StateId s = 0; s < n; ++s) {
      CHECK(x[s] <= sol.p[s] + 1e-9);
      CHECK(x[s] == doctest::Approx(sol.p[s]).epsilon(1e-6));
    }
  }
}

TEST_CASE("prune examples") {
  const ProductMdp p = lemma1_product();
  const auto pr = prune(p, quantitative(p));
  CHECK(pr.num_alive() == p.num_states());
  std::size_t total = 0;
  for (StateId q = 0; q < p.num_states(); ++q) total += p.mdp.num_actions(q);
  CHECK(pr.num_actions() == total);

  const ProductMdp c = coin_flip();
  const auto pc = prune(c, quantitative(c));
  CHECK(pc.actions[0] == std::vector<ActionIndex>{1});
  CHECK(pc.alive[2]);  // p = 0 there; its only action is trivially safe
}

TEST_CASE("pruning preserves p and yields a valid sub-MDP") {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 200; ++trial) {
    const ProductMdp p = random_product(rng);
    const auto sol = quantitative(p);
    const auto pr = prune(p, sol);
    for (StateId s = 0; s < p.num_states(); ++s) {
      if (!pr.alive[s]) {
        CHECK(pr.actions[s].empty());
        continue;
      }
      REQUIRE_FALSE(pr.actions[s].empty());
      for (ActionIndex a : pr.actions[s]) {
        for (const Branch& b : p.mdp.action(s, a).branches) CHECK(pr.alive[b.target]);
      }
    }
    std::vector<StateId> orig;
    const ProductMdp sub = materialize(p, pr, &orig);
    CHECK(validate(sub.mdp).empty());
    if (sub.num_states() == 0) continue;
    const auto again = quantitative(sub);
    for (StateId s = 0; s < sub.num_states(); ++s) {
      CHECK(again.p[s] == doctest::Approx(sol.p[orig[s]]).epsilon(1e-9));
    }
  }
}

TEST_CASE("discounted optimum examples") {
  const ProductMdp p = lemma1_product();
  const auto mc = model_check(p, 0.99);
  CHECK(mc.bval(p.init()) == doctest::Approx(100.0).epsilon(1e-12));
  for (StateId q = 0; q < p.num_states(); ++q) CHECK(mc.discounted.tau.choice[q] == 0);

  Mdp m({}, 2, 0);
  m.add_action(0, "x", {{1, 1.0}});
  m.add_action(0, "y", {{0, 0.5}, {1, 0.5}});
  m.add_action(1, "z", {{0, 1.0}});
  ProductMdp z = synthetic(m);
  z.accepting(1, 0, 0) = 1;
  const auto pz = prune(z, quantitative(z));
  for (double v : discounted_optimal(z, pz, 0.9).rho) CHECK(v == 0.0);

  z.rewards(0, 0, 0) = 0.3;
  z.rewards(0, 1, 0) = 1.0;
  z.rewards(0, 1, 1) = 0.2;
  z.rewards(1, 0, 0) = -1.0;
  const auto d0 = discounted_optimal(z, pz, 0.0);
  CHECK(d0.rho[0] == doctest::Approx(0.6));
  CHECK(d0.rho[1] == doctest::Approx(-1.0));
  CHECK(d0.tau.choice[0] == 1);
}

TEST_CASE("discounted optimum matches enumeration over safe actions") {
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 200; ++trial) {
    const ProductMdp p = random_product(rng, {.max_states = 6, .reward_low = -1.0});
    const double lambda = trial % 2 ? 0.9 : 0.5;
    const auto mc = model_check(p, lambda);
    std::vector<double> best(p.num_states(), -1e300);
    std::vector<std::vector<ActionIndex>> allowed = mc.pruned.actions;
    for (StateId s = 0; s < p.num_states(); ++s) {
      if (allowed[s].empty()) allowed[s] = {0};  // dead states: any action, ignored
    }
    for_each_positional(allowed, [&](const std::vector<ActionIndex>& sigma) {
      const auto v = oracle_discounted(p, sigma, lambda);
      for (StateId s = 0; s < p.num_states(); ++s) best[s] = std::max(best[s], v[s]);
    });
    const auto tau_value = evaluate_positional(p.mdp, mc.discounted.tau, p.rewards, lambda);
    for (StateId s = 0; s < p.num_states(); ++s) {
      if (!mc.pruned.alive[s]) {
        CHECK(std::isnan(mc.discounted.rho[s]));
        continue;
      }
      CHECK(mc.discounted.rho[s] == doctest::Approx(best[s]).epsilon(1e-9));
      CHECK(tau_value[s] == doctest::Approx(mc.discounted.rho[s]).epsilon(1e-9));
    }
  }
}

TEST_CASE("switch step") {
  CHECK(switch_step(0.99, 0.1, 0.0) == 0);
  CHECK(switch_step(0.99, 0.1, 1.0) == 688);
  CHECK(static_cast<std::size_t>(std::ceil(std::log(0.001) / std::log(0.99))) == 688);
  for (double lambda : {0.5, 0.9, 0.99, 0.999}) {
    for (double eps : {1.0, 0.1, 0.01}) {
      for (double rmax : {0.5, 1.0, 2.0, 500.0}) {
        std::size_t k = 0;
        while (std::pow(lambda, double(k)) * rmax / (1.0 - lambda) > eps) ++k;
        CHECK(switch_step(lambda, eps, rmax) == k);
      }
    }
  }
  CHECK(switch_step(0.0, 0.1, 1.0) <= 1);
}

TEST_CASE("stitched strategy on the lemma1 product") {
  const ProductMdp p = lemma1_product();
  const auto mc = model_check(p, 0.99);
  const auto st = stitch(mc.buchi, mc.discounted, 0.99, 0.1, mc.rmax);
  CHECK(st.switch_step == 688);
  const auto ev = evaluate_stitched(p, st, 0.99);
  CHECK(ev.psat == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ev.value >= 99.9);
  CHECK(ev.value <= 100.0);
  // a for k steps, then the tail from the a-state:
  // (1 - l^k)/(1 - l) + l^k * tail(a-state).
  CHECK(p.mdp.action(p.init(), st.head.choice[p.init()]).name == "a/0");
  const double lk = std::pow(0.99, 688.0);
  const double tail = testing::oracle_discounted(p, st.tail.choice, 0.99)[p.init()];
  CHECK(ev.value == doctest::Approx((1.0 - lk) / 0.01 + lk * tail).epsilon(1e-10));

  // k = 0 is the Büchi witness alone.
  StitchedStrategy zero = st;
  zero.switch_step = 0;
  const auto e0 = evaluate_stitched(p, zero, 0.99);
  CHECK(e0.value == doctest::Approx(evaluate_positional(p.mdp, st.tail, p.rewards, 0.99)[p.init()]));
  CHECK(e0.psat == 1.0);

  double prev = -1.0;
  for (std::size_t k = 0; k <= 688; ++k) {
    StitchedStrategy s = st;
    s.switch_step = k;
    const auto e = evaluate_stitched(p, s, 0.99);
    CHECK(e.value >= prev - 1e-12);
    CHECK(e.psat == doctest::Approx(1.0).epsilon(1e-12));
    prev = e.value;
  }
}

TEST_CASE("stitched evaluation matches the unrolled chain") {
  std::mt19937_64 rng(46);
  for (int trial = 0; trial < 100; ++trial) {
    const ProductMdp p = random_product(rng, {.max_states = 5});
    StitchedStrategy st;
    st.switch_step = rng() % 5;
    for (StateId s = 0; s < p.num_states(); ++s) {
      st.head.choice.push_back(std::uniform_int_distribution<ActionIndex>(0, p.mdp.num_actions(s) - 1)(rng));
      st.tail.choice.push_back(std::uniform_int_distribution<ActionIndex>(0, p.mdp.num_actions(s) - 1)(rng));
    }
    const auto ev = evaluate_stitched(p, st, 0.8);
    CHECK(ev.value == doctest::Approx(oracle_stitched_value(p, st, 0.8)).epsilon(1e-10));

    std::vector<double> dist(p.num_states(), 0.0);
    dist[p.init()] = 1.0;
    for (std::size_t t = 0; t < st.switch_step; ++t) {
      std::vector<double> next(p.num_states(), 0.0);
      for (StateId s = 0; s < p.num_states(); ++s) {
        for (const Branch& b : p.mdp.action(s, st.head.choice[s]).branches) next[b.target] += dist[s] * b.prob;
      }
      dist.swap(next);
    }
    const auto tail = oracle_buchi(p, st.tail.choice);
    double psat = 0.0;
    for (StateId s = 0; s < p.num_states(); ++s) psat += dist[s] * tail[s];
    CHECK(ev.psat == doctest::Approx(psat).epsilon(1e-10));
  }
}

TEST_CASE("stitched gap stays within the switch-step bound") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 50; ++trial) {
    const ProductMdp p = random_product(rng, {.max_states = 6, .accepting_rate = 0.4});
    const auto mc = model_check(p, 0.9);
    if (!mc.pruned.alive[p.init()]) continue;
    for (double eps : {1.0, 0.1, 0.01, 0.001}) {
      const auto st = stitch(mc.buchi, mc.discounted, 0.9, eps, mc.rmax);
      const auto ev = evaluate_stitched(p, st, 0.9);
      CHECK(ev.psat == doctest::Approx(mc.blike(p.init())).epsilon(1e-9));
      // Rewards are non-negative here, so the tail loses at most
      // lambda^k * rmax / (1 - lambda).
      const double gap = mc.bval(p.init()) - ev.value;
      CHECK(gap >= -1e-9);
      CHECK(gap <= std::pow(0.9, double(st.switch_step)) * mc.rmax / 0.1 + 1e-9);
      CHECK(gap <= eps + 1e-9);
    }
  }
}
