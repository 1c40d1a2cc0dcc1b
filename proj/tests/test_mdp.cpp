#include <doctest.h>

#include <random>

#include "omegarm/envs.hpp"
#include "omegarm/mdp.hpp"
#include "omegarm/product.hpp"
#include "test_util.hpp"

using namespace omegarm;
using namespace omegarm::testing;

namespace {

bool has_issue(const std::vector<ValidationIssue>& issues, ValidationIssue::Kind k) {
  for (const auto& i : issues) {
    if (i.kind == k) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("validate") {
  Mdp ok({}, 1, 0);
  ok.add_action(0, "loop", {{0, 1.0}});
  CHECK(validate(ok).empty());

  Mdp mass({}, 2, 0);
  mass.add_action(0, "go", {{0, 0.5}, {1, 0.4}});
  mass.add_action(1, "stay", {{1, 1.0}});
  CHECK(has_issue(validate(mass), ValidationIssue::Kind::kMassMismatch));

  Mdp empty({}, 2, 0);
  empty.add_action(0, "go", {{1, 1.0}});
  CHECK(has_issue(validate(empty), ValidationIssue::Kind::kNoActions));

  // Problems are all reported, not just the first.
  Mdp many({}, 3, 5);
  many.add_action(0, "bad", {{7, 1.0}});
  many.add_action(1, "neg", {{1, -0.5}, {1, 1.5}});
  const auto issues = validate(many);
  CHECK(has_issue(issues, ValidationIssue::Kind::kBadTarget));
  CHECK(has_issue(issues, ValidationIssue::Kind::kBadProbability));
  CHECK(has_issue(issues, ValidationIssue::Kind::kNoActions));
  CHECK(has_issue(issues, ValidationIssue::Kind::kBadInit));
}

TEST_CASE("mec examples") {
  Mdp single({}, 1, 0);
  single.add_action(0, "loop", {{0, 1.0}});
  const auto m1 = mec_decomposition(single);
  REQUIRE(m1.size() == 1);
  CHECK(m1[0].states == std::vector<StateId>{0});

  Mdp flip({}, 3, 0);
  flip.add_action(0, "flip", {{1, 0.5}, {2, 0.5}});
  flip.add_action(1, "loop", {{1, 1.0}});
  flip.add_action(2, "loop", {{2, 1.0}});
  const auto m2 = mec_decomposition(flip);
  REQUIRE(m2.size() == 2);
  CHECK(m2[0].states == std::vector<StateId>{1});
  CHECK(m2[1].states == std::vector<StateId>{2});
}

TEST_CASE("mec decomposition matches subset enumeration on random MDPs") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const ProductMdp p = random_product(rng);
    CAPTURE(trial);
    CHECK(mec_decomposition(p.mdp) == oracle_mecs(p.mdp));
  }
}

TEST_CASE("uniform play inside a MEC reaches every member almost surely") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const ProductMdp p = random_product(rng, {.max_states = 6});
    for (const Mec& mec : mec_decomposition(p.mdp)) {
      const std::size_t k = mec.states.size();
      std::vector<std::size_t> local(p.num_states(), k);
      for (std::size_t i = 0; i < k; ++i) local[mec.states[i]] = i;
      for (std::size_t goal = 0; goal < k; ++goal) {
        // Reach probability of goal under the uniform strategy over MEC actions.
        std::vector<std::vector<double>> a(k, std::vector<double>(k, 0.0));
        std::vector<double> b(k, 0.0);
        for (std::size_t i = 0; i < k; ++i) {
          a[i][i] = 1.0;
          if (i == goal) {
            b[i] = 1.0;
            continue;
          }
          const double w = 1.0 / static_cast<double>(mec.actions[i].size());
          for (ActionIndex act : mec.actions[i]) {
            for (const Branch& br : p.mdp.action(mec.states[i], act).branches) {
              REQUIRE(local[br.target] < k);
              a[i][local[br.target]] -= w * br.prob;
            }
          }
        }
        for (double x : dense_solve(a, b)) CHECK(x == doctest::Approx(1.0).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("evaluate_positional examples") {
  Mdp loop({}, 1, 0);
  loop.add_action(0, "loop", {{0, 1.0}});
  TransitionRewards r(loop, 1.0);
  CHECK(evaluate_positional(loop, {{0}}, r, 0.99)[0] == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(evaluate_positional(loop, {{0}}, TransitionRewards(loop, 0.0), 0.99)[0] == 0.0);

  Mdp chain({}, 2, 0);
  chain.add_action(0, "go", {{1, 1.0}});
  chain.add_action(1, "stay", {{1, 1.0}});
  TransitionRewards rc(chain, 0.0);
  rc(0, 0, 0) = 1.0;
  const auto v = evaluate_positional(chain, {{0, 0}}, rc, 0.5);
  CHECK(v[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(v[1] == doctest::Approx(0.0));
}

TEST_CASE("evaluate_positional agrees with a dense solve and is monotone in rewards") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    ProductMdp p = random_product(rng);
    PositionalStrategy sigma;
    for (StateId s = 0; s < p.num_states(); ++s) {
      sigma.choice.push_back(std::uniform_int_distribution<ActionIndex>(0, p.mdp.num_actions(s) - 1)(rng));
    }
    const auto v = evaluate_positional(p.mdp, sigma, p.rewards, 0.9);
    const auto ref = oracle_discounted(p, sigma.choice, 0.9);
    for (std::size_t s = 0; s < v.size(); ++s) CHECK(v[s] == doctest::Approx(ref[s]).epsilon(1e-10));

    const StateId s = std::uniform_int_distribution<StateId>(0, p.num_states() - 1)(rng);
    p.rewards(s, sigma.choice[s], 0) += unit(rng);
    const auto raised = evaluate_positional(p.mdp, sigma, p.rewards, 0.9);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(raised[i] >= v[i] - 1e-12);
  }
}

TEST_CASE("evaluate_stationary matches positional on pure strategies") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    const ProductMdp p = random_product(rng);
    PositionalStrategy sigma{std::vector<ActionIndex>(p.num_states(), 0)};
    const auto a = evaluate_positional(p.mdp, sigma, p.rewards, 0.8);
    const auto b = evaluate_stationary(p.mdp, StationaryStrategy::from(p.mdp, sigma), p.rewards, 0.8);
    for (std::size_t s = 0; s < a.size(); ++s) CHECK(a[s] == doctest::Approx(b[s]).epsilon(1e-12));
  }
}

TEST_CASE("buchi_prob_of_strategy examples") {
  Mdp loop({}, 1, 0);
  loop.add_action(0, "loop", {{0, 1.0}});
  AcceptingSet acc(loop, 1);
  CHECK(buchi_prob_of_strategy(loop, PositionalStrategy{{0}}, acc)[0] == 1.0);
  CHECK(buchi_prob_of_strategy(loop, PositionalStrategy{{0}}, AcceptingSet(loop, 0))[0] == 0.0);

  const auto env = lemma1_env();
  const ProductMdp p = build_product(env.mdp, env.machine);
  const std::vector<ActionIndex> always_a(p.num_states(), 0), always_b(p.num_states(), 1);
  CHECK(buchi_prob_of_strategy(p.mdp, PositionalStrategy{always_a}, p.accepting)[p.init()] == 0.0);
  CHECK(buchi_prob_of_strategy(p.mdp, PositionalStrategy{always_b}, p.accepting)[p.init()] == 1.0);
}

TEST_CASE("buchi_prob_of_strategy: oracle agreement, range and Bellman equality") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 200; ++trial) {
    const ProductMdp p = random_product(rng);
    PositionalStrategy sigma;
    for (StateId s = 0; s < p.num_states(); ++s) {
      sigma.choice.push_back(std::uniform_int_distribution<ActionIndex>(0, p.mdp.num_actions(s) - 1)(rng));
    }
    const auto x = buchi_prob_of_strategy(p.mdp, sigma, p.accepting);
    const auto ref = oracle_buchi(p, sigma.choice);
    for (StateId s = 0; s < p.num_states(); ++s) {
      CHECK(x[s] >= 0.0);
      CHECK(x[s] <= 1.0);
      CHECK(x[s] == doctest::Approx(ref[s]).epsilon(1e-10));
      double next = 0.0;
      for (const Branch& b : p.mdp.action(s, sigma.choice[s]).branches) next += b.prob * x[b.target];
      CHECK(std::abs(next - x[s]) <= 1e-9);
    }
  }
}

TEST_CASE("sample_branch follows cumulative mass") {
  const std::vector<Branch> br{{0, 0.2}, {1, 0.5}, {2, 0.3}};
  CHECK(sample_branch(br, 0.0) == 0);
  CHECK(sample_branch(br, 0.19) == 0);
  CHECK(sample_branch(br, 0.21) == 1);
  CHECK(sample_branch(br, 0.69) == 1);
  CHECK(sample_branch(br, 0.71) == 2);
  CHECK(sample_branch(br, 0.999999999) == 2);
}
