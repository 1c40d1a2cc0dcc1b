#include "omegarm/learn.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "omegarm/errors.hpp"

namespace omegarm {

namespace {

std::size_t to_count(const std::string& key, double value) {
  if (!(value >= 0.0) || value != std::floor(value) || value > 1e15) {
    throw ParameterError(key + " must be a non-negative integer");
  }
  return static_cast<std::size_t>(value);
}

}  // namespace

void Hyperparams::set(const std::string& key, double value) {
  if (key == "f") f = value;
  else if (key == "zeta") zeta = value;
  else if (key == "gamma") gamma = value;
  else if (key == "alpha") alpha = value;
  else if (key == "epsilon") epsilon = value;
  else if (key == "init") init = value;
  else if (key == "ep-l") ep_len = to_count(key, value);
  else if (key == "ep-n") ep_num = to_count(key, value);
  else if (key == "lambda") lambda = value;
  else if (key == "seed") seed = to_count(key, value);
  else throw ParameterError("unknown hyperparameter '" + key + "'");
}

void Hyperparams::apply(const std::map<std::string, double>& overrides) {
  for (const auto& [k, v] : overrides) set(k, v);
}

void Hyperparams::validate() const {
  if (!(f >= 1.0)) throw ParameterError("f must be at least 1");
  if (!(zeta >= 0.0 && zeta < 1.0)) throw ParameterError("zeta must lie in [0,1)");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ParameterError("gamma must lie in (0,1]");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("alpha must lie in (0,1]");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ParameterError("epsilon must lie in [0,1]");
  if (!std::isfinite(init)) throw ParameterError("init must be finite");
  if (ep_len < 1) throw ParameterError("ep-l must be at least 1");
  if (!(lambda > 0.0 && lambda < 1.0)) throw ParameterError("lambda must lie in (0,1)");
}

QTable::QTable(const Mdp& m, double init) : values_(m.num_states()) {
  for (StateId s = 0; s < m.num_states(); ++s) values_[s].assign(m.num_actions(s), init);
}

ActionIndex QTable::argmax(StateId s) const {
  const auto& r = values_[s];
  return static_cast<ActionIndex>(std::max_element(r.begin(), r.end()) - r.begin());
}

double QTable::max(StateId s) const { return values_[s][argmax(s)]; }

QTable q_learn(const TranslatedMdp& tm, const Hyperparams& hp, const EpisodeCallback& on_episode) {
  hp.validate();
  QTable q(tm.mdp, hp.init);
  std::mt19937_64 rng(hp.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::size_t episode = 1; episode <= hp.ep_num; ++episode) {
    StateId s = tm.init();
    std::size_t since_accepting = 0;
    for (;;) {
      const std::size_t num_actions = q.row(s).size();
      ActionIndex a;
      if (unit(rng) < hp.epsilon) {
        a = std::uniform_int_distribution<std::size_t>(0, num_actions - 1)(rng);
      } else {
        a = q.argmax(s);
      }
      const TranslatedStep step = sample_with(tm, s, a, unit(rng));
      const double bootstrap = tm.is_trap(step.next) ? 0.0 : hp.gamma * q.max(step.next);
      double& entry = q.at(s, a);
      entry += hp.alpha * (step.reward + bootstrap - entry);

      if (tm.copy(s) == 1) since_accepting = step.accepting_edge ? 0 : since_accepting + 1;
      s = step.next;
      if (tm.is_trap(s) || since_accepting > hp.ep_len) break;
    }
    if (on_episode) on_episode(episode, q);
  }
  return q;
}

PositionalStrategy greedy(const QTable& q) {
  PositionalStrategy out;
  out.choice.resize(q.num_states());
  for (StateId s = 0; s < q.num_states(); ++s) out.choice[s] = q.argmax(s);
  return out;
}

Certifier::Certifier(const ProductMdp& p, double lambda, double epsilon)
    : p_(&p), mc_(model_check(p, lambda)), epsilon_(epsilon),
      k_(omegarm::switch_step(lambda, epsilon, mc_.rmax)) {}

LearnReport Certifier::certify(const PositionalStrategy& translated) const {
  const std::size_t n = p_->num_states();
  if (translated.choice.size() != 2 * n + 1) {
    throw ParameterError("strategy has " + std::to_string(translated.choice.size()) +
                         " states, translated MDP has " + std::to_string(2 * n + 1));
  }
  LearnReport r;
  r.head.choice.assign(translated.choice.begin(), translated.choice.begin() + static_cast<std::ptrdiff_t>(n));
  r.tail.choice.assign(translated.choice.begin() + static_cast<std::ptrdiff_t>(n),
                       translated.choice.begin() + static_cast<std::ptrdiff_t>(2 * n));
  for (StateId q = 0; q < n; ++q) {
    if (r.head.choice[q] >= p_->mdp.num_actions(q) || r.tail.choice[q] >= p_->mdp.num_actions(q)) {
      throw ParameterError("strategy picks a disabled action at product state " + std::to_string(q));
    }
  }
  r.switch_step = k_;
  r.epsilon = epsilon_;
  const auto eval = evaluate_stitched(*p_, {k_, r.head, r.tail}, mc_.lambda);
  r.psat = eval.psat;
  r.value = eval.value;
  r.blike = mc_.blike(p_->init());
  r.bval = mc_.bval(p_->init());
  return r;
}

LearnReport certify(const ProductMdp& p, const PositionalStrategy& translated, double lambda,
                    double epsilon) {
  return Certifier(p, lambda, epsilon).certify(translated);
}

}  // namespace omegarm
