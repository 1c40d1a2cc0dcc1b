#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "omegarm/mdp.hpp"
#include "omegarm/modelcheck.hpp"
#include "omegarm/product.hpp"
#include "omegarm/translate.hpp"

namespace omegarm {

/// Q-learning and translation knobs. Defaults are the reference settings:
/// f = 10, zeta = 0.99, gamma = 0.999, alpha = 0.01, epsilon = 0.1, init = 0,
/// ep-l = 20, ep-n = 20000, lambda = 0.99.
struct Hyperparams {
  double f = 10.0;
  double zeta = 0.99;
  double gamma = 0.999;    // learner discount on the translated MDP
  double alpha = 0.01;     // constant learning rate
  double epsilon = 0.1;    // exploration rate
  double init = 0.0;       // initial Q value
  std::size_t ep_len = 20;     // reset after this many copy-1 steps without acceptance
  std::size_t ep_num = 20000;  // training episodes
  double lambda = 0.99;    // discount of the original objective
  std::uint64_t seed = 1;

  /// Sets a knob by its file/CLI key (f, zeta, gamma, alpha, epsilon, init,
  /// ep-l, ep-n, lambda, seed). Throws ParameterError on unknown keys.
  void set(const std::string& key, double value);
  void apply(const std::map<std::string, double>& overrides);
  /// Throws ParameterError naming the first out-of-range knob.
  void validate() const;
};

class QTable {
 public:
  QTable() = default;
  QTable(const Mdp& m, double init);

  double& at(StateId s, ActionIndex a) { return values_[s][a]; }
  double at(StateId s, ActionIndex a) const { return values_[s][a]; }
  const std::vector<double>& row(StateId s) const { return values_[s]; }
  std::size_t num_states() const { return values_.size(); }
  /// Lowest index among the maximal entries of row s.
  ActionIndex argmax(StateId s) const;
  double max(StateId s) const;

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  std::vector<std::vector<double>> values_;
};

/// Called after each finished episode with its 1-based number.
using EpisodeCallback = std::function<void(std::size_t episode, const QTable&)>;

/// Tabular epsilon-greedy Q-learning on the translated MDP. Episodes start at
/// (q0,0) and end on reaching t or once more than ep_len consecutive copy-1
/// steps pass without an accepting transition. Deterministic given the seed.
QTable q_learn(const TranslatedMdp& tm, const Hyperparams& hp, const EpisodeCallback& on_episode = {});

/// Argmax per translated state, lowest index on ties.
PositionalStrategy greedy(const QTable& q);

struct LearnReport {
  PositionalStrategy head;  // copy-0 choices projected to the product
  PositionalStrategy tail;  // copy-1 choices projected to the product
  std::size_t switch_step = 0;
  double psat = 0.0;
  double value = 0.0;
  double blike = 0.0;  // optimum from the initial product state
  double bval = 0.0;
  double epsilon = 0.0;

  double psat_gap() const { return blike - psat; }
  double value_gap() const { return bval - value; }
  bool buchi_optimal(double tol = 1e-6) const { return psat >= blike - tol; }
};

/// Evaluates translated-MDP strategies on the known product: projects both
/// copies, stitches them after the model checker's switch step for epsilon,
/// and compares against the exact optimum. Model checking runs once, at
/// construction.
class Certifier {
 public:
  Certifier(const ProductMdp& p, double lambda, double epsilon);

  LearnReport certify(const PositionalStrategy& translated) const;
  const ModelCheckResult& result() const { return mc_; }
  std::size_t switch_step() const { return k_; }

 private:
  const ProductMdp* p_;
  ModelCheckResult mc_;
  double epsilon_;
  std::size_t k_;
};

LearnReport certify(const ProductMdp& p, const PositionalStrategy& translated, double lambda,
                    double epsilon);

}  // namespace omegarm
