#include "omegarm/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "linear.hpp"
#include "omegarm/errors.hpp"

namespace omegarm {

Mdp::Mdp(std::vector<std::string> ap, std::size_t num_states, StateId init)
    : ap_(std::move(ap)), init_(init), labels_(num_states, 0), actions_(num_states) {}

StateId Mdp::add_state(Label label) {
  labels_.push_back(label);
  actions_.emplace_back();
  return actions_.size() - 1;
}

ActionIndex Mdp::add_action(StateId s, std::string name, std::vector<Branch> branches) {
  auto& acts = actions_.at(s);
  acts.push_back({std::move(name), std::move(branches)});
  return acts.size() - 1;
}

std::size_t Mdp::num_branches() const {
  std::size_t n = 0;
  for (const auto& acts : actions_) {
    for (const Action& a : acts) n += a.branches.size();
  }
  return n;
}

bool operator==(const Branch& a, const Branch& b) { return a.target == b.target && a.prob == b.prob; }
bool operator==(const Action& a, const Action& b) {
  return a.name == b.name && a.branches == b.branches;
}
bool operator==(const Mdp& a, const Mdp& b) {
  return a.ap_ == b.ap_ && a.init_ == b.init_ && a.labels_ == b.labels_ && a.actions_ == b.actions_;
}

StationaryStrategy StationaryStrategy::from(const Mdp& m, const PositionalStrategy& sigma) {
  StationaryStrategy out;
  out.weights.resize(m.num_states());
  for (StateId s = 0; s < m.num_states(); ++s) {
    out.weights[s].assign(m.num_actions(s), 0.0);
    out.weights[s].at(sigma.choice.at(s)) = 1.0;
  }
  return out;
}

StationaryStrategy StationaryStrategy::uniform(const Mdp& m) {
  StationaryStrategy out;
  out.weights.resize(m.num_states());
  for (StateId s = 0; s < m.num_states(); ++s) {
    const std::size_t k = m.num_actions(s);
    out.weights[s].assign(k, k == 0 ? 0.0 : 1.0 / static_cast<double>(k));
  }
  return out;
}

std::vector<ValidationIssue> validate(const Mdp& m) {
  using Kind = ValidationIssue::Kind;
  std::vector<ValidationIssue> issues;
  const std::size_t n = m.num_states();
  if (m.ap().size() > kMaxAtomicPropositions) {
    issues.push_back({Kind::kTooManyAps, 0,
                      "at most " + std::to_string(kMaxAtomicPropositions) + " atomic propositions"});
  }
  if (m.init() >= n) {
    issues.push_back({Kind::kBadInit, m.init(), "initial state " + std::to_string(m.init()) +
                                                    " out of range"});
  }
  for (StateId s = 0; s < n; ++s) {
    if (m.num_actions(s) == 0) {
      issues.push_back({Kind::kNoActions, s, "state " + std::to_string(s) + " has no actions"});
    }
    for (const Action& act : m.actions(s)) {
      double mass = 0.0;
      for (const Branch& b : act.branches) {
        if (b.target >= n) {
          issues.push_back({Kind::kBadTarget, s, "state " + std::to_string(s) + " action '" +
                                                     act.name + "' targets unknown state " +
                                                     std::to_string(b.target)});
        }
        if (!(b.prob > 0.0) || b.prob > 1.0 + kProbabilityTolerance) {
          issues.push_back({Kind::kBadProbability, s, "state " + std::to_string(s) + " action '" +
                                                          act.name + "' has probability " +
                                                          std::to_string(b.prob)});
        }
        mass += b.prob;
      }
      if (std::abs(mass - 1.0) > kProbabilityTolerance) {
        issues.push_back({Kind::kMassMismatch, s, "state " + std::to_string(s) + " action '" +
                                                      act.name + "' has probability mass " +
                                                      std::to_string(mass)});
      }
    }
  }
  return issues;
}

std::size_t sample_branch(std::span<const Branch> branches, double u) {
  double acc = 0.0;
  for (std::size_t k = 0; k < branches.size(); ++k) {
    acc += branches[k].prob;
    if (u < acc) return k;
  }
  return branches.size() - 1;
}

std::vector<double> evaluate_stationary(const Mdp& m, const StationaryStrategy& sigma,
                                        const TransitionRewards& rewards, double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw ParameterError("discount must lie in [0,1)");
  const std::size_t n = m.num_states();
  std::vector<detail::Entry> entries;
  std::vector<double> rhs(n, 0.0);
  for (StateId s = 0; s < n; ++s) {
    entries.push_back({s, s, 1.0});
    for (ActionIndex a = 0; a < m.num_actions(s); ++a) {
      const double w = sigma.weights.at(s).at(a);
      if (w == 0.0) continue;
      const auto& br = m.action(s, a).branches;
      const auto r = rewards.of(s, a);
      for (std::size_t k = 0; k < br.size(); ++k) {
        rhs[s] += w * br[k].prob * r[k];
        entries.push_back({s, br[k].target, -lambda * w * br[k].prob});
      }
    }
  }
  return detail::solve_sparse(n, entries, rhs);
}

std::vector<double> evaluate_positional(const Mdp& m, const PositionalStrategy& sigma,
                                        const TransitionRewards& rewards, double lambda) {
  return evaluate_stationary(m, StationaryStrategy::from(m, sigma), rewards, lambda);
}

std::vector<double> buchi_prob_of_strategy(const Mdp& m, const StationaryStrategy& sigma,
                                           const AcceptingSet& accepting) {
  const std::size_t n = m.num_states();
  std::vector<std::vector<StateId>> succ(n), pred(n);
  for (StateId s = 0; s < n; ++s) {
    for (ActionIndex a = 0; a < m.num_actions(s); ++a) {
      if (sigma.weights.at(s).at(a) == 0.0) continue;
      for (const Branch& b : m.action(s, a).branches) {
        succ[s].push_back(b.target);
        pred[b.target].push_back(s);
      }
    }
  }
  std::size_t num_comp = 0;
  const auto comp = detail::strongly_connected_components(succ, &num_comp);

  std::vector<char> bottom(num_comp, 1), accepting_comp(num_comp, 0);
  for (StateId s = 0; s < n; ++s) {
    for (StateId t : succ[s]) {
      if (comp[t] != comp[s]) bottom[comp[s]] = 0;
    }
  }
  for (StateId s = 0; s < n; ++s) {
    for (ActionIndex a = 0; a < m.num_actions(s); ++a) {
      if (sigma.weights[s][a] == 0.0) continue;
      for (std::uint8_t acc : accepting.of(s, a)) {
        if (acc) accepting_comp[comp[s]] = 1;
      }
    }
  }

  std::vector<double> x(n, 0.0);
  std::vector<char> can_reach(n, 0);
  std::deque<StateId> queue;
  for (StateId s = 0; s < n; ++s) {
    if (bottom[comp[s]] && accepting_comp[comp[s]]) {
      x[s] = 1.0;
      can_reach[s] = 1;
      queue.push_back(s);
    }
  }
  const std::vector<char> target(can_reach);
  while (!queue.empty()) {
    const StateId s = queue.front();
    queue.pop_front();
    for (StateId p : pred[s]) {
      if (!can_reach[p]) {
        can_reach[p] = 1;
        queue.push_back(p);
      }
    }
  }

  std::vector<std::size_t> slot(n, n);
  std::vector<StateId> unknown;
  for (StateId s = 0; s < n; ++s) {
    if (can_reach[s] && !target[s]) {
      slot[s] = unknown.size();
      unknown.push_back(s);
    }
  }
  std::vector<detail::Entry> entries;
  std::vector<double> rhs(unknown.size(), 0.0);
  for (std::size_t i = 0; i < unknown.size(); ++i) {
    const StateId s = unknown[i];
    entries.push_back({i, i, 1.0});
    for (ActionIndex a = 0; a < m.num_actions(s); ++a) {
      const double w = sigma.weights[s][a];
      if (w == 0.0) continue;
      for (const Branch& b : m.action(s, a).branches) {
        if (target[b.target]) {
          rhs[i] += w * b.prob;
        } else if (slot[b.target] != n) {
          entries.push_back({i, slot[b.target], -w * b.prob});
        }
      }
    }
  }
  const auto sol = detail::solve_sparse(unknown.size(), entries, rhs);
  for (std::size_t i = 0; i < unknown.size(); ++i) x[unknown[i]] = std::clamp(sol[i], 0.0, 1.0);
  return x;
}

std::vector<double> buchi_prob_of_strategy(const Mdp& m, const PositionalStrategy& sigma,
                                           const AcceptingSet& accepting) {
  return buchi_prob_of_strategy(m, StationaryStrategy::from(m, sigma), accepting);
}

std::vector<Mec> mec_decomposition(const Mdp& m) {
  std::vector<std::vector<char>> allowed(m.num_states());
  for (StateId s = 0; s < m.num_states(); ++s) allowed[s].assign(m.num_actions(s), 1);
  return mec_decomposition(m, allowed);
}

std::vector<Mec> mec_decomposition(const Mdp& m, const std::vector<std::vector<char>>& mask) {
  const std::size_t n = m.num_states();
  auto allowed = mask;
  std::vector<char> alive(n, 0);
  for (StateId s = 0; s < n; ++s) {
    alive[s] = std::find(allowed[s].begin(), allowed[s].end(), 1) != allowed[s].end();
  }

  std::vector<std::size_t> comp;
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<std::vector<StateId>> succ(n);
    for (StateId s = 0; s < n; ++s) {
      if (!alive[s]) continue;
      for (ActionIndex a = 0; a < m.num_actions(s); ++a) {
        if (!allowed[s][a]) continue;
        for (const Branch& b : m.action(s, a).branches) succ[s].push_back(b.target);
      }
    }
    comp = detail::strongly_connected_components(succ);
    for (StateId s = 0; s < n; ++s) {
      if (!alive[s]) continue;
      bool any = false;
      for (ActionIndex a = 0; a < m.num_actions(s); ++a) {
        if (!allowed[s][a]) continue;
        for (const Branch& b : m.action(s, a).branches) {
          if (!alive[b.target] || comp[b.target] != comp[s]) {
            allowed[s][a] = 0;
            changed = true;
            break;
          }
        }
        any = any || allowed[s][a];
      }
      if (!any) {
        alive[s] = 0;
        changed = true;
      }
    }
  }

  std::vector<Mec> mecs;
  std::vector<std::size_t> mec_of_comp(n + 1, n);
  for (StateId s = 0; s < n; ++s) {
    if (!alive[s]) continue;
    std::size_t& idx = mec_of_comp[comp[s]];
    if (idx == n) {
      idx = mecs.size();
      mecs.emplace_back();
    }
    Mec& mec = mecs[idx];
    mec.states.push_back(s);
    auto& acts = mec.actions.emplace_back();
    for (ActionIndex a = 0; a < m.num_actions(s); ++a) {
      if (allowed[s][a]) acts.push_back(a);
    }
  }
  return mecs;
}

}  // namespace omegarm
