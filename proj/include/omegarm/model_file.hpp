#pragma once

#include <map>
#include <string>
#include <string_view>

#include "omegarm/mdp.hpp"
#include "omegarm/rm.hpp"

namespace omegarm {

/// An MDP, its omega-regular reward machine, and optional hyperparameter
/// overrides (keys as accepted by Hyperparams::set).
struct ModelBundle {
  Mdp mdp;
  OmegaRewardMachine machine;
  std::map<std::string, double> defaults;

  friend bool operator==(const ModelBundle&, const ModelBundle&) = default;
};

/// Parses the line-oriented model format:
///
///   mdp
///   ap: A B
///   states: 2
///   init: 0
///   label 1: A
///   action 0 go: 1 0.8, 0 0.2
///   action 1 stay: 1 1
///   orm
///   states: 1
///   init: 0
///   edge 0 "A" 0 reward 1 accepting
///   edge 0 "!A" 0 reward 0
///   defaults            # optional
///   zeta: 0.5
///
/// Throws ParseError for syntax problems and ModelError for semantic ones
/// (probability mass, dangling ids, AP mismatch); both carry the line number.
ModelBundle parse_model(std::string_view text);

/// Reads and parses a file; throws ModelError naming the path if unreadable.
ModelBundle load_model_file(const std::string& path);

/// Text that parse_model maps back to an equal bundle.
std::string serialize_model(const ModelBundle& bundle);

/// Formats a double as the shortest decimal that round-trips.
std::string format_number(double x);

}  // namespace omegarm
