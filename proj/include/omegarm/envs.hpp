#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "omegarm/model_file.hpp"

namespace omegarm {

struct Cell {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Grid world description. y grows northwards. A wall blocks the edge
/// between two orthogonally adjacent cells in both directions.
struct GridSpec {
  int width = 0;
  int height = 0;
  std::set<std::pair<Cell, Cell>> walls;  // stored with first < second
  Cell home;
  Cell a, b, c, d;       // corner rooms
  Cell wire_below;       // fix action lives here
  Cell wire_above;       // the passage the wire blocks
  double zap_probability = 0.2;

  void add_wall(Cell p, Cell q);
  bool blocked(Cell p, Cell q) const;
  bool inside(Cell p) const { return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height; }
  /// Throws ModelError if a named cell is outside or the wire cells are not adjacent.
  void validate() const;
};

/// Reconstructed office floor: a 12 x 9 grid split into a 3 x 4 arrangement
/// of rooms. See the README for the door list.
GridSpec office_layout();

/// One-letter-per-step world: from either state the agent picks the next
/// letter. The machine pays 1 on `a` and accepts on `b`.
ModelBundle lemma1_env();

/// Initial choice between two absorbing accepting loops paying 1 and 2 per
/// step; 6 product states.
ModelBundle two_wecs_env();

/// Patrol A -> B -> C -> D with +1 per completed round. With zap, the
/// passage between wire_below and wire_above is closed until fixed, and the
/// fix action breaks the robot with probability 1/5.
ModelBundle office_env(bool zap);
ModelBundle grid_env(const GridSpec& grid, bool zap);

/// State id of cell p in the grid MDP built by grid_env; fixed selects the
/// repaired-wire copy (zap only).
StateId grid_state(const GridSpec& grid, Cell p, bool fixed = false);
/// Inverse of grid_state; nullopt for the damaged state.
std::optional<std::pair<Cell, bool>> grid_cell(const GridSpec& grid, StateId s);

/// Names accepted by make_env.
const std::vector<std::string>& env_names();
/// lemma1, two_wecs, office, office_zap. Throws ParameterError listing the
/// valid names otherwise.
ModelBundle make_env(const std::string& name);

}  // namespace omegarm
