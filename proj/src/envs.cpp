#include "omegarm/envs.hpp"

#include <algorithm>
#include <cstdlib>

#include "omegarm/errors.hpp"

namespace omegarm {

void GridSpec::add_wall(Cell p, Cell q) { walls.insert(std::minmax(p, q)); }

bool GridSpec::blocked(Cell p, Cell q) const { return walls.contains(std::minmax(p, q)); }

void GridSpec::validate() const {
  if (width <= 0 || height <= 0) throw ModelError("grid must have positive size");
  for (Cell p : {home, a, b, c, d, wire_below, wire_above}) {
    if (!inside(p)) {
      throw ModelError("cell (" + std::to_string(p.x) + "," + std::to_string(p.y) + ") is outside the grid");
    }
  }
  if (std::abs(wire_below.x - wire_above.x) + std::abs(wire_below.y - wire_above.y) != 1) {
    throw ModelError("wire cells must be adjacent");
  }
  if (!(zap_probability >= 0.0 && zap_probability <= 1.0)) {
    throw ModelError("zap probability must lie in [0,1]");
  }
}

GridSpec office_layout() {
  GridSpec g;
  g.width = 12;
  g.height = 9;
  for (int boundary : {2, 5, 8}) {
    for (int y = 0; y < g.height; ++y) {
      if (y == 1 || y == 7) continue;
      g.add_wall({boundary, y}, {boundary + 1, y});
    }
  }
  for (int x = 0; x < g.width; ++x) {
    if (x != 1 && x != 10) g.add_wall({x, 2}, {x, 3});
    if (x != 1 && x != 4 && x != 7 && x != 10) g.add_wall({x, 5}, {x, 6});
  }
  g.home = {2, 1};
  g.a = {1, 1};
  g.b = {1, 7};
  g.c = {10, 7};
  g.d = {10, 1};
  g.wire_below = {1, 2};
  g.wire_above = {1, 3};
  g.zap_probability = 0.2;
  return g;
}

StateId grid_state(const GridSpec& grid, Cell p, bool fixed) {
  const auto cells = static_cast<StateId>(grid.width * grid.height);
  const auto idx = static_cast<StateId>(p.y * grid.width + p.x);
  return fixed ? cells + idx : idx;
}

std::optional<std::pair<Cell, bool>> grid_cell(const GridSpec& grid, StateId s) {
  const auto cells = static_cast<StateId>(grid.width * grid.height);
  if (s >= 2 * cells) return std::nullopt;
  const bool fixed = s >= cells;
  const auto idx = static_cast<int>(fixed ? s - cells : s);
  return std::pair{Cell{idx % grid.width, idx / grid.width}, fixed};
}

ModelBundle grid_env(const GridSpec& grid, bool zap) {
  grid.validate();
  const std::vector<std::string> ap{"A", "B", "C", "D"};
  const std::size_t cells = static_cast<std::size_t>(grid.width * grid.height);
  const std::size_t copies = zap ? 2 : 1;
  const StateId damaged = 2 * cells;

  ModelBundle out;
  out.mdp = Mdp(ap, copies * cells + (zap ? 1 : 0), grid_state(grid, grid.home));
  const std::pair<Cell, Label> corners[] = {{grid.a, 1}, {grid.b, 2}, {grid.c, 4}, {grid.d, 8}};
  struct Move {
    const char* name;
    int dx, dy;
  };
  const Move moves[] = {{"N", 0, 1}, {"S", 0, -1}, {"E", 1, 0}, {"W", -1, 0}};

  for (std::size_t copy = 0; copy < copies; ++copy) {
    const bool fixed = copy == 1;
    for (int y = 0; y < grid.height; ++y) {
      for (int x = 0; x < grid.width; ++x) {
        const Cell here{x, y};
        const StateId s = grid_state(grid, here, fixed);
        for (const auto& [cell, label] : corners) {
          if (cell == here) out.mdp.set_label(s, out.mdp.label(s) | label);
        }
        for (const Move& mv : moves) {
          const Cell there{x + mv.dx, y + mv.dy};
          bool stays = !grid.inside(there) || grid.blocked(here, there);
          if (zap && !fixed && std::minmax(here, there) == std::minmax(grid.wire_below, grid.wire_above)) {
            stays = true;
          }
          out.mdp.add_action(s, mv.name, {{grid_state(grid, stays ? here : there, fixed), 1.0}});
        }
        if (zap && !fixed && here == grid.wire_below) {
          std::vector<Branch> fix;
          if (grid.zap_probability > 0.0) fix.push_back({damaged, grid.zap_probability});
          if (grid.zap_probability < 1.0) fix.push_back({grid_state(grid, here, true), 1.0 - grid.zap_probability});
          out.mdp.add_action(s, "fix", std::move(fix));
        }
      }
    }
  }
  if (zap) out.mdp.add_action(damaged, "stay", {{damaged, 1.0}});

  OmegaRewardMachine& rm = out.machine = OmegaRewardMachine(ap, 5, 0);
  const char* order[] = {"A", "B", "C", "D"};
  for (MachineState q = 0; q < 4; ++q) {
    rm.add_edge(q, order[q], q + 1);
    rm.add_edge(q, std::string("!") + order[q], q);
  }
  rm.add_edge(4, "true", 0, 1.0, true);
  return out;
}

ModelBundle office_env(bool zap) {
  ModelBundle out = grid_env(office_layout(), zap);
  if (zap) {
    out.defaults = {{"zeta", 0.5}, {"init", 7.0}, {"ep-l", 100.0}, {"ep-n", 350000.0}};
  }
  return out;
}

ModelBundle lemma1_env() {
  ModelBundle out;
  out.mdp = Mdp({"a", "b"}, 2, 0);
  out.mdp.set_label(0, 1);
  out.mdp.set_label(1, 2);
  for (StateId s = 0; s < 2; ++s) {
    out.mdp.add_action(s, "a", {{0, 1.0}});
    out.mdp.add_action(s, "b", {{1, 1.0}});
  }
  out.machine = OmegaRewardMachine({"a", "b"}, 1, 0);
  out.machine.add_edge(0, "a", 0, 1.0, false);
  out.machine.add_edge(0, "b", 0, 0.0, true);
  return out;
}

ModelBundle two_wecs_env() {
  ModelBundle out;
  out.mdp = Mdp({"lo", "hi"}, 6, 0);
  out.mdp.set_label(1, 1);
  out.mdp.set_label(2, 1);
  out.mdp.set_label(4, 2);
  out.mdp.set_label(5, 2);
  out.mdp.add_action(0, "low", {{1, 1.0}});
  out.mdp.add_action(0, "high", {{3, 1.0}});
  out.mdp.add_action(1, "go", {{2, 1.0}});
  out.mdp.add_action(2, "go", {{1, 1.0}});
  out.mdp.add_action(3, "go", {{4, 1.0}});
  out.mdp.add_action(4, "go", {{5, 1.0}});
  out.mdp.add_action(5, "go", {{4, 1.0}});
  out.machine = OmegaRewardMachine({"lo", "hi"}, 1, 0);
  out.machine.add_edge(0, "lo", 0, 1.0, true);
  out.machine.add_edge(0, "hi", 0, 2.0, true);
  out.machine.add_edge(0, "!lo & !hi", 0, 0.0, false);
  out.defaults = {{"f", 500.0}, {"alpha", 0.005}, {"epsilon", 0.2}, {"ep-n", 30000.0}};
  return out;
}

const std::vector<std::string>& env_names() {
  static const std::vector<std::string> names{"lemma1", "two_wecs", "office", "office_zap"};
  return names;
}

ModelBundle make_env(const std::string& name) {
  if (name == "lemma1") return lemma1_env();
  if (name == "two_wecs") return two_wecs_env();
  if (name == "office") return office_env(false);
  if (name == "office_zap") return office_env(true);
  std::string valid;
  for (const auto& n : env_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw ParameterError("unknown environment '" + name + "' (valid: " + valid + ")");
}

}  // namespace omegarm
