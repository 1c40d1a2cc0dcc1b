#pragma once

#include <cstddef>
#include <vector>

namespace omegarm::detail {

struct Entry {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Solves A x = b for sparse square A given as (row, col, value) entries;
/// duplicate entries are summed. Throws SolverError if A is singular or the
/// scaled residual max|Ax - b| / max(1, max|x|) exceeds 1e-10.
std::vector<double> solve_sparse(std::size_t n, const std::vector<Entry>& entries,
                                 const std::vector<double>& rhs);

/// Tarjan's algorithm over an adjacency list. Returns the SCC id per node;
/// ids are assigned in reverse topological order (sinks first).
std::vector<std::size_t> strongly_connected_components(
    const std::vector<std::vector<std::size_t>>& successors, std::size_t* num_components = nullptr);

}  // namespace omegarm::detail
