#include "linear.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>

#include "omegarm/errors.hpp"

namespace omegarm::detail {

namespace {
constexpr double kResidualTolerance = 1e-10;
constexpr std::size_t kUnvisited = std::numeric_limits<std::size_t>::max();
}  // namespace

std::vector<double> solve_sparse(std::size_t n, const std::vector<Entry>& entries,
                                 const std::vector<double>& rhs) {
  if (n == 0) return {};
  using SpMat = Eigen::SparseMatrix<double>;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(entries.size());
  for (const Entry& e : entries) {
    triplets.emplace_back(static_cast<int>(e.row), static_cast<int>(e.col), e.value);
  }
  SpMat a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();

  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw SolverError("singular linear system");

  Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(n));
  Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success) throw SolverError("linear solve failed");

  // One step of iterative refinement keeps the residual at round-off level
  // for the larger translated systems.
  Eigen::VectorXd r = b - a * x;
  x += lu.solve(r);
  r = b - a * x;

  const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
  const double residual = r.cwiseAbs().maxCoeff();
  if (!std::isfinite(residual) || residual > kResidualTolerance * scale) {
    throw SolverError("linear solve residual " + std::to_string(residual) + " above tolerance");
  }
  return {x.data(), x.data() + x.size()};
}

std::vector<std::size_t> strongly_connected_components(
    const std::vector<std::vector<std::size_t>>& successors, std::size_t* num_components) {
  const std::size_t n = successors.size();
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0), comp(n, kUnvisited);
  std::vector<char> on_stack(n, 0);
  std::vector<std::size_t> stack;
  std::size_t next_index = 0, next_comp = 0;

  struct Frame {
    std::size_t node;
    std::size_t edge;
  };
  std::vector<Frame> call;

  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    call.push_back({root, 0});
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      const auto& succ = successors[f.node];
      if (f.edge < succ.size()) {
        const std::size_t w = succ[f.edge++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.node] = std::min(low[f.node], index[w]);
        }
        continue;
      }
      const std::size_t v = f.node;
      call.pop_back();
      if (!call.empty()) low[call.back().node] = std::min(low[call.back().node], low[v]);
      if (low[v] == index[v]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = next_comp;
        } while (w != v);
        ++next_comp;
      }
    }
  }
  if (num_components) *num_components = next_comp;
  return comp;
}

}  // namespace omegarm::detail
