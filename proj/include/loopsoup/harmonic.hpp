#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "loopsoup/graph.hpp"

namespace loopsoup {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// M(z,z) = lambda(z), M(z,z') = -C(z,z'), rows/cols over free vertices in
/// free-index order.
SparseMatrix conductance_matrix(const WeightedGraph& g);

struct SolverPolicy {
  // Sparse Cholesky up to this many unknowns (AMD fill on 2D lattices stays
  // manageable to a few million), conjugate gradients above.
  Index direct_limit = 2500000;
  double relative_tolerance = 1e-10;
  Index max_iterations = 200000;
};

/// Solves M x = b for the conductance matrix of a graph. Immutable after
/// construction; solve() is safe to call concurrently.
class LaplacianSolver {
 public:
  explicit LaplacianSolver(const WeightedGraph& g, SolverPolicy policy = {});
  ~LaplacianSolver();
  LaplacianSolver(LaplacianSolver&&) noexcept;
  LaplacianSolver& operator=(LaplacianSolver&&) noexcept;

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  bool is_direct() const;
  Index size() const { return size_; }
  const SparseMatrix& matrix() const { return matrix_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  SparseMatrix matrix_;
  Index size_ = 0;
  SolverPolicy policy_;
};

/// Dense Green table G = M^{-1} over the free vertices (continuous-time units:
/// expected time spent when jumping across each edge at rate C).
///
/// The discrete-time walk Green function (expected visits) is
/// G_walk(x, y) = G(x, y) * lambda(y); see walk_green().
struct GreenTable {
  Eigen::MatrixXd values;
  std::vector<Index> vertices;  // graph index of each row/column
};

GreenTable green_table(const WeightedGraph& g, SolverPolicy policy = {});

/// Column G(., y) over free vertices (free-index order), one solve.
Eigen::VectorXd green_column(const LaplacianSolver& solver, const WeightedGraph& g, Index y);

/// Expected number of visits to y of the walk started at x, from G = M^{-1}.
inline double walk_green(const WeightedGraph& g, double green_xy, Index y) {
  return green_xy * g.lambda(y);
}

/// Harmonic extension: h = f on killed vertices, harmonic on free vertices.
/// `boundary` lists (killed vertex, value) pairs; unlisted killed vertices are 0.
Eigen::VectorXd harmonic_extension(const LaplacianSolver& solver, const WeightedGraph& g,
                                   std::span<const std::pair<Index, double>> boundary);

struct ExitProbability {
  Index vertex;  // killed vertex
  double probability;
};

/// P_start(walk is killed at b) for each killed b reachable in one step from
/// a free vertex. One linear solve.
std::vector<ExitProbability> boundary_hit_kernel(const WeightedGraph& g, Index start,
                                                 SolverPolicy policy = {});
std::vector<ExitProbability> boundary_hit_kernel(const LaplacianSolver& solver,
                                                 const WeightedGraph& g, Index start);

/// Conductances of the three-node network equivalent to the graph seen from
/// (x, y) with the killed set shorted together.
template <typename Scalar>
struct EqConductance {
  Scalar ceq;
  Scalar chi_x;
  Scalar chi_y;
  /// ceq == 0: x and y decouple (independent field values).
  bool disconnected() const { return !(ceq > Scalar(0)); }
};

/// Reads the equivalent conductances off the inverse of a 2x2 Green block.
template <typename Derived>
EqConductance<typename Derived::Scalar> ceq_from_green(const Eigen::MatrixBase<Derived>& green) {
  using Scalar = typename Derived::Scalar;
  if (green.rows() != 2 || green.cols() != 2) throw std::invalid_argument("ceq_from_green: need 2x2");
  const Scalar gxx = green(0, 0), gyy = green(1, 1);
  const Scalar gxy = Scalar(0.5) * (green(0, 1) + green(1, 0));
  using std::abs;
  if (abs(green(0, 1) - green(1, 0)) > Scalar(1e-9) * (abs(gxx) + abs(gyy)))
    throw std::invalid_argument("ceq_from_green: matrix not symmetric");
  const Scalar det = gxx * gyy - gxy * gxy;
  if (!(gxx > Scalar(0)) || !(det > Scalar(0)))
    throw std::invalid_argument("ceq_from_green: matrix not positive definite");
  const Scalar ceq = gxy / det;
  return {ceq, gyy / det - ceq, gxx / det - ceq};
}

/// Equivalent conductance by the path representation:
/// sum_{z ~ x} C(x, z) P_z(hit y before the killed set or x). One solve.
double ceq_path_sum(const WeightedGraph& g, Index x, Index y, SolverPolicy policy = {});

/// Green block of (x, y) from two solves.
Eigen::Matrix2d green_block(const LaplacianSolver& solver, const WeightedGraph& g, Index x, Index y);

/// C^eq_{n,a}(q) = (n/2) sum_{i=n}^{floor(nq)} P_{(i,1)}(exit in [-a,0] x {0}).
/// One harmonic solve on the base graph.
double ceq_n_q(const QuotientGraph& qg, SolverPolicy policy = {});
double ceq_n_q(const QuotientGraph& qg, const LaplacianSolver& base_solver);

/// The same conductance through the Green block of the two quotient vertices.
double ceq_quotient_green(const QuotientGraph& qg, SolverPolicy policy = {});

}  // namespace loopsoup
