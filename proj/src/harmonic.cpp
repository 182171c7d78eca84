#include "loopsoup/harmonic.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <variant>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

namespace loopsoup {

namespace {

using DirectSolver = Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;
using IterativeSolver =
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                             Eigen::IncompleteCholesky<double, Eigen::Lower, Eigen::AMDOrdering<int>>>;

// Every component of the free subgraph must reach a killed vertex, else M is singular.
void require_killing(const WeightedGraph& g) {
  const Index m = g.free_count();
  std::vector<char> seen(m, 0);
  std::vector<Index> stack;
  for (Index s = 0; s < m; ++s) {
    if (seen[s]) continue;
    bool killed = false;
    seen[s] = 1;
    stack.push_back(s);
    while (!stack.empty()) {
      const Index fv = stack.back();
      stack.pop_back();
      for (const Neighbor& nb : g.neighbors(g.free_vertices()[fv])) {
        const Index f = g.free_index(nb.to);
        if (f < 0) {
          killed = true;
        } else if (!seen[f]) {
          seen[f] = 1;
          stack.push_back(f);
        }
      }
    }
    if (!killed) throw std::domain_error("singular conductance matrix: a component has no killing");
  }
}

}  // namespace

SparseMatrix conductance_matrix(const WeightedGraph& g) {
  const Index m = g.free_count();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(m) * 5);
  for (Index f = 0; f < m; ++f) {
    const Index v = g.free_vertices()[f];
    trip.emplace_back(f, f, g.lambda(v));
    for (const Neighbor& nb : g.neighbors(v)) {
      const Index t = g.free_index(nb.to);
      if (t >= 0) trip.emplace_back(f, t, -nb.conductance);
    }
  }
  SparseMatrix mat(m, m);
  mat.setFromTriplets(trip.begin(), trip.end());
  return mat;
}

struct LaplacianSolver::Impl {
  std::variant<DirectSolver, IterativeSolver> solver;
};

LaplacianSolver::LaplacianSolver(const WeightedGraph& g, SolverPolicy policy)
    : impl_(std::make_unique<Impl>()), policy_(policy) {
  if (g.free_count() == 0) throw std::invalid_argument("LaplacianSolver: graph has no free vertex");
  require_killing(g);
  matrix_ = conductance_matrix(g);
  size_ = g.free_count();
  if (size_ <= policy.direct_limit) {
    auto& s = impl_->solver.emplace<DirectSolver>();
    s.compute(matrix_);
    if (s.info() != Eigen::Success) throw std::domain_error("LaplacianSolver: factorization failed");
  } else {
    auto& s = impl_->solver.emplace<IterativeSolver>();
    s.setTolerance(policy.relative_tolerance);
    s.setMaxIterations(policy.max_iterations);
    s.compute(matrix_);
    if (s.info() != Eigen::Success) throw std::domain_error("LaplacianSolver: preconditioner failed");
  }
}

LaplacianSolver::~LaplacianSolver() = default;
LaplacianSolver::LaplacianSolver(LaplacianSolver&&) noexcept = default;
LaplacianSolver& LaplacianSolver::operator=(LaplacianSolver&&) noexcept = default;

bool LaplacianSolver::is_direct() const {
  return std::holds_alternative<DirectSolver>(impl_->solver);
}

Eigen::VectorXd LaplacianSolver::solve(const Eigen::VectorXd& rhs) const {
  if (rhs.size() != size_) throw std::invalid_argument("LaplacianSolver::solve: size mismatch");
  if (const auto* d = std::get_if<DirectSolver>(&impl_->solver)) return d->solve(rhs);
  const auto& it = std::get<IterativeSolver>(impl_->solver);
  Eigen::VectorXd x = it.solve(rhs);
  if (it.info() != Eigen::Success)
    throw std::runtime_error("LaplacianSolver: conjugate gradient did not converge");
  return x;
}

GreenTable green_table(const WeightedGraph& g, SolverPolicy policy) {
  const LaplacianSolver solver(g, policy);
  const Index m = g.free_count();
  GreenTable t;
  t.vertices.assign(g.free_vertices().begin(), g.free_vertices().end());
  t.values.resize(m, m);
  for (Index c = 0; c < m; ++c) t.values.col(c) = solver.solve(Eigen::VectorXd::Unit(m, c));
  // Symmetrize away round-off; asymmetry beyond solver tolerance is a bug.
  const double asym = (t.values - t.values.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9 * std::max(1.0, t.values.cwiseAbs().maxCoeff()))
    throw std::runtime_error("green_table: result not symmetric");
  t.values = 0.5 * (t.values + t.values.transpose()).eval();
  return t;
}

Eigen::VectorXd green_column(const LaplacianSolver& solver, const WeightedGraph& g, Index y) {
  const Index f = g.free_index(y);
  if (f < 0) throw std::invalid_argument("green_column: vertex is not free");
  return solver.solve(Eigen::VectorXd::Unit(g.free_count(), f));
}

Eigen::VectorXd harmonic_extension(const LaplacianSolver& solver, const WeightedGraph& g,
                                   std::span<const std::pair<Index, double>> boundary) {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(g.free_count());
  for (const auto& [b, value] : boundary) {
    if (g.free_index(b) >= 0) throw std::invalid_argument("harmonic_extension: boundary vertex is free");
    for (const Neighbor& nb : g.neighbors(b)) {
      const Index f = g.free_index(nb.to);
      if (f >= 0) rhs[f] += nb.conductance * value;
    }
  }
  return solver.solve(rhs);
}

std::vector<ExitProbability> boundary_hit_kernel(const LaplacianSolver& solver,
                                                 const WeightedGraph& g, Index start) {
  if (start < 0 || start >= g.vertex_count() || g.free_index(start) < 0)
    throw std::invalid_argument("boundary_hit_kernel: start is not interior");
  const Eigen::VectorXd col = green_column(solver, g, start);
  std::map<Index, double> exit;
  for (const Index v : g.free_vertices()) {
    const double gv = col[g.free_index(v)];
    for (const Neighbor& nb : g.neighbors(v))
      if (g.free_index(nb.to) < 0) exit[nb.to] += gv * nb.conductance;
  }
  std::vector<ExitProbability> out;
  out.reserve(exit.size());
  for (const auto& [b, p] : exit) out.push_back({b, p});
  return out;
}

std::vector<ExitProbability> boundary_hit_kernel(const WeightedGraph& g, Index start,
                                                 SolverPolicy policy) {
  return boundary_hit_kernel(LaplacianSolver(g, policy), g, start);
}

double ceq_path_sum(const WeightedGraph& g, Index x, Index y, SolverPolicy policy) {
  if (x == y || g.free_index(x) < 0 || g.free_index(y) < 0)
    throw std::invalid_argument("ceq_path_sum: need two distinct free vertices");
  // h(z) = P_z(hit y before killed set or x): Dirichlet problem on free \ {x, y}.
  std::vector<Index> compact(g.vertex_count(), -1);
  std::vector<Index> members;
  for (const Index v : g.free_vertices())
    if (v != x && v != y) {
      compact[v] = static_cast<Index>(members.size());
      members.push_back(v);
    }
  const Index m = static_cast<Index>(members.size());
  Eigen::VectorXd h;
  if (m > 0) {
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (Index k = 0; k < m; ++k) {
      const Index v = members[k];
      trip.emplace_back(k, k, g.lambda(v));
      for (const Neighbor& nb : g.neighbors(v)) {
        if (compact[nb.to] >= 0) trip.emplace_back(k, compact[nb.to], -nb.conductance);
        else if (nb.to == y) rhs[k] += nb.conductance;
      }
    }
    SparseMatrix mat(m, m);
    mat.setFromTriplets(trip.begin(), trip.end());
    if (m <= policy.direct_limit) {
      DirectSolver s(mat);
      if (s.info() != Eigen::Success) throw std::domain_error("ceq_path_sum: singular system");
      h = s.solve(rhs);
    } else {
      IterativeSolver s;
      s.setTolerance(policy.relative_tolerance);
      s.setMaxIterations(policy.max_iterations);
      s.compute(mat);
      h = s.solve(rhs);
      if (s.info() != Eigen::Success) throw std::runtime_error("ceq_path_sum: no convergence");
    }
  }
  double total = 0;
  for (const Neighbor& nb : g.neighbors(x)) {
    if (nb.to == y) total += nb.conductance;
    else if (compact[nb.to] >= 0) total += nb.conductance * h[compact[nb.to]];
  }
  return total;
}

Eigen::Matrix2d green_block(const LaplacianSolver& solver, const WeightedGraph& g, Index x, Index y) {
  const Eigen::VectorXd cx = green_column(solver, g, x);
  const Eigen::VectorXd cy = green_column(solver, g, y);
  Eigen::Matrix2d b;
  b << cx[g.free_index(x)], cy[g.free_index(x)], cx[g.free_index(y)], cy[g.free_index(y)];
  return b;
}

double ceq_n_q(const QuotientGraph& qg, const LaplacianSolver& base_solver) {
  const WeightedGraph& g = qg.base;
  std::vector<std::pair<Index, double>> data;
  data.reserve(qg.left_class.size());
  for (const Index b : qg.left_class) data.emplace_back(b, 1.0);
  const Eigen::VectorXd h = harmonic_extension(base_solver, g, data);
  double sum = 0;
  for (const Index b : qg.right_class) {
    const Vertex p = g.vertex(b);
    const Index above = g.index_of({p.i, 1});
    const Index f = g.free_index(above);
    if (f < 0) throw std::invalid_argument("ceq_n_q: right interval site has no interior neighbour");
    sum += h[f];
  }
  return 0.5 * g.n() * sum;
}

double ceq_n_q(const QuotientGraph& qg, SolverPolicy policy) {
  return ceq_n_q(qg, LaplacianSolver(qg.base, policy));
}

double ceq_quotient_green(const QuotientGraph& qg, SolverPolicy policy) {
  const LaplacianSolver solver(qg.graph, policy);
  return ceq_from_green(green_block(solver, qg.graph, qg.left, qg.right)).ceq;
}

}  // namespace loopsoup
