#include "nlspde/spectral.hpp"

#include "nlspde/error.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <sstream>
#include <vector>

namespace nlspde {

namespace {

void assert_m_matrix(const SparseMatrix& a) {
  const SparseMatrix at = a.transpose();
  if ((a - at).norm() != 0.0) throw SolverError("assembled Laplacian is not symmetric");
  for (Eigen::Index col = 0; col < a.outerSize(); ++col) {
    double diag = 0.0;
    double off = 0.0;
    for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
      if (it.row() == it.col()) {
        diag = it.value();
      } else {
        if (it.value() > 0.0) throw SolverError("assembled Laplacian has a positive off-diagonal entry");
        off += -it.value();
      }
    }
    if (!(diag > 0.0) || diag < off) {
      throw SolverError("assembled Laplacian is not diagonally dominant");
    }
  }
}

}  // namespace

DiscreteOperator assemble_laplacian(const Grid& grid) {
  const Eigen::Index n = grid.size();
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(n) * (2 * grid.dimension() + 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto p = grid.position_index(i);
    double diag = 0.0;
    for (int a = 0; a < grid.dimension(); ++a) {
      const double c = 1.0 / (grid.spacing(a) * grid.spacing(a));
      diag += 2.0 * c;
      // Neighbours outside the interior carry the zero Dirichlet value and drop out.
      if (p[a] > 0) {
        auto q = p;
        --q[a];
        entries.emplace_back(i, grid.index(q[0], q[1]), -c);
      }
      if (p[a] + 1 < grid.count(a)) {
        auto q = p;
        ++q[a];
        entries.emplace_back(i, grid.index(q[0], q[1]), -c);
      }
    }
    entries.emplace_back(i, i, diag);
  }
  DiscreteOperator op;
  op.matrix.resize(n, n);
  op.matrix.setFromTriplets(entries.begin(), entries.end());
  op.matrix.makeCompressed();
  assert_m_matrix(op.matrix);
  return op;
}

EigenPair principal_eigenpair(const DiscreteOperator& op, const Grid& grid, double tol, int max_iterations) {
  const Eigen::Index n = op.matrix.rows();
  if (n != grid.size()) throw ShapeError("operator and grid sizes differ");
  Eigen::SimplicialLDLT<SparseMatrix> chol(op.matrix);
  if (chol.info() != Eigen::Success) throw SolverError("Cholesky factorization of A failed; A is not positive definite");

  // A positive start vector is never orthogonal to the positive ground state.
  Field v = Field::Ones(n).normalized();
  double lambda = v.dot(op.matrix * v);
  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < max_iterations; ++it) {
    Field w = chol.solve(v);
    if (chol.info() != Eigen::Success) throw SolverError("inverse iteration solve failed");
    v = w.normalized();
    const Field av = op.matrix * v;
    lambda = v.dot(av);
    residual = (av - lambda * v).norm();
    if (residual <= tol) break;
  }
  if (!(residual <= tol)) {
    std::ostringstream msg;
    msg << "inverse iteration did not converge in " << max_iterations << " iterations, residual " << residual;
    throw SolverError(msg.str());
  }
  if (v.sum() < 0.0) v = -v;
  const double mass = quadrature(v, grid);
  EigenPair pair;
  pair.value = lambda;
  pair.vector = v / mass;
  pair.residual = residual;
  pair.iterations = it + 1;
  if (pair.vector.minCoeff() <= 0.0) throw SolverError("principal eigenvector is not strictly positive");
  return pair;
}

}  // namespace nlspde
