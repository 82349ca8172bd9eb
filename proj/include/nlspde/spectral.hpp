#pragma once

#include "nlspde/grid.hpp"

#include <Eigen/SparseCore>

namespace nlspde {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// A = -Laplacian with homogeneous Dirichlet data, second-order central stencil.
struct DiscreteOperator {
  SparseMatrix matrix;
  int stencil_order = 2;
};

/// Throws SolverError if the assembled matrix is not a symmetric M-matrix with
/// positive diagonal, nonpositive off-diagonals and weak row diagonal dominance
/// (strict on rows touching the boundary).
DiscreteOperator assemble_laplacian(const Grid& grid);

struct EigenPair {
  double value = 0.0;  ///< lambda_1
  Field vector;        ///< phi_1 > 0, normalized so that quadrature(phi_1) == 1
  double residual = 0.0;  ///< ||A phi - lambda phi||_2 / ||phi||_2
  int iterations = 0;
};

/// Smallest eigenpair by inverse iteration on a sparse Cholesky factorization of A.
EigenPair principal_eigenpair(const DiscreteOperator& op, const Grid& grid, double tol = 1e-10,
                              int max_iterations = 10000);

}  // namespace nlspde
