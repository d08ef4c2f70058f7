#pragma once

#include <Eigen/Dense>

// Small symmetric-matrix utilities.  The eigendecomposition is a cyclic
// Jacobi iteration: unconditionally convergent for symmetric input, accurate
// to the off-diagonal tolerance, and free of any dependence on a general
// nonsymmetric eigensolver.

namespace tvar {

struct SymEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns, orthonormal
};

// Cyclic Jacobi sweeps until the off-diagonal Frobenius norm is <=
// tol * max(1, ||A||_F).  Throws ValidationError if A is not symmetric to
// sym_tol * max(1, max|A_ij|), NumericError if sweeps fail to converge.
SymEigen jacobi_eigen_sym(const Eigen::MatrixXd& a, double tol = 1e-12,
                          double sym_tol = 1e-10);

// Operator (spectral) norm of a symmetric matrix: max |eigenvalue|.
double sym_operator_norm(const Eigen::MatrixXd& a);

// A^alpha = U diag(lambda^alpha) U^T for symmetric positive definite A.
// Throws DomainError if an eigenvalue is <= 0.
Eigen::MatrixXd fractional_power_sym(const Eigen::MatrixXd& a, double alpha);

// A^k by repeated squaring, integer k >= 0 (general square A).
Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& a, long k);

}  // namespace tvar
