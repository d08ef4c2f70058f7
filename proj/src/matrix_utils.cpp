#include "matrix_utils.hpp"

#include <cmath>

#include "errors.hpp"

namespace tvar {

namespace {

double off_diagonal_norm(const Eigen::MatrixXd& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

SymEigen jacobi_eigen_sym(const Eigen::MatrixXd& a, double tol,
                          double sym_tol) {
  if (a.rows() != a.cols())
    throw ValidationError("jacobi_eigen_sym: matrix must be square");
  const int n = static_cast<int>(a.rows());

  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > sym_tol * scale) {
    throw ValidationError(
        "jacobi_eigen_sym: input is not symmetric (max |A - A^T| = " +
        std::to_string(asym) + ")");
  }

  Eigen::MatrixXd m = 0.5 * (a + a.transpose());  // exact symmetrization
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double frob = std::max(1.0, m.norm());

  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_norm(m) <= tol * frob) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        // Classical Jacobi rotation (Golub & Van Loan).
        const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
        const double t =
            (theta >= 0.0 ? 1.0 : -1.0) /
            (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double mkp = m(k, p), mkq = m(k, q);
          m(k, p) = c * mkp - s * mkq;
          m(k, q) = s * mkp + c * mkq;
        }
        for (int k = 0; k < n; ++k) {
          const double mpk = m(p, k), mqk = m(q, k);
          m(p, k) = c * mpk - s * mqk;
          m(q, k) = s * mpk + c * mqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    if (sweep == kMaxSweeps - 1 && off_diagonal_norm(m) > tol * frob) {
      throw NumericError("jacobi_eigen_sym: sweeps failed to converge");
    }
  }

  // Sort ascending by eigenvalue, permuting vectors to match.
  SymEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(),
            [&m](int i, int j) { return m(i, i) < m(j, j); });
  for (int i = 0; i < n; ++i) {
    out.values(i) = m(order[static_cast<std::size_t>(i)],
                      order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

double sym_operator_norm(const Eigen::MatrixXd& a) {
  const SymEigen e = jacobi_eigen_sym(a);
  return std::max(std::abs(e.values(0)),
                  std::abs(e.values(e.values.size() - 1)));
}

Eigen::MatrixXd fractional_power_sym(const Eigen::MatrixXd& a, double alpha) {
  const SymEigen e = jacobi_eigen_sym(a);
  const int n = static_cast<int>(e.values.size());
  if (e.values(0) <= 0.0) {
    throw DomainError(
        "fractional_power_sym: matrix is not positive definite "
        "(min eigenvalue = " +
        std::to_string(e.values(0)) + ")");
  }
  Eigen::VectorXd powered(n);
  for (int i = 0; i < n; ++i) powered(i) = std::pow(e.values(i), alpha);
  return e.vectors * powered.asDiagonal() * e.vectors.transpose();
}

Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& a, long k) {
  if (a.rows() != a.cols())
    throw ValidationError("matrix_power: matrix must be square");
  if (k < 0) throw ValidationError("matrix_power: exponent must be >= 0");
  Eigen::MatrixXd result =
      Eigen::MatrixXd::Identity(a.rows(), a.cols());
  Eigen::MatrixXd base = a;
  while (k > 0) {
    if (k & 1) result = result * base;
    base = base * base;
    k >>= 1;
  }
  return result;
}

}  // namespace tvar
