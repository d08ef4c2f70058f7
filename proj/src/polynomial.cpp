#include "polynomial.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace tvar {

namespace {

constexpr int kMaxIterations = 500;

// Monic coefficients of lambda^d - theta_1 lambda^{d-1} - ... - theta_d,
// stored c[0] = 1 (lambda^d) .. c[d] (constant term).
std::vector<double> monic_coeffs(const Eigen::VectorXd& theta) {
  const int d = static_cast<int>(theta.size());
  std::vector<double> c(static_cast<std::size_t>(d) + 1);
  c[0] = 1.0;
  for (int i = 1; i <= d; ++i) c[static_cast<std::size_t>(i)] = -theta(i - 1);
  return c;
}

std::complex<double> horner(const std::vector<double>& c,
                            std::complex<double> z) {
  std::complex<double> p(c[0], 0.0);
  for (std::size_t i = 1; i < c.size(); ++i) p = p * z + c[i];
  return p;
}

// sum_i |c_i| |z|^{d-i}, the natural residual scale for |p(z)|.
double residual_scale(const std::vector<double>& c, std::complex<double> z) {
  const double az = std::abs(z);
  double s = 0.0;
  for (double ci : c) s = s * az + std::abs(ci);
  return s;
}

bool durand_kerner(const std::vector<double>& c,
                   std::vector<std::complex<double>>& roots) {
  const int d = static_cast<int>(c.size()) - 1;
  double max_coeff = 0.0;
  for (int i = 1; i <= d; ++i)
    max_coeff = std::max(max_coeff, std::abs(c[static_cast<std::size_t>(i)]));
  const double radius = 1.0 + max_coeff;  // Cauchy bound on root moduli

  roots.resize(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    // Distinct start angles off the real axis to avoid symmetric stalls.
    const double angle = 2.0 * M_PI * (k + 0.25) / d + 0.4;
    roots[static_cast<std::size_t>(k)] =
        radius * std::complex<double>(std::cos(angle), std::sin(angle));
  }

  for (int iter = 0; iter < kMaxIterations; ++iter) {
    double max_step = 0.0;
    for (int k = 0; k < d; ++k) {
      std::complex<double> denom(1.0, 0.0);
      for (int j = 0; j < d; ++j) {
        if (j == k) continue;
        std::complex<double> diff = roots[static_cast<std::size_t>(k)] -
                                    roots[static_cast<std::size_t>(j)];
        if (std::abs(diff) < 1e-30) diff = std::complex<double>(1e-30, 1e-30);
        denom *= diff;
      }
      const std::complex<double> delta =
          horner(c, roots[static_cast<std::size_t>(k)]) / denom;
      roots[static_cast<std::size_t>(k)] -= delta;
      max_step = std::max(
          max_step,
          std::abs(delta) /
              (1.0 + std::abs(roots[static_cast<std::size_t>(k)])));
    }
    if (max_step <= 1e-14) break;
  }

  // Accept only if every root passes a relative residual check.
  for (int k = 0; k < d; ++k) {
    const std::complex<double>& z = roots[static_cast<std::size_t>(k)];
    const double res = std::abs(horner(c, z));
    if (res > 1e-10 * std::max(1.0, residual_scale(c, z))) return false;
  }
  return true;
}

}  // namespace

Eigen::MatrixXd companion(const Eigen::VectorXd& theta) {
  const int d = static_cast<int>(theta.size());
  if (d < 1) throw ValidationError("companion: order d must be >= 1");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  m.row(0) = theta.transpose();
  for (int i = 1; i < d; ++i) m(i, i - 1) = 1.0;
  return m;
}

std::vector<std::complex<double>> companion_roots(const Eigen::VectorXd& theta) {
  const int d = static_cast<int>(theta.size());
  if (d < 1) throw ValidationError("companion_roots: order d must be >= 1");

  if (d == 1) return {std::complex<double>(theta(0), 0.0)};
  if (d == 2) {
    // lambda^2 - theta_1 lambda - theta_2 = 0
    const double b = theta(0), c = theta(1);
    const double disc = b * b + 4.0 * c;
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      return {std::complex<double>(0.5 * (b + s), 0.0),
              std::complex<double>(0.5 * (b - s), 0.0)};
    }
    const double s = std::sqrt(-disc);
    return {std::complex<double>(0.5 * b, 0.5 * s),
            std::complex<double>(0.5 * b, -0.5 * s)};
  }

  const std::vector<double> c = monic_coeffs(theta);
  std::vector<std::complex<double>> roots;
  if (durand_kerner(c, roots)) return roots;

  // Fallback: eigensolve the companion matrix directly.
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion(theta), false);
  if (solver.info() != Eigen::Success) {
    throw NumericError(
        "companion_roots: root iteration and companion eigensolve both "
        "failed to converge");
  }
  roots.resize(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) roots[static_cast<std::size_t>(i)] =
      solver.eigenvalues()(i);
  return roots;
}

double spectral_radius(const Eigen::VectorXd& theta) {
  double r = 0.0;
  for (const auto& z : companion_roots(theta)) r = std::max(r, std::abs(z));
  return r;
}

double ar_transfer_sq(const Eigen::VectorXd& theta, double lambda) {
  // 1 - sum theta_j e^{i j lambda}, evaluated by recurrence on e^{i lambda}.
  const double c = std::cos(lambda), s = std::sin(lambda);
  double re = 1.0, im = 0.0;
  double pr = 1.0, pi = 0.0;  // e^{i j lambda}, starts at j=0
  for (int j = 0; j < theta.size(); ++j) {
    const double nr = pr * c - pi * s;
    const double ni = pr * s + pi * c;
    pr = nr;
    pi = ni;
    re -= theta(j) * pr;
    im -= theta(j) * pi;
  }
  return re * re + im * im;
}

Eigen::VectorXd theta_from_roots(
    const std::vector<std::complex<double>>& roots) {
  const int d = static_cast<int>(roots.size());
  if (d < 1) throw ValidationError("theta_from_roots: need at least one root");

  // Multiply out prod (1 - lambda z); coeffs[k] is the z^k coefficient.
  std::vector<std::complex<double>> coeffs(static_cast<std::size_t>(d) + 1,
                                           {0.0, 0.0});
  coeffs[0] = {1.0, 0.0};
  for (int i = 0; i < d; ++i) {
    for (int k = i + 1; k >= 1; --k) {
      coeffs[static_cast<std::size_t>(k)] -=
          roots[static_cast<std::size_t>(i)] *
          coeffs[static_cast<std::size_t>(k - 1)];
    }
  }

  double scale = 0.0;
  for (const auto& z : coeffs) scale = std::max(scale, std::abs(z));
  Eigen::VectorXd theta(d);
  for (int k = 1; k <= d; ++k) {
    const auto& ck = coeffs[static_cast<std::size_t>(k)];
    if (std::abs(ck.imag()) > 1e-9 * std::max(1.0, scale)) {
      throw NumericError(
          "theta_from_roots: root set is not closed under conjugation "
          "(imaginary residue in coefficient " +
          std::to_string(k) + ")");
    }
    // theta(z) = 1 - sum theta_k z^k, so theta_k = -coeff_k.
    theta(k - 1) = -ck.real();
  }
  return theta;
}

bool conjugate_closed(const std::vector<std::complex<double>>& roots,
                      double tol) {
  std::vector<bool> used(roots.size(), false);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (used[i]) continue;
    if (std::abs(roots[i].imag()) <= tol) {
      used[i] = true;
      continue;
    }
    const std::complex<double> want = std::conj(roots[i]);
    bool matched = false;
    for (std::size_t j = i + 1; j < roots.size(); ++j) {
      if (!used[j] && std::abs(roots[j] - want) <= tol) {
        used[i] = used[j] = true;
        matched = true;
        break;
      }
    }
    if (!matched) return false;
  }
  return true;
}

}  // namespace tvar
