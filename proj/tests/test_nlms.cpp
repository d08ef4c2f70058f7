// The normalized LMS recursion and its exact transient/noise/drift error
// decomposition.  The three-step trajectory below is hand-evaluated; the
// zero-innovation path gives closed-form transient behaviour.

#include "nlms.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

using Catch::Approx;
using namespace tvar;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

ClosedFormCurve poly_curve(std::vector<std::vector<double>> coeffs,
                           double sigma = 1.0) {
  ClosedFormTheta th;
  th.family = ClosedFormTheta::Family::Poly;
  th.coeffs = std::move(coeffs);
  return ClosedFormCurve(th, SigmaFunc::constant(sigma), 1.0);
}

InnovationSpec gaussian_spec() {
  InnovationSpec s;
  s.family = InnovationFamily::Gaussian;
  return s;
}

// A deterministic path: zero innovations, so X_k = theta X_{k-1} exactly as
// the replay recursion computes it (the noise term adds exactly 0.0).
TvarPath geometric_path(double theta, double x0, long n) {
  TvarPath p;
  p.n = n;
  p.d = 1;
  p.x0 = vec({x0});
  p.innovations.assign(static_cast<std::size_t>(n), 0.0);
  p.samples.resize(static_cast<std::size_t>(n));
  double x = x0;
  for (long k = 0; k < n; ++k) {
    x = theta * x + 0.0;
    p.samples[static_cast<std::size_t>(k)] = x;
  }
  return p;
}

}  // namespace

TEST_CASE("normalized gain", "[nlms]") {
  SECTION("zero regressor gives zero gain") {
    const double x[2] = {0.0, 0.0};
    double l[2], f[4];
    normalized_gain(x, 2, 0.3, l, f);
    REQUIRE(l[0] == 0.0);
    REQUIRE(l[1] == 0.0);
    for (double v : f) REQUIRE(v == 0.0);
  }

  SECTION("nu = 0 is the unnormalized limit") {
    const double x[2] = {1.5, -2.0};
    double l[2], f[4];
    normalized_gain(x, 2, 0.0, l, f);
    REQUIRE(l[0] == 1.5);
    REQUIRE(l[1] == -2.0);
    REQUIRE(f[0] == Approx(2.25).margin(1e-15));   // x x^T row-major
    REQUIRE(f[1] == Approx(-3.0).margin(1e-15));
    REQUIRE(f[2] == Approx(-3.0).margin(1e-15));
    REQUIRE(f[3] == Approx(4.0).margin(1e-15));
  }

  SECTION("d=1, x=1, nu=0.5 gives 2/3") {
    const double x = 1.0;
    double l, f;
    normalized_gain(&x, 1, 0.5, &l, &f);
    REQUIRE(l == Approx(2.0 / 3.0).epsilon(1e-15));
    REQUIRE(f == Approx(2.0 / 3.0).epsilon(1e-15));
  }

  SECTION("the normalized quadratic form stays below 1/nu") {
    rng::Xoshiro256pp gen(3);
    for (int rep = 0; rep < 100; ++rep) {
      double x[3], l[3];
      double norm2 = 0.0;
      for (double& xi : x) {
        xi = 4.0 * gen.uniform01() - 2.0;
        norm2 += xi * xi;
      }
      const double nu = 0.01 + gen.uniform01();
      normalized_gain(x, 3, nu, l, nullptr);
      double xl = 0.0;
      for (int i = 0; i < 3; ++i) xl += x[i] * l[i];
      REQUIRE(xl == Approx(norm2 / (1.0 + nu * norm2)).epsilon(1e-13));
      REQUIRE(nu * xl < 1.0);  // contraction margin of I - mu F
    }
  }

  SECTION("validation") {
    const double x = 1.0;
    double l;
    REQUIRE_THROWS_AS(normalized_gain(&x, 0, 0.5, &l, nullptr),
                      ValidationError);
    REQUIRE_THROWS_AS(normalized_gain(&x, 1, -0.1, &l, nullptr),
                      ValidationError);
  }
}

TEST_CASE("single recursion step", "[nlms]") {
  SECTION("zero state leaves the estimate unchanged") {
    const double th = 0.7, x_state = 0.0;
    double out;
    nlms_step(&th, &x_state, 1, 2.5, 0.3, &out);
    REQUIRE(out == 0.7);
  }

  SECTION("hand-evaluated scalar step: 0.5*1*1/(1+0.5) = 1/3") {
    const double th = 0.0, x_state = 1.0;
    double out;
    nlms_step(&th, &x_state, 1, 1.0, 0.5, &out);
    REQUIRE(out == Approx(1.0 / 3.0).epsilon(1e-15));
  }

  SECTION("zero residual is a fixed point") {
    const double th[2] = {0.4, -0.2};
    const double x[2] = {1.5, 2.0};
    const double predict = 0.4 * 1.5 - 0.2 * 2.0;
    double out[2];
    nlms_step(th, x, 2, predict, 0.25, out);
    REQUIRE(out[0] == 0.4);
    REQUIRE(out[1] == -0.2);
  }

  SECTION("validation") {
    const double th = 0.0, x = 1.0;
    double out;
    REQUIRE_THROWS_AS(nlms_step(&th, &x, 1, 1.0, 0.0, &out), ValidationError);
    REQUIRE_THROWS_AS(nlms_step(&th, &x, 1, 1.0, -0.1, &out), ValidationError);
  }
}

TEST_CASE("trajectory over a fixed path", "[nlms]") {
  SECTION("hand-computed three-step run") {
    TvarPath p;
    p.n = 3;
    p.d = 1;
    p.x0 = vec({2.0});
    p.samples = {1.0, -0.5, 0.25};
    p.innovations = {0.0, 0.0, 0.0};  // unused by the recursion
    const NlmsTrajectory traj = nlms_run(p, 0.5);
    REQUIRE(traj.n == 3);
    REQUIRE(traj.d == 1);
    REQUIRE(traj.row(0)[0] == 0.0);
    REQUIRE(traj.row(1)[0] == Approx(1.0 / 3.0).epsilon(1e-15));
    REQUIRE(traj.row(2)[0] == Approx(1.0 / 18.0).epsilon(1e-14));
    REQUIRE(traj.row(3)[0] == Approx(-1.0 / 162.0).epsilon(1e-13));
  }

  SECTION("all-zero path keeps the estimate at zero") {
    TvarPath p;
    p.n = 10;
    p.d = 2;
    p.x0 = vec({0.0, 0.0});
    p.samples.assign(10, 0.0);
    p.innovations.assign(10, 0.0);
    const NlmsTrajectory traj = nlms_run(p, 0.2);
    for (long k = 0; k <= 10; ++k) {
      REQUIRE(traj.row(k)[0] == 0.0);
      REQUIRE(traj.row(k)[1] == 0.0);
    }
  }

  SECTION("first row reproduces a single nlms_step") {
    const ClosedFormCurve c = poly_curve({{0.4, 0.3}, {-0.1, 0.0}});
    const TvarPath p = simulate(c, 30, gaussian_spec(), 15);
    const NlmsTrajectory traj = nlms_run(p, 0.1);
    const double th0[2] = {0.0, 0.0};
    double state[2], out[2];
    p.state_at(0, state);
    nlms_step(th0, state, 2, p.samples[0], 0.1, out);
    REQUIRE(traj.row(1)[0] == out[0]);
    REQUIRE(traj.row(1)[1] == out[1]);
  }

  SECTION("estimates are causal in the samples") {
    const ClosedFormCurve c = poly_curve({{0.4, 0.3}});
    const TvarPath full = simulate(c, 200, gaussian_spec(), 5);
    TvarPath prefix = full;
    prefix.n = 120;
    prefix.samples.resize(120);
    prefix.innovations.resize(120);
    const NlmsTrajectory a = nlms_run(full, 0.15);
    const NlmsTrajectory b = nlms_run(prefix, 0.15);
    for (long k = 0; k <= 120; ++k) REQUIRE(a.row(k)[0] == b.row(k)[0]);
  }

  SECTION("estimate accessor bounds") {
    TvarPath p;
    p.n = 3;
    p.d = 1;
    p.x0 = vec({0.0});
    p.samples = {1.0, 2.0, 3.0};
    p.innovations = {0.0, 0.0, 0.0};
    const NlmsTrajectory traj = nlms_run(p, 0.5);
    REQUIRE_NOTHROW(traj.estimate(3));
    REQUIRE_THROWS_AS(traj.estimate(4), ValidationError);
    REQUIRE_THROWS_AS(traj.estimate(-1), ValidationError);
    REQUIRE_THROWS_AS(nlms_run(p, 0.0), ValidationError);
  }
}

TEST_CASE("rescaling the path and the step size preserves the trajectory",
          "[nlms]") {
  // X -> 2X with mu -> mu/4 leaves every estimate bit-identical: all
  // intermediates scale by exact powers of two.
  const ClosedFormCurve c = poly_curve({{0.4, 0.3}});
  const TvarPath p = simulate(c, 300, gaussian_spec(), 5);
  TvarPath scaled = p;
  scaled.x0 *= 2.0;
  for (double& x : scaled.samples) x *= 2.0;
  const NlmsTrajectory a = nlms_run(p, 0.2);
  const NlmsTrajectory b = nlms_run(scaled, 0.05);
  REQUIRE(a.estimates == b.estimates);
}

TEST_CASE("pointwise reads", "[nlms]") {
  SECTION("index map") {
    REQUIRE(pointwise_index(1.0, 100) == 100);
    REQUIRE(pointwise_index(0.5, 100) == 50);   // integer hit
    REQUIRE(pointwise_index(0.5, 7) == 3);      // floor(3.5)
    REQUIRE(pointwise_index(0.25, 8) == 2);
    REQUIRE(pointwise_index(0.001, 100) == 0);  // before the first update
  }

  SECTION("domain") {
    REQUIRE_THROWS_AS(pointwise_index(0.0, 100), DomainError);
    REQUIRE_THROWS_AS(pointwise_index(-0.5, 100), DomainError);
    REQUIRE_THROWS_AS(pointwise_index(1.0001, 100), DomainError);
    REQUIRE_THROWS_AS(pointwise_index(0.5, 0), ValidationError);
  }

  SECTION("pointwise estimate reads the mapped row") {
    const ClosedFormCurve c = poly_curve({{0.4, 0.3}});
    const TvarPath p = simulate(c, 80, gaussian_spec(), 33);
    const NlmsTrajectory traj = nlms_run(p, 0.1);
    REQUIRE(pointwise_estimate(traj, 1.0)(0) == traj.row(80)[0]);
    REQUIRE(pointwise_estimate(traj, 0.5)(0) == traj.row(40)[0]);
  }
}

TEST_CASE("two-step-size combination", "[nlms]") {
  SECTION("agreement is a fixed point") {
    const Eigen::VectorXd v = vec({0.7, -0.2});
    const Eigen::VectorXd out = romberg_combine(v, v, 0.5);
    REQUIRE(out(0) == Approx(0.7).epsilon(1e-15));
    REQUIRE(out(1) == Approx(-0.2).epsilon(1e-15));
  }

  SECTION("gamma=0.5 formula: (1.0 - 0.4)/0.5 = 1.2") {
    const Eigen::VectorXd out =
        romberg_combine(vec({1.0}), vec({0.8}), 0.5);
    REQUIRE(out(0) == Approx(1.2).epsilon(1e-15));
  }

  SECTION("validation") {
    REQUIRE_THROWS_AS(romberg_combine(vec({1.0}), vec({0.8}), 0.0),
                      ValidationError);
    REQUIRE_THROWS_AS(romberg_combine(vec({1.0}), vec({0.8}), 1.0),
                      ValidationError);
    REQUIRE_THROWS_AS(romberg_combine(vec({1.0}), vec({0.8, 0.1}), 0.5),
                      ValidationError);
  }

  SECTION("bias-corrected estimate composes two runs") {
    const ClosedFormCurve c = poly_curve({{0.4, 0.3}});
    const TvarPath p = simulate(c, 100, gaussian_spec(), 8);
    const double mu = 0.2, gamma = 0.5, t = 0.75;
    const Eigen::VectorXd direct = bias_corrected_estimate(p, mu, gamma, t);
    const NlmsTrajectory fast = nlms_run(p, mu);
    const NlmsTrajectory slow = nlms_run(p, gamma * mu);
    const Eigen::VectorXd manual = romberg_combine(
        pointwise_estimate(fast, t), pointwise_estimate(slow, t), gamma);
    REQUIRE(direct.size() == manual.size());
    for (Eigen::Index i = 0; i < direct.size(); ++i)
      REQUIRE(direct(i) == manual(i));
  }
}

TEST_CASE("error decomposition identities", "[nlms]") {
  SECTION("initial rows: u0 = -theta(0), v0 = w0 = 0") {
    const ClosedFormCurve c = poly_curve({{0.4, 0.3}, {-0.1, 0.05}});
    const TvarPath p = simulate(c, 60, gaussian_spec(), 12);
    const ErrorDecomposition dec = error_decomposition(p, 0.1, c);
    REQUIRE(dec.u_row(0)[0] == -0.4);
    REQUIRE(dec.u_row(0)[1] == 0.1);
    REQUIRE(dec.v_row(0)[0] == 0.0);
    REQUIRE(dec.w_row(0)[0] == 0.0);
  }

  SECTION("the three parts sum to the estimation error exactly") {
    const ClosedFormCurve c = poly_curve({{0.4, 0.3}, {-0.1, 0.05}});
    const TvarPath p = simulate(c, 200, gaussian_spec(), 12);
    const double mu = 0.1;
    const ErrorDecomposition dec = error_decomposition(p, mu, c);
    const NlmsTrajectory traj = nlms_run(p, mu);
    double worst = 0.0;
    Eigen::VectorXd th(2);
    for (long k = 0; k <= 200; ++k) {
      c.eval_theta(static_cast<double>(k) / 200.0, th.data());
      for (int i = 0; i < 2; ++i) {
        const double delta = traj.row(k)[i] - th(i);
        const double sum =
            dec.u_row(k)[i] + dec.v_row(k)[i] + dec.w_row(k)[i];
        worst = std::max(worst, std::abs(sum - delta));
      }
    }
    REQUIRE(worst <= 1e-12);
  }

  SECTION("constant curve: the drift part vanishes identically") {
    const ClosedFormCurve c = poly_curve({{0.5}, {-0.2}});
    const TvarPath p = simulate(c, 150, gaussian_spec(), 4);
    const ErrorDecomposition dec = error_decomposition(p, 0.15, c);
    for (long k = 0; k <= 150; ++k) {
      REQUIRE(dec.w_row(k)[0] == 0.0);
      REQUIRE(dec.w_row(k)[1] == 0.0);
    }
  }

  SECTION("noise-free path: the noise part vanishes identically") {
    const ClosedFormCurve c = poly_curve({{0.6}});
    const TvarPath p = geometric_path(0.6, 1.0, 40);
    REQUIRE(replay_max_abs_diff(c, p) == 0.0);
    const double mu = 0.3;
    const ErrorDecomposition dec = error_decomposition(p, mu, c);
    for (long k = 0; k <= 40; ++k) REQUIRE(dec.v_row(k)[0] == 0.0);

    SECTION("transient follows the scalar product formula") {
      // u_{k+1} = u_k / (1 + mu X_k^2) for d=1.
      double expected = -0.6;
      double x = 1.0;  // X_0
      for (long k = 0; k <= 40; ++k) {
        REQUIRE(dec.u_row(k)[0] == Approx(expected).epsilon(1e-12));
        expected /= 1.0 + mu * x * x;
        if (k < 40) x = p.samples[static_cast<std::size_t>(k)];
      }
    }

    SECTION("with v = w = 0 the transient is the whole error") {
      const NlmsTrajectory traj = nlms_run(p, mu);
      for (long k = 0; k <= 40; ++k) {
        REQUIRE(dec.u_row(k)[0] ==
                Approx(traj.row(k)[0] - 0.6).margin(1e-12));
      }
    }
  }

  SECTION("identity holds across random stable curves and step sizes") {
    rng::Xoshiro256pp gen(927);
    for (int rep = 0; rep < 20; ++rep) {
      const int d = 1 + static_cast<int>(gen.next() % 4);
      const double inner = stability_ball_bounds(0.9, d).inner_radius;
      // Linear coordinates with |a| + |b| <= 0.9 inner keep the curve well
      // inside the stability class for every t.
      Eigen::VectorXd a(d), b(d);
      double norm_sum = 0.0;
      for (int i = 0; i < d; ++i) {
        a(i) = 2.0 * gen.uniform01() - 1.0;
        b(i) = 2.0 * gen.uniform01() - 1.0;
        norm_sum += std::abs(a(i)) + std::abs(b(i));
      }
      const double scale = 0.9 * inner / std::max(norm_sum, 1e-12);
      std::vector<std::vector<double>> coeffs(d);
      for (int i = 0; i < d; ++i)
        coeffs[i] = {a(i) * scale, b(i) * scale};
      const ClosedFormCurve c =
          poly_curve(std::move(coeffs), 0.5 + gen.uniform01());
      const long n = 50 + static_cast<long>(gen.next() % 350);
      const double mu = 0.01 + 0.49 * gen.uniform01();
      const TvarPath p = simulate(c, n, gaussian_spec(), 5000 + rep);
      const ErrorDecomposition dec = error_decomposition(p, mu, c);
      const NlmsTrajectory traj = nlms_run(p, mu);
      Eigen::VectorXd th(d);
      double worst = 0.0;
      for (long k = 0; k <= n; ++k) {
        c.eval_theta(static_cast<double>(k) / static_cast<double>(n),
                     th.data());
        for (int i = 0; i < d; ++i) {
          const double delta = traj.row(k)[i] - th(i);
          const double sum =
              dec.u_row(k)[i] + dec.v_row(k)[i] + dec.w_row(k)[i];
          worst = std::max(worst, std::abs(sum - delta));
        }
      }
      REQUIRE(worst <= 1e-12);
    }
  }

  SECTION("curve/path mismatch is rejected") {
    const ClosedFormCurve c = poly_curve({{0.4, 0.3}});
    const ClosedFormCurve other = poly_curve({{0.4}});
    const TvarPath p = simulate(c, 50, gaussian_spec(), 2);
    REQUIRE_THROWS_AS(error_decomposition(p, 0.1, other), ValidationError);
    REQUIRE_THROWS_AS(error_decomposition(p, 0.0, c), ValidationError);
  }
}
