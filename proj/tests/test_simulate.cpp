// Innovation sampling and path simulation: normalization of the innovation
// families, the exact recursion contract, seeding determinism, replay, and
// initial-condition semantics.

#include "simulate.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "errors.hpp"
#include "innovations.hpp"
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

}  // namespace

TEST_CASE("innovation families are normalized", "[innovations]") {
  SECTION("count zero draws an empty sequence") {
    REQUIRE(sample_innovations(gaussian_spec(), 0, 7).empty());
  }

  SECTION("uniform support is [-sqrt(3), sqrt(3)] with unit variance") {
    InnovationSpec s;
    s.family = InnovationFamily::Uniform;
    const auto draws = sample_innovations(s, 20000, 11);
    const double bound = std::sqrt(3.0);
    double sum = 0.0, sumsq = 0.0;
    for (double x : draws) {
      REQUIRE(std::abs(x) <= bound);
      sum += x;
      sumsq += x * x;
    }
    const double mean = sum / draws.size();
    REQUIRE(mean == Approx(0.0).margin(0.03));
    REQUIRE(sumsq / draws.size() - mean * mean == Approx(1.0).margin(0.03));
  }

  SECTION("gaussian moments at one million draws") {
    const auto draws = sample_innovations(gaussian_spec(), 1000000, 13);
    double sum = 0.0, sumsq = 0.0;
    for (double x : draws) {
      sum += x;
      sumsq += x * x;
    }
    const double mean = sum / draws.size();
    const double var = sumsq / draws.size() - mean * mean;
    REQUIRE(std::abs(mean) < 4e-3);        // 4 sigma at n = 10^6
    REQUIRE(std::abs(var - 1.0) < 1e-2);
  }

  SECTION("student-t is scaled to unit variance") {
    InnovationSpec s;
    s.family = InnovationFamily::StudentT;
    s.moment_order = 4.0;
    s.df = 8.0;
    const auto draws = sample_innovations(s, 200000, 17);
    double sum = 0.0, sumsq = 0.0;
    for (double x : draws) {
      sum += x;
      sumsq += x * x;
    }
    const double mean = sum / draws.size();
    REQUIRE(mean == Approx(0.0).margin(0.02));
    REQUIRE(sumsq / draws.size() - mean * mean == Approx(1.0).margin(0.03));
  }

  SECTION("spec validation") {
    InnovationSpec s;
    s.family = InnovationFamily::StudentT;
    s.moment_order = 4.0;
    s.df = 3.0;  // must exceed the declared moment order
    REQUIRE_THROWS_AS(s.validate(), ValidationError);

    s.df = 8.0;
    REQUIRE_NOTHROW(s.validate());

    InnovationSpec low = gaussian_spec();
    low.moment_order = 1.5;  // q >= 2 required
    REQUIRE_THROWS_AS(low.validate(), ValidationError);
  }

  SECTION("same stream seed, same draws") {
    const auto a = sample_innovations(gaussian_spec(), 64, 99);
    const auto b = sample_innovations(gaussian_spec(), 64, 99);
    REQUIRE(a == b);
    const auto c = sample_innovations(gaussian_spec(), 64, 100);
    REQUIRE(a != c);
  }
}

TEST_CASE("simulation follows the recursion exactly", "[simulate]") {
  SECTION("no autoregression: samples equal sigma times innovations") {
    const ClosedFormCurve c = poly_curve({{0.0}});
    const TvarPath p = simulate(c, 200, gaussian_spec(), 5);
    for (long k = 0; k < p.n; ++k)
      REQUIRE(p.samples[k] == p.innovations[k]);  // sigma = 1 exactly
  }

  SECTION("zero initial state: the first sample is pure innovation") {
    const ClosedFormCurve c = poly_curve({{0.4, 0.3}, {-0.1}});
    const TvarPath p = simulate(c, 50, gaussian_spec(), 21);
    REQUIRE(p.x0.norm() == 0.0);
    REQUIRE(p.samples[0] == p.innovations[0]);
  }

  SECTION("d=1 recomputation oracle") {
    const ClosedFormCurve c = poly_curve({{0.4, 0.3}}, 1.2);
    const long n = 200;
    const TvarPath p = simulate(c, n, gaussian_spec(), 31);
    double x_prev = 0.0;
    for (long k = 1; k <= n; ++k) {
      const double th = c.theta(static_cast<double>(k - 1) / n)(0);
      const double x =
          th * x_prev + c.sigma(static_cast<double>(k) / n) * p.innovations[k - 1];
      REQUIRE(p.samples[k - 1] == Approx(x).margin(1e-12));
      x_prev = p.samples[k - 1];
    }
  }

  SECTION("d=2 recomputation oracle with explicit start") {
    const ClosedFormCurve c = poly_curve({{0.5, 0.2}, {-0.3, 0.1}});
    const Eigen::VectorXd x0 = vec({2.0, -1.0});
    const long n = 150;
    const TvarPath p =
        simulate(c, n, gaussian_spec(), 41, InitKind::Explicit, &x0);
    REQUIRE(p.x0(0) == 2.0);
    REQUIRE(p.x0(1) == -1.0);
    double lag1 = x0(0), lag2 = x0(1);
    for (long k = 1; k <= n; ++k) {
      const Eigen::VectorXd th = c.theta(static_cast<double>(k - 1) / n);
      const double x = th(0) * lag1 + th(1) * lag2 + p.innovations[k - 1];
      REQUIRE(p.samples[k - 1] == Approx(x).margin(1e-12));
      lag2 = lag1;
      lag1 = p.samples[k - 1];
    }
  }

  SECTION("lag-vector reads") {
    const ClosedFormCurve c = poly_curve({{0.5}, {-0.2}});
    const Eigen::VectorXd x0 = vec({1.5, -0.5});
    const TvarPath p =
        simulate(c, 20, gaussian_spec(), 3, InitKind::Explicit, &x0);
    double out[2];
    p.state_at(0, out);
    REQUIRE(out[0] == 1.5);
    REQUIRE(out[1] == -0.5);
    p.state_at(1, out);  // straddles the start
    REQUIRE(out[0] == p.samples[0]);
    REQUIRE(out[1] == 1.5);
    p.state_at(5, out);
    REQUIRE(out[0] == p.samples[4]);
    REQUIRE(out[1] == p.samples[3]);
    REQUIRE_THROWS_AS(p.state_at(-1, out), ValidationError);
    REQUIRE_THROWS_AS(p.state_at(21, out), ValidationError);
  }
}

TEST_CASE("determinism and replay", "[simulate]") {
  const ClosedFormCurve c = poly_curve({{0.4, 0.3}});

  SECTION("same master seed reproduces the path bit for bit") {
    const TvarPath a = simulate(c, 300, gaussian_spec(), 77);
    const TvarPath b = simulate(c, 300, gaussian_spec(), 77);
    REQUIRE(a.samples == b.samples);
    REQUIRE(a.innovations == b.innovations);
    REQUIRE(a.seed == 77);
    REQUIRE(a.curve_id == c.id());
  }

  SECTION("different master seeds decorrelate") {
    const TvarPath a = simulate(c, 300, gaussian_spec(), 77);
    const TvarPath b = simulate(c, 300, gaussian_spec(), 78);
    REQUIRE(a.samples != b.samples);
  }

  SECTION("replay of an untampered path is exact") {
    const TvarPath p = simulate(c, 400, gaussian_spec(), 9);
    REQUIRE(replay_max_abs_diff(c, p) == 0.0);
  }

  SECTION("replay flags a tampered sample") {
    TvarPath p = simulate(c, 400, gaussian_spec(), 9);
    p.samples[200] += 1e-9;
    REQUIRE(replay_max_abs_diff(c, p) >= 1e-10);
  }

  SECTION("replay validates the curve/path pairing") {
    const TvarPath p = simulate(c, 50, gaussian_spec(), 9);
    const ClosedFormCurve other = poly_curve({{0.4, 0.3}, {-0.1}});
    REQUIRE_THROWS_AS(replay_max_abs_diff(other, p), ValidationError);

    TvarPath broken = p;
    broken.samples.pop_back();
    REQUIRE_THROWS_AS(replay_max_abs_diff(c, broken), ValidationError);
  }

  SECTION("an all-zero path replays as zero under any curve") {
    // Zero innovations with a zero start keep the recursion at zero
    // regardless of the scale curve; this is the noise-free degenerate case.
    TvarPath p;
    p.n = 100;
    p.d = 1;
    p.x0 = Eigen::VectorXd::Zero(1);
    p.samples.assign(100, 0.0);
    p.innovations.assign(100, 0.0);
    REQUIRE(replay_max_abs_diff(c, p) == 0.0);
  }
}

TEST_CASE("initial-condition semantics", "[simulate]") {
  SECTION("explicit init requires a matching x0") {
    const ClosedFormCurve c = poly_curve({{0.5}, {-0.2}});
    REQUIRE_THROWS_AS(simulate(c, 50, gaussian_spec(), 1, InitKind::Explicit),
                      ValidationError);
    const Eigen::VectorXd wrong = vec({1.0});
    REQUIRE_THROWS_AS(
        simulate(c, 50, gaussian_spec(), 1, InitKind::Explicit, &wrong),
        ValidationError);
  }

  SECTION("n must be positive") {
    const ClosedFormCurve c = poly_curve({{0.5}});
    REQUIRE_THROWS_AS(simulate(c, 0, gaussian_spec(), 1), ValidationError);
  }

  SECTION("stationary init matches the frozen-time variance") {
    const ClosedFormCurve c = poly_curve({{0.5}});
    const int reps = 4000;
    double sum = 0.0, sumsq = 0.0;
    for (int r = 0; r < reps; ++r) {
      const TvarPath p =
          simulate(c, 1, gaussian_spec(), 1000 + r, InitKind::StationaryAtZero);
      sum += p.x0(0);
      sumsq += p.x0(0) * p.x0(0);
    }
    const double mean = sum / reps;
    const double var = sumsq / reps - mean * mean;
    // Frozen-time AR(1) variance at t=0 is 1/(1-0.25) = 4/3.
    REQUIRE(mean == Approx(0.0).margin(0.08));
    REQUIRE(var == Approx(4.0 / 3.0).margin(0.13));
  }

  SECTION("stationary init needs a stable frozen start") {
    const ClosedFormCurve c = poly_curve({{1.1, -0.3}});  // radius 1.1 at t=0
    REQUIRE_THROWS_AS(
        simulate(c, 10, gaussian_spec(), 1, InitKind::StationaryAtZero),
        DomainError);
  }
}

TEST_CASE("doubling the scale curve doubles the path bitwise", "[simulate]") {
  const ClosedFormCurve a = poly_curve({{0.4, 0.3}}, 1.0);
  const ClosedFormCurve b = poly_curve({{0.4, 0.3}}, 2.0);
  const TvarPath pa = simulate(a, 500, gaussian_spec(), 123);
  const TvarPath pb = simulate(b, 500, gaussian_spec(), 123);
  REQUIRE(pa.innovations == pb.innovations);
  for (long k = 0; k < 500; ++k)
    REQUIRE(pb.samples[k] == 2.0 * pa.samples[k]);
}

TEST_CASE("replicate means vanish at fixed time", "[simulate]") {
  // Odd innovation symmetry forces E[X_k] = 0; checked at the canonical
  // 4-sigma Monte Carlo gate.
  const ClosedFormCurve c = poly_curve({{0.4, 0.3}});
  const int reps = 500;
  const long n = 100, k = 50;
  double sum = 0.0, sumsq = 0.0;
  for (int r = 0; r < reps; ++r) {
    const std::uint64_t seed = rng::mix_stream(424242, rng::kTagPath,
                                               static_cast<std::uint64_t>(r));
    const TvarPath p = simulate(c, n, gaussian_spec(), seed);
    const double x = p.samples[k - 1];
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / reps;
  const double sd = std::sqrt(sumsq / reps - mean * mean);
  REQUIRE(std::abs(mean) <= 4.0 * sd / std::sqrt(static_cast<double>(reps)));
}
