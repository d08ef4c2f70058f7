#include "risk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <thread>

#include "errors.hpp"
#include "local_stationary.hpp"
#include "matrix_utils.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace tvar {

namespace {

int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

double step_size_rule(long n, double beta, double alpha) {
  if (n < 1) throw ValidationError("step_size_rule: n must be >= 1");
  if (!(alpha > 0.0)) throw ValidationError("step_size_rule: alpha must be > 0");
  if (!(beta > 0.0)) throw ValidationError("step_size_rule: beta must be > 0");
  return alpha * std::pow(static_cast<double>(n), -2.0 * beta / (1.0 + 2.0 * beta));
}

double StepRule::mu_for(long n) const {
  validate();
  if (kind == Kind::Fixed) return mu;
  return step_size_rule(n, beta, alpha);
}

void StepRule::validate() const {
  if (kind == Kind::Fixed) {
    if (!(mu > 0.0)) throw ValidationError("StepRule: fixed mu must be > 0");
  } else {
    if (!(alpha > 0.0)) throw ValidationError("StepRule: alpha must be > 0");
    if (!(beta > 0.0)) throw ValidationError("StepRule: beta must be > 0");
  }
}

void Scenario::validate() const {
  if (!curve) throw ValidationError("Scenario: curve must be set");
  innovations.validate();
  step.validate();
  if (n_values.empty()) throw ValidationError("Scenario: n_values must be non-empty");
  for (long n : n_values)
    if (n < 10) throw ValidationError("Scenario: every n must be >= 10");
  if (t_points.empty()) throw ValidationError("Scenario: t_points must be non-empty");
  for (double t : t_points)
    if (!(t > 0.0) || !(t <= 1.0))
      throw ValidationError("Scenario: every t must lie in (0, 1]");
  if (!(gamma > 0.0) || !(gamma < 1.0))
    throw ValidationError("Scenario: gamma must lie in (0, 1)");
  if (replicates < 2) throw ValidationError("Scenario: replicates must be >= 2");
  if (init == InitKind::Explicit &&
      x0.size() != static_cast<Eigen::Index>(curve->order()))
    throw ValidationError("Scenario: explicit x0 must have length d");
}

const RiskCell& RiskReport::cell(long n, double t) const {
  for (const RiskCell& c : cells)
    if (c.n == n && std::abs(c.t - t) <= 1e-12) return c;
  throw ValidationError("RiskReport::cell: no cell for requested (n, t)");
}

namespace {

// Per-n replicate slot table.  Errors land in replicate-indexed slots during
// the (possibly parallel) fill; every statistic is then reduced sequentially
// in replicate order, so results do not depend on the worker count.
struct SlotData {
  long n = 0;
  double mu = 0.0;
  int d = 0;
  long reps = 0;
  std::vector<long> idx;                     // pointwise index per t
  std::vector<Eigen::VectorXd> theta_true;   // theta(t) per t
  std::vector<double> e_nlms;                // ((r*T)+ti)*d + i
  std::vector<double> e_rom;                 // same layout; empty unless needed
  std::vector<double> nc;                    // noise-cancelled errors; optional

  std::size_t slot(long r, std::size_t ti) const {
    return ((static_cast<std::size_t>(r) * idx.size()) + ti) *
           static_cast<std::size_t>(d);
  }
};

SlotData run_slots(const Scenario& s, long n, bool need_rom, bool need_nc,
                   int workers) {
  const ParamCurve& curve = *s.curve;
  const int d = curve.order();
  const std::size_t T = s.t_points.size();

  SlotData out;
  out.n = n;
  out.mu = s.step.mu_for(n);
  out.d = d;
  out.reps = s.replicates;
  out.idx.resize(T);
  out.theta_true.reserve(T);
  for (std::size_t ti = 0; ti < T; ++ti) {
    out.idx[ti] = pointwise_index(s.t_points[ti], n);
    out.theta_true.push_back(curve.theta(s.t_points[ti]));
  }
  const std::size_t total = static_cast<std::size_t>(s.replicates) * T *
                            static_cast<std::size_t>(d);
  out.e_nlms.assign(total, 0.0);
  if (need_rom) out.e_rom.assign(total, 0.0);
  if (need_nc) out.nc.assign(total, 0.0);

  const Eigen::VectorXd* x0p = s.init == InitKind::Explicit ? &s.x0 : nullptr;
  const double mu = out.mu;
  const double gmu = s.gamma * mu;
  const bool rom_primary = s.estimator == Estimator::Romberg;

  parallel_for(s.replicates, workers, [&](long r) {
    const std::uint64_t path_seed = rng::mix_stream(
        s.master_seed, rng::kTagPath, static_cast<std::uint64_t>(r));
    const TvarPath path = simulate(curve, n, s.innovations, path_seed, s.init, x0p);
    const NlmsTrajectory traj = nlms_run(path, mu);
    NlmsTrajectory traj_g;
    if (need_rom) traj_g = nlms_run(path, gmu);
    ErrorDecomposition dec, dec_g;
    if (need_nc) {
      dec = error_decomposition(path, mu, curve);
      if (rom_primary) dec_g = error_decomposition(path, gmu, curve);
    }
    for (std::size_t ti = 0; ti < T; ++ti) {
      const long k = out.idx[ti];
      const double* est = traj.row(k);
      const Eigen::VectorXd& th = out.theta_true[ti];
      double* e1 = &out.e_nlms[out.slot(r, ti)];
      for (int i = 0; i < d; ++i) e1[i] = est[i] - th(i);
      if (need_rom) {
        const double* estg = traj_g.row(k);
        double* e2 = &out.e_rom[out.slot(r, ti)];
        for (int i = 0; i < d; ++i)
          e2[i] = (est[i] - s.gamma * estg[i]) / (1.0 - s.gamma) - th(i);
      }
      if (need_nc) {
        double* nc = &out.nc[out.slot(r, ti)];
        const double* u = dec.u_row(k);
        const double* w = dec.w_row(k);
        if (!rom_primary) {
          for (int i = 0; i < d; ++i) nc[i] = u[i] + w[i];
        } else {
          const double* ug = dec_g.u_row(k);
          const double* wg = dec_g.w_row(k);
          for (int i = 0; i < d; ++i)
            nc[i] = ((u[i] + w[i]) - s.gamma * (ug[i] + wg[i])) / (1.0 - s.gamma);
        }
      }
    }
  });
  return out;
}

RiskCell aggregate_cell(const SlotData& sd, const std::vector<double>& prim,
                        const std::vector<double>* ncp, std::size_t ti) {
  const int d = sd.d;
  const long R = sd.reps;
  std::vector<KahanAcc> sum_e(d), sum_ee(static_cast<std::size_t>(d) * d);
  std::vector<KahanAcc> sum_nc, sum_nc2;
  if (ncp != nullptr) {
    sum_nc.resize(d);
    sum_nc2.resize(d);
  }
  KahanAcc sum_abs, sum_sq, sum_sq2;
  for (long r = 0; r < R; ++r) {
    const double* e = &prim[sd.slot(r, ti)];
    double norm2 = 0.0;
    for (int i = 0; i < d; ++i) {
      sum_e[i].add(e[i]);
      norm2 += e[i] * e[i];
      for (int j = 0; j < d; ++j) sum_ee[static_cast<std::size_t>(i) * d + j].add(e[i] * e[j]);
    }
    sum_abs.add(std::sqrt(norm2));
    sum_sq.add(norm2);
    sum_sq2.add(norm2 * norm2);
    if (ncp != nullptr) {
      const double* c = &(*ncp)[sd.slot(r, ti)];
      for (int i = 0; i < d; ++i) {
        sum_nc[i].add(c[i]);
        sum_nc2[i].add(c[i] * c[i]);
      }
    }
  }
  const double rr = static_cast<double>(R);
  RiskCell cell;
  cell.n = sd.n;
  cell.mu = sd.mu;
  cell.replicates = R;
  cell.bias.resize(d);
  cell.se_bias.resize(d);
  cell.msem.resize(d, d);
  cell.cov.resize(d, d);
  for (int i = 0; i < d; ++i) cell.bias(i) = sum_e[i].get() / rr;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      cell.msem(i, j) = sum_ee[static_cast<std::size_t>(i) * d + j].get() / rr;
  cell.cov = rr / (rr - 1.0) * (cell.msem - cell.bias * cell.bias.transpose());
  for (int i = 0; i < d; ++i)
    cell.se_bias(i) = std::sqrt(std::max(cell.cov(i, i), 0.0) / rr);
  cell.l1_risk = sum_abs.get() / rr;
  const double m2 = sum_sq.get() / rr;
  cell.l2_risk = std::sqrt(std::max(m2, 0.0));
  const double var_sq = std::max(sum_sq2.get() / rr - m2 * m2, 0.0) * rr / (rr - 1.0);
  cell.se_sqerr = std::sqrt(var_sq / rr);
  if (ncp != nullptr) {
    cell.bias_cancelled.resize(d);
    cell.se_bias_cancelled.resize(d);
    for (int i = 0; i < d; ++i) {
      const double m = sum_nc[i].get() / rr;
      const double var =
          std::max(sum_nc2[i].get() / rr - m * m, 0.0) * rr / (rr - 1.0);
      cell.bias_cancelled(i) = m;
      cell.se_bias_cancelled(i) = std::sqrt(var / rr);
    }
  }
  return cell;
}

}  // namespace

RiskReport monte_carlo_msem(const Scenario& scenario, int workers) {
  scenario.validate();
  const int w = resolve_workers(workers);
  const bool rom = scenario.estimator == Estimator::Romberg;
  RiskReport report;
  report.d = scenario.curve->order();
  for (long n : scenario.n_values) {
    const SlotData sd =
        run_slots(scenario, n, rom, scenario.collect_cancelled_bias, w);
    const std::vector<double>& prim = rom ? sd.e_rom : sd.e_nlms;
    const std::vector<double>* ncp =
        scenario.collect_cancelled_bias ? &sd.nc : nullptr;
    for (std::size_t ti = 0; ti < scenario.t_points.size(); ++ti) {
      RiskCell cell = aggregate_cell(sd, prim, ncp, ti);
      cell.t = scenario.t_points[ti];
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

RateFit rate_fit(const std::vector<double>& n_values,
                 const std::vector<double>& risks) {
  if (n_values.size() != risks.size())
    throw ValidationError("rate_fit: n_values and risks must have equal length");
  if (n_values.size() < 4)
    throw ValidationError("rate_fit: need at least 4 points");
  double n_min = n_values.front(), n_max = n_values.front();
  for (double n : n_values) {
    if (!(n > 0.0)) throw ValidationError("rate_fit: n values must be > 0");
    n_min = std::min(n_min, n);
    n_max = std::max(n_max, n);
  }
  for (double r : risks)
    if (!(r > 0.0)) throw ValidationError("rate_fit: risks must be > 0");
  if (n_max < 4.0 * n_min)
    throw ValidationError("rate_fit: n range must span at least two octaves");

  const std::size_t m = n_values.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += std::log(n_values[i]);
    my += std::log(risks[i]);
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dx = std::log(n_values[i]) - mx;
    const double dy = std::log(risks[i]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy <= 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

Eigen::VectorXd deterministic_bias_oracle(const ParamCurve& curve, double mu,
                                          long n, double t) {
  if (!(mu > 0.0)) throw ValidationError("deterministic_bias_oracle: mu must be > 0");
  if (n < 1) throw ValidationError("deterministic_bias_oracle: n must be >= 1");
  const long m = pointwise_index(t, n);
  const int d = curve.order();
  const double inv_n = 1.0 / static_cast<double>(n);
  const Eigen::MatrixXd sigma_frozen =
      local_covariance_at(curve, static_cast<double>(m) * inv_n,
                          CovarianceMethod::YuleWalker)
          .matrix;
  const Eigen::MatrixXd a =
      Eigen::MatrixXd::Identity(d, d) - mu * sigma_frozen;
  Eigen::VectorXd j = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd th_now(d), th_next(d);
  curve.eval_theta(0.0, th_now.data());
  for (long k = 0; k < m; ++k) {
    curve.eval_theta(static_cast<double>(k + 1) * inv_n, th_next.data());
    j = a * j + (th_now - th_next);
    th_now.swap(th_next);
  }
  return j;
}

Eigen::VectorXd predicted_bias(const ParamCurve& curve, double mu, long n,
                               double t, double beta,
                               const Eigen::VectorXd& theta_t_beta) {
  if (!(mu > 0.0)) throw ValidationError("predicted_bias: mu must be > 0");
  if (n < 1) throw ValidationError("predicted_bias: n must be >= 1");
  if (!(beta > 0.0) || !(beta <= 2.0))
    throw ValidationError("predicted_bias: beta must lie in (0, 2]");
  if (theta_t_beta.size() != static_cast<Eigen::Index>(curve.order()))
    throw ValidationError("predicted_bias: theta_t_beta must have length d");
  const Eigen::MatrixXd sigma =
      local_covariance_at(curve, t, CovarianceMethod::YuleWalker).matrix;
  const Eigen::MatrixXd sigma_neg_beta = fractional_power_sym(sigma, -beta);
  const double scale =
      std::tgamma(beta + 1.0) *
      std::pow(mu * static_cast<double>(n), -beta);
  return scale * (sigma_neg_beta * theta_t_beta);
}

ExpansionReport msem_expansion_check(
    const Scenario& scenario, double beta,
    const std::optional<Eigen::VectorXd>& theta_t_beta, int workers) {
  scenario.validate();
  if (!(beta > 0.0) || !(beta <= 2.0))
    throw ValidationError("msem_expansion_check: beta must lie in (0, 2]");
  const ParamCurve& curve = *scenario.curve;
  const int d = curve.order();
  if (theta_t_beta.has_value()) {
    if (theta_t_beta->size() != static_cast<Eigen::Index>(d))
      throw ValidationError("msem_expansion_check: theta_t_beta must have length d");
    if (scenario.t_points.size() > 1)
      throw ValidationError(
          "msem_expansion_check: explicit theta_t_beta requires a single t");
  } else {
    if (beta != 1.0)
      throw ValidationError(
          "msem_expansion_check: theta_t_beta required when beta != 1");
    if (!curve.has_derivative())
      throw ValidationError(
          "msem_expansion_check: curve supplies no derivative; "
          "pass theta_t_beta explicitly");
  }

  const RiskReport risk = monte_carlo_msem(scenario, workers);
  ExpansionReport report;
  report.beta = beta;
  for (const RiskCell& cell : risk.cells) {
    ExpansionCell ec;
    ec.n = cell.n;
    ec.t = cell.t;
    ec.mu = cell.mu;
    ec.emp_bias = cell.bias;
    ec.se_bias = cell.se_bias;
    const Eigen::VectorXd ttb =
        theta_t_beta.has_value() ? *theta_t_beta
                                 : Eigen::VectorXd(-curve.theta_dot(cell.t));
    ec.pred_bias = predicted_bias(curve, cell.mu, cell.n, cell.t, beta, ttb);
    ec.bias_gap = (ec.emp_bias - ec.pred_bias).norm();
    ec.bias_within_3se = true;
    for (int i = 0; i < d; ++i)
      if (std::abs(ec.emp_bias(i) - ec.pred_bias(i)) > 3.0 * ec.se_bias(i))
        ec.bias_within_3se = false;
    const double sig = curve.sigma(cell.t);
    ec.cov_scale = cell.mu * sig * sig / 2.0;
    ec.cov_gap = sym_operator_norm(
        cell.cov - ec.cov_scale * Eigen::MatrixXd::Identity(d, d));
    const double mun = cell.mu * static_cast<double>(cell.n);
    ec.term_mu = cell.mu;
    ec.term_cross = std::sqrt(cell.mu) * std::pow(mun, -beta);
    ec.term_lag2 = std::pow(mun, -2.0 * beta);
    report.cells.push_back(std::move(ec));
  }
  return report;
}

std::vector<CenteredRiskCell> centered_risk_residual(const Scenario& scenario, double p,
                                            int workers) {
  scenario.validate();
  if (p != 1.0 && p != 2.0)
    throw ValidationError("centered_risk_residual: p must be 1 or 2");
  const ParamCurve& curve = *scenario.curve;
  if (!curve.has_derivative())
    throw ValidationError("centered_risk_residual: curve supplies no derivative");
  const int w = resolve_workers(workers);
  const int d = curve.order();
  const bool rom = scenario.estimator == Estimator::Romberg;
  const std::size_t T = scenario.t_points.size();

  std::vector<CenteredRiskCell> cells;
  for (long n : scenario.n_values) {
    const SlotData sd = run_slots(scenario, n, rom, false, w);
    const std::vector<double>& prim = rom ? sd.e_rom : sd.e_nlms;
    for (std::size_t ti = 0; ti < T; ++ti) {
      const double t = scenario.t_points[ti];
      const Eigen::MatrixXd sigma =
          local_covariance_at(curve, t, CovarianceMethod::YuleWalker).matrix;
      const Eigen::VectorXd center =
          (sigma.llt().solve(curve.theta_dot(t))) /
          (sd.mu * static_cast<double>(n));
      KahanAcc cen, unc;
      for (long r = 0; r < sd.reps; ++r) {
        const double* e = &prim[sd.slot(r, ti)];
        double nc2 = 0.0, nu2 = 0.0;
        for (int i = 0; i < d; ++i) {
          const double ci = e[i] + center(i);
          nc2 += ci * ci;
          nu2 += e[i] * e[i];
        }
        cen.add(p == 1.0 ? std::sqrt(nc2) : nc2);
        unc.add(p == 1.0 ? std::sqrt(nu2) : nu2);
      }
      const double rr = static_cast<double>(sd.reps);
      CenteredRiskCell cell;
      cell.n = n;
      cell.t = t;
      cell.mu = sd.mu;
      cell.centered_risk = p == 1.0 ? cen.get() / rr : std::sqrt(cen.get() / rr);
      cell.uncentered_risk = p == 1.0 ? unc.get() / rr : std::sqrt(unc.get() / rr);
      cells.push_back(cell);
    }
  }
  return cells;
}

CompareReport compare_estimators(const Scenario& scenario, int workers) {
  scenario.validate();
  const int w = resolve_workers(workers);
  const int d = scenario.curve->order();
  const std::size_t T = scenario.t_points.size();

  CompareReport report;
  for (long n : scenario.n_values) {
    const SlotData sd = run_slots(scenario, n, true, false, w);
    for (std::size_t ti = 0; ti < T; ++ti) {
      KahanAcc sa1, sb1, sa2, sb2, sa4, sb4, sab;
      for (long r = 0; r < sd.reps; ++r) {
        const double* ea = &sd.e_nlms[sd.slot(r, ti)];
        const double* eb = &sd.e_rom[sd.slot(r, ti)];
        double a = 0.0, b = 0.0;
        for (int i = 0; i < d; ++i) {
          a += ea[i] * ea[i];
          b += eb[i] * eb[i];
        }
        sa1.add(std::sqrt(a));
        sb1.add(std::sqrt(b));
        sa2.add(a);
        sb2.add(b);
        sa4.add(a * a);
        sb4.add(b * b);
        sab.add(a * b);
      }
      const double rr = static_cast<double>(sd.reps);
      const double ma = sa2.get() / rr;
      const double mb = sb2.get() / rr;
      CompareCell cell;
      cell.n = n;
      cell.t = scenario.t_points[ti];
      cell.mu = sd.mu;
      cell.gamma = scenario.gamma;
      cell.l1_nlms = sa1.get() / rr;
      cell.l1_romberg = sb1.get() / rr;
      cell.l2_nlms = std::sqrt(std::max(ma, 0.0));
      cell.l2_romberg = std::sqrt(std::max(mb, 0.0));
      if (ma > 0.0 && mb > 0.0) {
        const double g = mb / ma;
        // Delta-method variance of mb/ma from the replicate moments.
        const double bessel = rr / (rr - 1.0);
        const double var_ma = std::max(sa4.get() / rr - ma * ma, 0.0) * bessel / rr;
        const double var_mb = std::max(sb4.get() / rr - mb * mb, 0.0) * bessel / rr;
        const double cov_ab = (sab.get() / rr - ma * mb) * bessel / rr;
        const double var_g = std::max(
            (var_mb - 2.0 * g * cov_ab + g * g * var_ma) / (ma * ma), 0.0);
        cell.ratio = std::sqrt(g);
        cell.se_ratio = cell.ratio > 0.0 ? std::sqrt(var_g) / (2.0 * cell.ratio) : 0.0;
      }
      report.cells.push_back(cell);
    }
  }
  return report;
}

}  // namespace tvar
