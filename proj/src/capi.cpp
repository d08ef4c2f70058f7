#include "tvar/tvar.h"

#include <cstring>
#include <string>

#include "config.hpp"
#include "covariance_check.hpp"
#include "curve.hpp"
#include "errors.hpp"
#include "local_stationary.hpp"
#include "nlms.hpp"
#include "polynomial.hpp"
#include "risk.hpp"
#include "rng.hpp"
#include "runner.hpp"
#include "simulate.hpp"

// C ABI shim: every entry point converts exceptions to status codes and
// stores the message in a thread-local slot for tvar_last_error.

struct tvar_curve {
  std::shared_ptr<const tvar::ParamCurve> impl;
};
struct tvar_path {
  tvar::TvarPath impl;
};
struct tvar_trajectory {
  tvar::NlmsTrajectory impl;
};
struct tvar_decomposition {
  tvar::ErrorDecomposition impl;
};
struct tvar_scenario {
  tvar::Scenario impl;
};
struct tvar_risk_report {
  tvar::RiskReport impl;
};
struct tvar_expansion_report {
  tvar::ExpansionReport impl;
  int d = 0;
};
struct tvar_compare_report {
  tvar::CompareReport impl;
};
struct tvar_centered_report {
  std::vector<tvar::CenteredRiskCell> impl;
};

namespace {

thread_local std::string g_last_error;

int fail(int code, const std::string& message) {
  g_last_error = message;
  return code;
}

int require(bool ok, const char* message) {
  return ok ? TVAR_OK : fail(TVAR_ERR_INVALID_ARGUMENT, message);
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return TVAR_OK;
  } catch (const tvar::ValidationError& e) {
    return fail(TVAR_ERR_VALIDATION, e.what());
  } catch (const tvar::DomainError& e) {
    return fail(TVAR_ERR_DOMAIN, e.what());
  } catch (const tvar::IoError& e) {
    return fail(TVAR_ERR_IO, e.what());
  } catch (const tvar::NumericError& e) {
    return fail(TVAR_ERR_NUMERIC, e.what());
  } catch (const std::bad_alloc&) {
    return fail(TVAR_ERR_NUMERIC, "out of memory");
  } catch (const std::exception& e) {
    return fail(TVAR_ERR_NUMERIC, e.what());
  }
}

tvar::InnovationSpec make_innovation_spec(int family, double moment_order,
                                          double df) {
  tvar::InnovationSpec spec;
  switch (family) {
    case TVAR_INNOV_GAUSSIAN:
      spec.family = tvar::InnovationFamily::Gaussian;
      break;
    case TVAR_INNOV_UNIFORM:
      spec.family = tvar::InnovationFamily::Uniform;
      break;
    case TVAR_INNOV_STUDENT_T:
      spec.family = tvar::InnovationFamily::StudentT;
      break;
    default:
      throw tvar::ValidationError("unknown innovation family code");
  }
  spec.moment_order = moment_order;
  spec.df = df;
  spec.validate();
  return spec;
}

tvar::InitKind make_init_kind(int init_kind) {
  switch (init_kind) {
    case TVAR_INIT_ZERO: return tvar::InitKind::Zero;
    case TVAR_INIT_EXPLICIT: return tvar::InitKind::Explicit;
    case TVAR_INIT_STATIONARY: return tvar::InitKind::StationaryAtZero;
    default: throw tvar::ValidationError("unknown init kind code");
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void fill_risk_cell(const tvar::RiskCell& c, int d, tvar_risk_cell* out) {
  std::memset(out, 0, sizeof(*out));
  out->n = c.n;
  out->t = c.t;
  out->mu = c.mu;
  out->replicates = c.replicates;
  out->d = d;
  out->l1_risk = c.l1_risk;
  out->l2_risk = c.l2_risk;
  out->se_sqerr = c.se_sqerr;
  for (int i = 0; i < d; ++i) {
    out->bias[i] = c.bias(i);
    out->se_bias[i] = c.se_bias(i);
  }
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      out->msem[i * TVAR_MAX_ORDER + j] = c.msem(i, j);
      out->cov[i * TVAR_MAX_ORDER + j] = c.cov(i, j);
    }
  out->has_cancelled = static_cast<int>(c.bias_cancelled.size()) == d ? 1 : 0;
  if (out->has_cancelled)
    for (int i = 0; i < d; ++i) {
      out->bias_cancelled[i] = c.bias_cancelled(i);
      out->se_bias_cancelled[i] = c.se_bias_cancelled(i);
    }
}

}  // namespace

extern "C" {

const char* tvar_last_error(void) { return g_last_error.c_str(); }

const char* tvar_status_name(int status) {
  switch (status) {
    case TVAR_OK: return "ok";
    case TVAR_ERR_VALIDATION: return "validation";
    case TVAR_ERR_DOMAIN: return "domain";
    case TVAR_ERR_NUMERIC: return "numeric";
    case TVAR_ERR_IO: return "io";
    case TVAR_ERR_INVALID_ARGUMENT: return "invalid_argument";
    default: return "unknown";
  }
}

const char* tvar_version(void) { return "0.1.0"; }

void tvar_string_free(char* text) { delete[] text; }

uint64_t tvar_stream_seed(uint64_t master_seed, uint64_t tag, uint64_t index) {
  return tvar::rng::mix_stream(master_seed, tag, index);
}

/* ---- curves -------------------------------------------------------------- */

int tvar_curve_from_json(const char* json_text, tvar_curve** out) {
  if (int rc = require(json_text != nullptr && out != nullptr,
                       "tvar_curve_from_json: null argument"))
    return rc;
  return guarded([&] {
    auto curve = tvar::parse_curve_json(json_text);
    *out = new tvar_curve{std::move(curve)};
  });
}

void tvar_curve_free(tvar_curve* curve) { delete curve; }

int tvar_curve_order(const tvar_curve* curve, int* out) {
  if (int rc = require(curve != nullptr && out != nullptr,
                       "tvar_curve_order: null argument"))
    return rc;
  *out = curve->impl->order();
  return TVAR_OK;
}

int tvar_curve_eval_theta(const tvar_curve* curve, double t, double* out) {
  if (int rc = require(curve != nullptr && out != nullptr,
                       "tvar_curve_eval_theta: null argument"))
    return rc;
  return guarded([&] { curve->impl->eval_theta(t, out); });
}

int tvar_curve_eval_sigma(const tvar_curve* curve, double t, double* out) {
  if (int rc = require(curve != nullptr && out != nullptr,
                       "tvar_curve_eval_sigma: null argument"))
    return rc;
  return guarded([&] { *out = curve->impl->eval_sigma(t); });
}

int tvar_curve_realized_radius(const tvar_curve* curve, double* out) {
  if (int rc = require(curve != nullptr && out != nullptr,
                       "tvar_curve_realized_radius: null argument"))
    return rc;
  *out = curve->impl->realized_radius();
  return TVAR_OK;
}

int tvar_curve_stability_check(const tvar_curve* curve, double rho,
                               int grid_points, int* is_member,
                               double* worst_radius, double* worst_t) {
  if (int rc = require(curve != nullptr, "tvar_curve_stability_check: null curve"))
    return rc;
  return guarded([&] {
    const tvar::StabilityCheck check =
        tvar::check_stability_class(*curve->impl, rho, grid_points);
    if (is_member != nullptr) *is_member = check.is_member ? 1 : 0;
    if (worst_radius != nullptr) *worst_radius = check.worst_radius;
    if (worst_t != nullptr) *worst_t = check.worst_t;
  });
}

int tvar_curve_lipschitz_seminorm(const tvar_curve* curve, double beta,
                                  int grid_points, double* out) {
  if (int rc = require(curve != nullptr && out != nullptr,
                       "tvar_curve_lipschitz_seminorm: null argument"))
    return rc;
  return guarded(
      [&] { *out = tvar::lipschitz_seminorm(*curve->impl, beta, grid_points); });
}

int tvar_stability_ball_bounds(double rho, int d, double* inner, double* outer) {
  if (int rc = require(inner != nullptr && outer != nullptr,
                       "tvar_stability_ball_bounds: null argument"))
    return rc;
  return guarded([&] {
    const tvar::StabilityBallBounds bounds = tvar::stability_ball_bounds(rho, d);
    *inner = bounds.inner_radius;
    *outer = bounds.outer_radius;
  });
}

int tvar_curve_local_covariance(const tvar_curve* curve, double t, int method,
                                double* out) {
  if (int rc = require(curve != nullptr && out != nullptr,
                       "tvar_curve_local_covariance: null argument"))
    return rc;
  return guarded([&] {
    tvar::CovarianceMethod m;
    if (method == TVAR_COV_YULE_WALKER)
      m = tvar::CovarianceMethod::YuleWalker;
    else if (method == TVAR_COV_QUADRATURE)
      m = tvar::CovarianceMethod::Quadrature;
    else
      throw tvar::ValidationError("unknown covariance method code");
    const Eigen::MatrixXd cov =
        tvar::local_covariance_at(*curve->impl, t, m).matrix;
    const int d = curve->impl->order();
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) out[i * d + j] = cov(i, j);
  });
}

/* ---- frozen-coefficient helpers ------------------------------------------ */

int tvar_spectral_radius(const double* theta, int d, double* out) {
  if (int rc = require(theta != nullptr && out != nullptr,
                       "tvar_spectral_radius: null argument"))
    return rc;
  return guarded([&] {
    const Eigen::Map<const Eigen::VectorXd> th(theta, d);
    *out = tvar::spectral_radius(th);
  });
}

int tvar_spectral_density(const double* theta, int d, double sigma,
                          double lambda, double* out) {
  if (int rc = require(theta != nullptr && out != nullptr,
                       "tvar_spectral_density: null argument"))
    return rc;
  return guarded([&] {
    const Eigen::Map<const Eigen::VectorXd> th(theta, d);
    *out = tvar::local_spectral_density(th, sigma, lambda);
  });
}

int tvar_yule_walker_autocov(const double* theta, int d, double sigma,
                             int max_lag, double* out) {
  if (int rc = require(theta != nullptr && out != nullptr,
                       "tvar_yule_walker_autocov: null argument"))
    return rc;
  return guarded([&] {
    const Eigen::Map<const Eigen::VectorXd> th(theta, d);
    const Eigen::VectorXd gamma = tvar::yule_walker_autocov(th, sigma, max_lag);
    for (int k = 0; k <= max_lag; ++k) out[k] = gamma(k);
  });
}

/* ---- simulation ------------------------------------------------------------ */

int tvar_simulate(const tvar_curve* curve, int64_t n, int innovation_family,
                  double moment_order, double df, uint64_t master_seed,
                  int init_kind, const double* x0, tvar_path** out) {
  if (int rc = require(curve != nullptr && out != nullptr,
                       "tvar_simulate: null argument"))
    return rc;
  return guarded([&] {
    const tvar::InnovationSpec spec =
        make_innovation_spec(innovation_family, moment_order, df);
    const tvar::InitKind init = make_init_kind(init_kind);
    Eigen::VectorXd x0_vec;
    const Eigen::VectorXd* x0p = nullptr;
    if (init == tvar::InitKind::Explicit) {
      if (x0 == nullptr)
        throw tvar::ValidationError("explicit init requires x0");
      x0_vec = Eigen::Map<const Eigen::VectorXd>(x0, curve->impl->order());
      x0p = &x0_vec;
    }
    tvar::TvarPath path = tvar::simulate(*curve->impl, static_cast<long>(n),
                                         spec, master_seed, init, x0p);
    *out = new tvar_path{std::move(path)};
  });
}

void tvar_path_free(tvar_path* path) { delete path; }

int tvar_path_n(const tvar_path* path, int64_t* out) {
  if (int rc = require(path != nullptr && out != nullptr,
                       "tvar_path_n: null argument"))
    return rc;
  *out = path->impl.n;
  return TVAR_OK;
}

int tvar_path_order(const tvar_path* path, int* out) {
  if (int rc = require(path != nullptr && out != nullptr,
                       "tvar_path_order: null argument"))
    return rc;
  *out = path->impl.d;
  return TVAR_OK;
}

int tvar_path_samples(const tvar_path* path, double* out) {
  if (int rc = require(path != nullptr && out != nullptr,
                       "tvar_path_samples: null argument"))
    return rc;
  std::memcpy(out, path->impl.samples.data(),
              path->impl.samples.size() * sizeof(double));
  return TVAR_OK;
}

int tvar_path_innovations(const tvar_path* path, double* out) {
  if (int rc = require(path != nullptr && out != nullptr,
                       "tvar_path_innovations: null argument"))
    return rc;
  std::memcpy(out, path->impl.innovations.data(),
              path->impl.innovations.size() * sizeof(double));
  return TVAR_OK;
}

int tvar_path_x0(const tvar_path* path, double* out) {
  if (int rc = require(path != nullptr && out != nullptr,
                       "tvar_path_x0: null argument"))
    return rc;
  for (int i = 0; i < path->impl.d; ++i) out[i] = path->impl.x0(i);
  return TVAR_OK;
}

int tvar_path_replay_check(const tvar_path* path, const tvar_curve* curve,
                           double* out) {
  if (int rc = require(path != nullptr && curve != nullptr && out != nullptr,
                       "tvar_path_replay_check: null argument"))
    return rc;
  return guarded(
      [&] { *out = tvar::replay_max_abs_diff(*curve->impl, path->impl); });
}

/* ---- estimation ------------------------------------------------------------ */

int tvar_nlms_run(const tvar_path* path, double mu, tvar_trajectory** out) {
  if (int rc = require(path != nullptr && out != nullptr,
                       "tvar_nlms_run: null argument"))
    return rc;
  return guarded([&] {
    *out = new tvar_trajectory{tvar::nlms_run(path->impl, mu)};
  });
}

void tvar_trajectory_free(tvar_trajectory* trajectory) { delete trajectory; }

int tvar_trajectory_row(const tvar_trajectory* trajectory, int64_t k,
                        double* out) {
  if (int rc = require(trajectory != nullptr && out != nullptr,
                       "tvar_trajectory_row: null argument"))
    return rc;
  return guarded([&] {
    const Eigen::VectorXd row =
        trajectory->impl.estimate(static_cast<long>(k));
    for (int i = 0; i < trajectory->impl.d; ++i) out[i] = row(i);
  });
}

int tvar_pointwise_index(double t, int64_t n, int64_t* out) {
  if (int rc = require(out != nullptr, "tvar_pointwise_index: null argument"))
    return rc;
  return guarded(
      [&] { *out = tvar::pointwise_index(t, static_cast<long>(n)); });
}

int tvar_pointwise_estimate(const tvar_trajectory* trajectory, double t,
                            double* out) {
  if (int rc = require(trajectory != nullptr && out != nullptr,
                       "tvar_pointwise_estimate: null argument"))
    return rc;
  return guarded([&] {
    const Eigen::VectorXd est = tvar::pointwise_estimate(trajectory->impl, t);
    for (int i = 0; i < trajectory->impl.d; ++i) out[i] = est(i);
  });
}

int tvar_bias_corrected_estimate(const tvar_path* path, double mu,
                                 double gamma, double t, double* out) {
  if (int rc = require(path != nullptr && out != nullptr,
                       "tvar_bias_corrected_estimate: null argument"))
    return rc;
  return guarded([&] {
    const Eigen::VectorXd est =
        tvar::bias_corrected_estimate(path->impl, mu, gamma, t);
    for (int i = 0; i < path->impl.d; ++i) out[i] = est(i);
  });
}

int tvar_error_decomposition(const tvar_path* path, double mu,
                             const tvar_curve* curve,
                             tvar_decomposition** out) {
  if (int rc = require(path != nullptr && curve != nullptr && out != nullptr,
                       "tvar_error_decomposition: null argument"))
    return rc;
  return guarded([&] {
    *out = new tvar_decomposition{
        tvar::error_decomposition(path->impl, mu, *curve->impl)};
  });
}

void tvar_decomposition_free(tvar_decomposition* decomposition) {
  delete decomposition;
}

int tvar_decomposition_rows(const tvar_decomposition* decomposition, int64_t k,
                            double* u, double* v, double* w) {
  if (int rc = require(decomposition != nullptr,
                       "tvar_decomposition_rows: null decomposition"))
    return rc;
  const tvar::ErrorDecomposition& dec = decomposition->impl;
  if (k < 0 || k > dec.n)
    return fail(TVAR_ERR_VALIDATION, "tvar_decomposition_rows: k out of range");
  const long kk = static_cast<long>(k);
  for (int i = 0; i < dec.d; ++i) {
    if (u != nullptr) u[i] = dec.u_row(kk)[i];
    if (v != nullptr) v[i] = dec.v_row(kk)[i];
    if (w != nullptr) w[i] = dec.w_row(kk)[i];
  }
  return TVAR_OK;
}

/* ---- risk ------------------------------------------------------------------- */

int tvar_scenario_from_json(const char* json_text, uint64_t master_seed,
                            tvar_scenario** out) {
  if (int rc = require(json_text != nullptr && out != nullptr,
                       "tvar_scenario_from_json: null argument"))
    return rc;
  return guarded([&] {
    *out = new tvar_scenario{tvar::parse_scenario_json(json_text, master_seed)};
  });
}

void tvar_scenario_free(tvar_scenario* scenario) { delete scenario; }

int tvar_monte_carlo_msem(const tvar_scenario* scenario, int workers,
                          tvar_risk_report** out) {
  if (int rc = require(scenario != nullptr && out != nullptr,
                       "tvar_monte_carlo_msem: null argument"))
    return rc;
  return guarded([&] {
    *out = new tvar_risk_report{tvar::monte_carlo_msem(scenario->impl, workers)};
  });
}

void tvar_risk_report_free(tvar_risk_report* report) { delete report; }

int tvar_risk_report_cell_count(const tvar_risk_report* report, int64_t* out) {
  if (int rc = require(report != nullptr && out != nullptr,
                       "tvar_risk_report_cell_count: null argument"))
    return rc;
  *out = static_cast<int64_t>(report->impl.cells.size());
  return TVAR_OK;
}

int tvar_risk_report_cell(const tvar_risk_report* report, int64_t index,
                          tvar_risk_cell* out) {
  if (int rc = require(report != nullptr && out != nullptr,
                       "tvar_risk_report_cell: null argument"))
    return rc;
  if (index < 0 || index >= static_cast<int64_t>(report->impl.cells.size()))
    return fail(TVAR_ERR_VALIDATION, "tvar_risk_report_cell: index out of range");
  fill_risk_cell(report->impl.cells[static_cast<std::size_t>(index)],
                 report->impl.d, out);
  return TVAR_OK;
}

int tvar_rate_fit(const double* n_values, const double* risks, int64_t count,
                  double* slope, double* intercept, double* r_squared) {
  if (int rc = require(n_values != nullptr && risks != nullptr,
                       "tvar_rate_fit: null argument"))
    return rc;
  return guarded([&] {
    const std::vector<double> ns(n_values, n_values + count);
    const std::vector<double> rs(risks, risks + count);
    const tvar::RateFit fit = tvar::rate_fit(ns, rs);
    if (slope != nullptr) *slope = fit.slope;
    if (intercept != nullptr) *intercept = fit.intercept;
    if (r_squared != nullptr) *r_squared = fit.r_squared;
  });
}

int tvar_step_size_rule(int64_t n, double beta, double alpha, double* out) {
  if (int rc = require(out != nullptr, "tvar_step_size_rule: null argument"))
    return rc;
  return guarded([&] {
    *out = tvar::step_size_rule(static_cast<long>(n), beta, alpha);
  });
}

int tvar_deterministic_bias_oracle(const tvar_curve* curve, double mu,
                                   int64_t n, double t, double* out) {
  if (int rc = require(curve != nullptr && out != nullptr,
                       "tvar_deterministic_bias_oracle: null argument"))
    return rc;
  return guarded([&] {
    const Eigen::VectorXd j = tvar::deterministic_bias_oracle(
        *curve->impl, mu, static_cast<long>(n), t);
    for (int i = 0; i < curve->impl->order(); ++i) out[i] = j(i);
  });
}

int tvar_predicted_bias(const tvar_curve* curve, double mu, int64_t n,
                        double t, double beta, const double* theta_t_beta,
                        double* out) {
  if (int rc = require(curve != nullptr && theta_t_beta != nullptr &&
                           out != nullptr,
                       "tvar_predicted_bias: null argument"))
    return rc;
  return guarded([&] {
    const Eigen::Map<const Eigen::VectorXd> ttb(theta_t_beta,
                                                curve->impl->order());
    const Eigen::VectorXd pred = tvar::predicted_bias(
        *curve->impl, mu, static_cast<long>(n), t, beta, ttb);
    for (int i = 0; i < curve->impl->order(); ++i) out[i] = pred(i);
  });
}

int tvar_expansion_check(const tvar_scenario* scenario, double beta,
                         const double* theta_t_beta, int workers,
                         tvar_expansion_report** out) {
  if (int rc = require(scenario != nullptr && out != nullptr,
                       "tvar_expansion_check: null argument"))
    return rc;
  return guarded([&] {
    std::optional<Eigen::VectorXd> ttb;
    if (theta_t_beta != nullptr)
      ttb = Eigen::Map<const Eigen::VectorXd>(theta_t_beta,
                                              scenario->impl.curve->order());
    auto report = new tvar_expansion_report{
        tvar::msem_expansion_check(scenario->impl, beta, ttb, workers),
        scenario->impl.curve->order()};
    *out = report;
  });
}

void tvar_expansion_report_free(tvar_expansion_report* report) {
  delete report;
}

int tvar_expansion_report_cell_count(const tvar_expansion_report* report,
                                     int64_t* out) {
  if (int rc = require(report != nullptr && out != nullptr,
                       "tvar_expansion_report_cell_count: null argument"))
    return rc;
  *out = static_cast<int64_t>(report->impl.cells.size());
  return TVAR_OK;
}

int tvar_expansion_report_cell(const tvar_expansion_report* report,
                               int64_t index, tvar_expansion_cell* out) {
  if (int rc = require(report != nullptr && out != nullptr,
                       "tvar_expansion_report_cell: null argument"))
    return rc;
  if (index < 0 || index >= static_cast<int64_t>(report->impl.cells.size()))
    return fail(TVAR_ERR_VALIDATION,
                "tvar_expansion_report_cell: index out of range");
  const tvar::ExpansionCell& c =
      report->impl.cells[static_cast<std::size_t>(index)];
  std::memset(out, 0, sizeof(*out));
  out->n = c.n;
  out->t = c.t;
  out->mu = c.mu;
  out->d = report->d;
  out->bias_gap = c.bias_gap;
  out->bias_within_3se = c.bias_within_3se ? 1 : 0;
  out->cov_gap = c.cov_gap;
  out->cov_scale = c.cov_scale;
  out->term_mu = c.term_mu;
  out->term_cross = c.term_cross;
  out->term_lag2 = c.term_lag2;
  for (int i = 0; i < report->d; ++i) {
    out->emp_bias[i] = c.emp_bias(i);
    out->se_bias[i] = c.se_bias(i);
    out->pred_bias[i] = c.pred_bias(i);
  }
  return TVAR_OK;
}

int tvar_compare_estimators(const tvar_scenario* scenario, int workers,
                            tvar_compare_report** out) {
  if (int rc = require(scenario != nullptr && out != nullptr,
                       "tvar_compare_estimators: null argument"))
    return rc;
  return guarded([&] {
    *out = new tvar_compare_report{
        tvar::compare_estimators(scenario->impl, workers)};
  });
}

void tvar_compare_report_free(tvar_compare_report* report) { delete report; }

int tvar_compare_report_cell_count(const tvar_compare_report* report,
                                   int64_t* out) {
  if (int rc = require(report != nullptr && out != nullptr,
                       "tvar_compare_report_cell_count: null argument"))
    return rc;
  *out = static_cast<int64_t>(report->impl.cells.size());
  return TVAR_OK;
}

int tvar_compare_report_cell(const tvar_compare_report* report, int64_t index,
                             tvar_compare_cell* out) {
  if (int rc = require(report != nullptr && out != nullptr,
                       "tvar_compare_report_cell: null argument"))
    return rc;
  if (index < 0 || index >= static_cast<int64_t>(report->impl.cells.size()))
    return fail(TVAR_ERR_VALIDATION,
                "tvar_compare_report_cell: index out of range");
  const tvar::CompareCell& c =
      report->impl.cells[static_cast<std::size_t>(index)];
  out->n = c.n;
  out->t = c.t;
  out->mu = c.mu;
  out->gamma = c.gamma;
  out->l1_nlms = c.l1_nlms;
  out->l1_romberg = c.l1_romberg;
  out->l2_nlms = c.l2_nlms;
  out->l2_romberg = c.l2_romberg;
  out->ratio = c.ratio;
  out->se_ratio = c.se_ratio;
  return TVAR_OK;
}

int tvar_centered_residual(const tvar_scenario* scenario, double p,
                           int workers, tvar_centered_report** out) {
  if (int rc = require(scenario != nullptr && out != nullptr,
                       "tvar_centered_residual: null argument"))
    return rc;
  return guarded([&] {
    *out = new tvar_centered_report{
        tvar::centered_risk_residual(scenario->impl, p, workers)};
  });
}

void tvar_centered_report_free(tvar_centered_report* report) { delete report; }

int tvar_centered_report_cell_count(const tvar_centered_report* report,
                                    int64_t* out) {
  if (int rc = require(report != nullptr && out != nullptr,
                       "tvar_centered_report_cell_count: null argument"))
    return rc;
  *out = static_cast<int64_t>(report->impl.size());
  return TVAR_OK;
}

int tvar_centered_report_cell(const tvar_centered_report* report,
                              int64_t index, tvar_centered_cell* out) {
  if (int rc = require(report != nullptr && out != nullptr,
                       "tvar_centered_report_cell: null argument"))
    return rc;
  if (index < 0 || index >= static_cast<int64_t>(report->impl.size()))
    return fail(TVAR_ERR_VALIDATION,
                "tvar_centered_report_cell: index out of range");
  const tvar::CenteredRiskCell& c = report->impl[static_cast<std::size_t>(index)];
  out->n = c.n;
  out->t = c.t;
  out->mu = c.mu;
  out->centered_risk = c.centered_risk;
  out->uncentered_risk = c.uncentered_risk;
  return TVAR_OK;
}

int tvar_covariance_approx_error(const tvar_curve* curve,
                                 int innovation_family, double moment_order,
                                 double df, int64_t n, const int64_t* k_list,
                                 int64_t k_count, int64_t replicates,
                                 uint64_t seed, int init_kind,
                                 int second_moment_mode, int workers,
                                 double* deviations_out) {
  if (int rc = require(curve != nullptr && k_list != nullptr &&
                           deviations_out != nullptr,
                       "tvar_covariance_approx_error: null argument"))
    return rc;
  return guarded([&] {
    const tvar::InnovationSpec spec =
        make_innovation_spec(innovation_family, moment_order, df);
    tvar::SecondMomentMode mode;
    if (second_moment_mode == TVAR_SECOND_MOMENT_MONTE_CARLO)
      mode = tvar::SecondMomentMode::MonteCarlo;
    else if (second_moment_mode == TVAR_SECOND_MOMENT_EXACT)
      mode = tvar::SecondMomentMode::Exact;
    else
      throw tvar::ValidationError("unknown second-moment mode code");
    std::vector<long> ks;
    ks.reserve(static_cast<std::size_t>(k_count));
    for (int64_t i = 0; i < k_count; ++i)
      ks.push_back(static_cast<long>(k_list[i]));
    const tvar::CovarianceApproxResult result = tvar::covariance_approx_error(
        *curve->impl, spec, static_cast<long>(n), ks,
        static_cast<long>(replicates), seed, make_init_kind(init_kind), mode,
        workers);
    for (std::size_t i = 0; i < result.deviation.size(); ++i)
      deviations_out[i] = result.deviation[i];
  });
}

/* ---- runs --------------------------------------------------------------- */

int tvar_run(const char* config_text, const char* command_override,
             const char* output_dir_override, int has_seed_override,
             uint64_t seed_override, int has_workers_override,
             int workers_override, int has_emit_plots_override,
             int emit_plots_override, char** summary_out) {
  if (int rc = require(config_text != nullptr, "tvar_run: null config"))
    return rc;
  return guarded([&] {
    tvar::ConfigOverrides overrides;
    if (command_override != nullptr) overrides.command = command_override;
    if (output_dir_override != nullptr)
      overrides.output_dir = output_dir_override;
    if (has_seed_override != 0) overrides.seed = seed_override;
    if (has_workers_override != 0) overrides.workers = workers_override;
    if (has_emit_plots_override != 0)
      overrides.emit_plots = emit_plots_override != 0;
    const tvar::RunConfig config =
        tvar::load_run_config_text(config_text, overrides);
    const tvar::RunResult result = tvar::execute_run(config);
    if (summary_out != nullptr) *summary_out = dup_string(result.summary_text);
  });
}

int tvar_run_config_validate(const char* config_text, char** normalized_out) {
  if (int rc = require(config_text != nullptr,
                       "tvar_run_config_validate: null config"))
    return rc;
  return guarded([&] {
    const tvar::RunConfig config = tvar::load_run_config_text(config_text, {});
    if (normalized_out != nullptr)
      *normalized_out = dup_string(config.config_json);
  });
}

} /* extern "C" */
