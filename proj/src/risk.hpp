#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "curve.hpp"
#include "innovations.hpp"
#include "nlms.hpp"
#include "simulate.hpp"

// Seeded Monte Carlo harness for the pointwise estimation risk.  Replicate r
// of a scenario simulates its path from mix_stream(master_seed, kTagPath, r),
// so two scenarios with the same master seed see identical paths (paired
// comparisons come for free) and replicate work units are independent.
// Aggregation runs sequentially in replicate order with compensated
// summation: reported numbers are byte-identical for any worker count.

namespace tvar {

enum class Estimator { Nlms, Romberg };

struct StepRule {
  enum class Kind { Fixed, Minimax };
  Kind kind = Kind::Fixed;
  double mu = 0.05;     // Fixed
  double alpha = 1.0;   // Minimax scale
  double beta = 1.0;    // Minimax smoothness

  // Fixed: mu.  Minimax: alpha * n^{-2 beta / (1 + 2 beta)}.
  double mu_for(long n) const;
  void validate() const;
};

// step_size_rule(n, beta, alpha) = alpha * n^{-2 beta/(1+2 beta)}.
double step_size_rule(long n, double beta, double alpha);

struct Scenario {
  std::shared_ptr<const ParamCurve> curve;
  InnovationSpec innovations;
  std::vector<long> n_values;
  std::vector<double> t_points;
  StepRule step;
  Estimator estimator = Estimator::Nlms;
  double gamma = 0.5;  // Romberg second step-size factor, in (0,1)
  long replicates = 200;
  std::uint64_t master_seed = 1;
  InitKind init = InitKind::Zero;
  Eigen::VectorXd x0;  // Explicit init only

  // When set, each replicate also runs the exact error decomposition and the
  // report carries the noise-cancelled bias estimator mean(delta_u + delta_w).
  // Dropping the pure-noise channel delta_v removes both its martingale
  // fluctuations and the O(mu) mean it acquires through the correlation
  // between the random gains and the noise state, so this channel resolves
  // the drift-induced bias decay far below the Monte Carlo noise floor of
  // the plain mean.
  bool collect_cancelled_bias = false;

  void validate() const;
};

struct RiskCell {
  long n = 0;
  double t = 0.0;
  double mu = 0.0;
  long replicates = 0;
  Eigen::VectorXd bias;      // mean(thetahat - theta(t))
  Eigen::VectorXd se_bias;   // sqrt(diag(cov)/R)
  Eigen::MatrixXd msem;      // mean(e e^T)
  Eigen::MatrixXd cov;       // unbiased sample covariance
  double l1_risk = 0.0;      // mean |e|
  double l2_risk = 0.0;      // sqrt(mean |e|^2)
  double se_sqerr = 0.0;     // standard error of mean |e|^2
  Eigen::VectorXd bias_cancelled;     // empty unless collected
  Eigen::VectorXd se_bias_cancelled;  // empty unless collected
};

struct RiskReport {
  int d = 0;
  std::vector<RiskCell> cells;  // ordered by (n, t)

  const RiskCell& cell(long n, double t) const;
};

RiskReport monte_carlo_msem(const Scenario& scenario, int workers = 1);

// Least-squares fit of log(risk) against log(n).  Requires >= 4 points,
// positive risks, and an n-range spanning at least two octaves.
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

RateFit rate_fit(const std::vector<double>& n_values,
                 const std::vector<double>& risks);

// Deterministic drift-bias oracle: the frozen-coefficient recursion
//   J_0 = 0,  J_{j+1} = (I - mu Sigma([tn]/n)) J_j + (theta(j/n) - theta((j+1)/n)),
// evaluated up to j = [tn]-1.  This is the exact leading drift term of the
// error decomposition with the random contraction replaced by its frozen
// mean, and is noise-free.
Eigen::VectorXd deterministic_bias_oracle(const ParamCurve& curve, double mu,
                                          long n, double t);

// Local-to-drift bias prediction: Gamma(beta+1) (mu n)^{-beta}
// Sigma(t)^{-beta} theta_{t,beta}.
Eigen::VectorXd predicted_bias(const ParamCurve& curve, double mu, long n,
                               double t, double beta,
                               const Eigen::VectorXd& theta_t_beta);

struct ExpansionCell {
  long n = 0;
  double t = 0.0;
  double mu = 0.0;
  Eigen::VectorXd emp_bias, se_bias, pred_bias;
  double bias_gap = 0.0;       // |emp - pred|_2
  bool bias_within_3se = false;  // per-coordinate |emp_i - pred_i| <= 3 se_i
  double cov_gap = 0.0;        // opnorm(cov - (mu sigma^2(t)/2) I)
  double cov_scale = 0.0;      // mu sigma^2(t)/2
  // Predicted remainder scales, reported rather than asserted:
  double term_mu = 0.0;        // mu
  double term_cross = 0.0;     // sqrt(mu) (mu n)^{-beta}
  double term_lag2 = 0.0;      // (mu n)^{-2 beta}
};

struct ExpansionReport {
  double beta = 0.0;
  std::vector<ExpansionCell> cells;
};

// Checks the risk expansion: empirical bias against the predicted leading
// bias (theta_t_beta defaults to -theta_dot(t) when beta = 1 and the curve
// registers a derivative) and empirical covariance against mu sigma^2(t)/2 I.
ExpansionReport msem_expansion_check(
    const Scenario& scenario, double beta,
    const std::optional<Eigen::VectorXd>& theta_t_beta = std::nullopt,
    int workers = 1);

struct CenteredRiskCell {
  long n = 0;
  double t = 0.0;
  double mu = 0.0;
  double centered_risk = 0.0;    // Lp risk of e + (mu n)^{-1} Sigma^{-1} theta_dot
  double uncentered_risk = 0.0;  // Lp risk of e
};

// Centered-moment check of the first-order expansion; requires a registered
// derivative.  p in {1, 2}.
std::vector<CenteredRiskCell> centered_risk_residual(const Scenario& scenario, double p,
                                            int workers = 1);

struct CompareCell {
  long n = 0;
  double t = 0.0;
  double mu = 0.0;
  double gamma = 0.0;
  double l1_nlms = 0.0, l1_romberg = 0.0;
  double l2_nlms = 0.0, l2_romberg = 0.0;
  double ratio = 0.0;     // l2_romberg / l2_nlms
  double se_ratio = 0.0;  // delta-method standard error of the ratio
};

struct CompareReport {
  std::vector<CompareCell> cells;
};

// Paired comparison: both estimators read the same replicate paths.
CompareReport compare_estimators(const Scenario& scenario, int workers = 1);

}  // namespace tvar
