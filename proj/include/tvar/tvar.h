#ifndef TVAR_TVAR_H
#define TVAR_TVAR_H

/*
 * C interface to the time-varying autoregression toolkit.
 *
 * Every function returns a status code (TVAR_OK on success); outputs travel
 * through pointer arguments.  On failure the thread-local message behind
 * tvar_last_error() describes what went wrong and output handles are left
 * untouched.  Handles are opaque and single-owner: whatever a *_from_* or
 * *_run constructor hands out must be released with the matching *_free.
 * Handles are safe to use from several threads only for concurrent reads.
 *
 * Determinism contract: all randomness derives from an explicit 64-bit
 * master seed through tagged stream derivation (tvar_stream_seed), so every
 * result is reproducible from (library version, configuration, seed) on any
 * machine and for any worker count.
 */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define TVAR_API

/* Maximum autoregressive order supported by the library. */
#define TVAR_MAX_ORDER 8

/* ---- status ------------------------------------------------------------ */

enum {
  TVAR_OK = 0,
  TVAR_ERR_VALIDATION = 1,       /* invalid argument or configuration */
  TVAR_ERR_DOMAIN = 2,           /* argument outside mathematical domain */
  TVAR_ERR_NUMERIC = 3,          /* computation failed to converge/finite */
  TVAR_ERR_IO = 4,               /* filesystem failure */
  TVAR_ERR_INVALID_ARGUMENT = 5, /* null pointer or malformed handle use */
};

/* Thread-local message for the most recent failure in this thread. */
TVAR_API const char* tvar_last_error(void);
TVAR_API const char* tvar_status_name(int status);
TVAR_API const char* tvar_version(void);

/* Frees strings returned through char** outputs. */
TVAR_API void tvar_string_free(char* text);

/* ---- seeding ------------------------------------------------------------ */

enum {
  TVAR_STREAM_INNOVATIONS = 1,
  TVAR_STREAM_INIT_STATE = 2,
  TVAR_STREAM_PATH = 3,
  TVAR_STREAM_SCENARIO = 4,
};

/* Derives the decorrelated stream seed for (master, tag, index). */
TVAR_API uint64_t tvar_stream_seed(uint64_t master_seed, uint64_t tag,
                                   uint64_t index);

/* ---- innovation families / init ----------------------------------------- */

enum {
  TVAR_INNOV_GAUSSIAN = 0,
  TVAR_INNOV_UNIFORM = 1,
  TVAR_INNOV_STUDENT_T = 2,
};

enum {
  TVAR_INIT_ZERO = 0,
  TVAR_INIT_EXPLICIT = 1,
  TVAR_INIT_STATIONARY = 2,
};

enum {
  TVAR_COV_YULE_WALKER = 0,
  TVAR_COV_QUADRATURE = 1,
};

enum {
  TVAR_SECOND_MOMENT_MONTE_CARLO = 0,
  TVAR_SECOND_MOMENT_EXACT = 1,
};

/* ---- opaque handles ------------------------------------------------------ */

typedef struct tvar_curve tvar_curve;
typedef struct tvar_path tvar_path;
typedef struct tvar_trajectory tvar_trajectory;
typedef struct tvar_decomposition tvar_decomposition;
typedef struct tvar_scenario tvar_scenario;
typedef struct tvar_risk_report tvar_risk_report;
typedef struct tvar_expansion_report tvar_expansion_report;
typedef struct tvar_compare_report tvar_compare_report;
typedef struct tvar_centered_report tvar_centered_report;

/* ---- parameter curves ----------------------------------------------------
 *
 * Curves come from JSON descriptions, e.g.
 *   {"kind":"closed_form","family":"poly","theta":[[0.4,0.3]],
 *    "sigma":{"kind":"constant","value":1.0},"beta":1.0}
 * (see the README for the full schema).
 */

TVAR_API int tvar_curve_from_json(const char* json_text, tvar_curve** out);
TVAR_API void tvar_curve_free(tvar_curve* curve);

TVAR_API int tvar_curve_order(const tvar_curve* curve, int* out);
/* theta(t) into out[0..d); t in [0,1]. */
TVAR_API int tvar_curve_eval_theta(const tvar_curve* curve, double t,
                                   double* out);
TVAR_API int tvar_curve_eval_sigma(const tvar_curve* curve, double t,
                                   double* out);
/* Supremum of the companion spectral radius over the construction grid. */
TVAR_API int tvar_curve_realized_radius(const tvar_curve* curve, double* out);

/* Grid certificate of membership in the stability class of radius rho. */
TVAR_API int tvar_curve_stability_check(const tvar_curve* curve, double rho,
                                        int grid_points, int* is_member,
                                        double* worst_radius, double* worst_t);
/* Hölder(beta) seminorm of t -> theta(t) over a grid. */
TVAR_API int tvar_curve_lipschitz_seminorm(const tvar_curve* curve,
                                           double beta, int grid_points,
                                           double* out);
/* Coefficient-space sandwich of the stability class:
 * the Euclidean ball of radius *inner lies inside, the class lies inside
 * the ball of radius *outer. */
TVAR_API int tvar_stability_ball_bounds(double rho, int d, double* inner,
                                double* outer);

/* d x d local (frozen-t) covariance, row-major into out[0..d*d). */
TVAR_API int tvar_curve_local_covariance(const tvar_curve* curve, double t,
                                         int method, double* out);

/* ---- frozen-coefficient spectral helpers --------------------------------- */

/* Largest companion-eigenvalue modulus of the coefficient vector. */
TVAR_API int tvar_spectral_radius(const double* theta, int d, double* out);
/* sigma^2 / (2 pi |theta(e^{i lambda})|^2). */
TVAR_API int tvar_spectral_density(const double* theta, int d, double sigma,
                                   double lambda, double* out);
/* Autocovariances gamma_0..gamma_max_lag into out[0..max_lag]. */
TVAR_API int tvar_yule_walker_autocov(const double* theta, int d, double sigma,
                                      int max_lag, double* out);

/* ---- simulation ----------------------------------------------------------- */

/* Simulates X_1..X_n.  x0 (length d) is read only for TVAR_INIT_EXPLICIT;
 * innovation family constants above; moment_order/df as in the README. */
TVAR_API int tvar_simulate(const tvar_curve* curve, int64_t n,
                           int innovation_family, double moment_order,
                           double df, uint64_t master_seed, int init_kind,
                           const double* x0, tvar_path** out);
TVAR_API void tvar_path_free(tvar_path* path);

TVAR_API int tvar_path_n(const tvar_path* path, int64_t* out);
TVAR_API int tvar_path_order(const tvar_path* path, int* out);
/* Copies X_1..X_n into out[0..n). */
TVAR_API int tvar_path_samples(const tvar_path* path, double* out);
/* Copies eps_1..eps_n into out[0..n). */
TVAR_API int tvar_path_innovations(const tvar_path* path, double* out);
/* Copies the initial lag vector (X_0, X_{-1}, ...) into out[0..d). */
TVAR_API int tvar_path_x0(const tvar_path* path, double* out);
/* Re-runs the recursion from x0 + innovations; max |replayed - stored|. */
TVAR_API int tvar_path_replay_check(const tvar_path* path,
                                    const tvar_curve* curve, double* out);

/* ---- estimation ----------------------------------------------------------- */

TVAR_API int tvar_nlms_run(const tvar_path* path, double mu,
                           tvar_trajectory** out);
TVAR_API void tvar_trajectory_free(tvar_trajectory* trajectory);
/* Estimate after k observations (k = 0..n) into out[0..d). */
TVAR_API int tvar_trajectory_row(const tvar_trajectory* trajectory, int64_t k,
                                 double* out);
/* [t n] with t in (0,1]. */
TVAR_API int tvar_pointwise_index(double t, int64_t n, int64_t* out);
TVAR_API int tvar_pointwise_estimate(const tvar_trajectory* trajectory,
                                     double t, double* out);
/* Two-step-size bias-corrected estimate at time t (runs mu and gamma mu). */
TVAR_API int tvar_bias_corrected_estimate(const tvar_path* path, double mu,
                                          double gamma, double t, double* out);

/* Exact transient/noise/drift error split; u+v+w equals thetahat_k -
 * theta(k/n) up to roundoff. */
TVAR_API int tvar_error_decomposition(const tvar_path* path, double mu,
                                      const tvar_curve* curve,
                                      tvar_decomposition** out);
TVAR_API void tvar_decomposition_free(tvar_decomposition* decomposition);
TVAR_API int tvar_decomposition_rows(const tvar_decomposition* decomposition,
                                     int64_t k, double* u, double* v,
                                     double* w);

/* ---- Monte Carlo risk ------------------------------------------------------ */

/* Builds a scenario from the JSON object documented in the README
 * (curve / innovations / n / t / step / estimator / replicates / ...). */
TVAR_API int tvar_scenario_from_json(const char* json_text,
                                     uint64_t master_seed,
                                     tvar_scenario** out);
TVAR_API void tvar_scenario_free(tvar_scenario* scenario);

typedef struct tvar_risk_cell {
  int64_t n;
  double t;
  double mu;
  int64_t replicates;
  int d;
  double l1_risk;
  double l2_risk;
  double se_sqerr;
  double bias[TVAR_MAX_ORDER];
  double se_bias[TVAR_MAX_ORDER];
  double msem[TVAR_MAX_ORDER * TVAR_MAX_ORDER]; /* row-major d x d */
  double cov[TVAR_MAX_ORDER * TVAR_MAX_ORDER];  /* row-major d x d */
  int has_cancelled;
  double bias_cancelled[TVAR_MAX_ORDER];
  double se_bias_cancelled[TVAR_MAX_ORDER];
} tvar_risk_cell;

TVAR_API int tvar_monte_carlo_msem(const tvar_scenario* scenario, int workers,
                                   tvar_risk_report** out);
TVAR_API void tvar_risk_report_free(tvar_risk_report* report);
TVAR_API int tvar_risk_report_cell_count(const tvar_risk_report* report,
                                         int64_t* out);
TVAR_API int tvar_risk_report_cell(const tvar_risk_report* report,
                                   int64_t index, tvar_risk_cell* out);

/* Least-squares slope of log(risk) against log(n). */
TVAR_API int tvar_rate_fit(const double* n_values, const double* risks,
                           int64_t count, double* slope, double* intercept,
                           double* r_squared);

/* mu = alpha * n^{-2 beta / (1 + 2 beta)}. */
TVAR_API int tvar_step_size_rule(int64_t n, double beta, double alpha,
                                 double* out);

/* Noise-free frozen-coefficient drift recursion up to [t n]. */
TVAR_API int tvar_deterministic_bias_oracle(const tvar_curve* curve, double mu,
                                            int64_t n, double t, double* out);
/* Gamma(beta+1) (mu n)^{-beta} Sigma(t)^{-beta} theta_t_beta. */
TVAR_API int tvar_predicted_bias(const tvar_curve* curve, double mu, int64_t n,
                                 double t, double beta,
                                 const double* theta_t_beta, double* out);

typedef struct tvar_expansion_cell {
  int64_t n;
  double t;
  double mu;
  int d;
  double bias_gap;
  int bias_within_3se;
  double cov_gap;
  double cov_scale;
  double term_mu;
  double term_cross;
  double term_lag2;
  double emp_bias[TVAR_MAX_ORDER];
  double se_bias[TVAR_MAX_ORDER];
  double pred_bias[TVAR_MAX_ORDER];
} tvar_expansion_cell;

/* theta_t_beta may be NULL when beta = 1 and the curve has a derivative. */
TVAR_API int tvar_expansion_check(const tvar_scenario* scenario, double beta,
                                  const double* theta_t_beta, int workers,
                                  tvar_expansion_report** out);
TVAR_API void tvar_expansion_report_free(tvar_expansion_report* report);
TVAR_API int tvar_expansion_report_cell_count(
    const tvar_expansion_report* report, int64_t* out);
TVAR_API int tvar_expansion_report_cell(const tvar_expansion_report* report,
                                        int64_t index,
                                        tvar_expansion_cell* out);

typedef struct tvar_compare_cell {
  int64_t n;
  double t;
  double mu;
  double gamma;
  double l1_nlms;
  double l1_romberg;
  double l2_nlms;
  double l2_romberg;
  double ratio;
  double se_ratio;
} tvar_compare_cell;

/* Paired comparison of the plain and bias-corrected estimators. */
TVAR_API int tvar_compare_estimators(const tvar_scenario* scenario,
                                     int workers, tvar_compare_report** out);
TVAR_API void tvar_compare_report_free(tvar_compare_report* report);
TVAR_API int tvar_compare_report_cell_count(const tvar_compare_report* report,
                                            int64_t* out);
TVAR_API int tvar_compare_report_cell(const tvar_compare_report* report,
                                      int64_t index, tvar_compare_cell* out);

typedef struct tvar_centered_cell {
  int64_t n;
  double t;
  double mu;
  double centered_risk;
  double uncentered_risk;
} tvar_centered_cell;

/* L^p risk (p in {1,2}) of the error centered at the predicted first-order
 * bias, against the uncentered risk. */
TVAR_API int tvar_centered_residual(const tvar_scenario* scenario, double p,
                                    int workers, tvar_centered_report** out);
TVAR_API void tvar_centered_report_free(tvar_centered_report* report);
TVAR_API int tvar_centered_report_cell_count(
    const tvar_centered_report* report, int64_t* out);
TVAR_API int tvar_centered_report_cell(const tvar_centered_report* report,
                                       int64_t index, tvar_centered_cell* out);

/* Operator-norm deviation of the simulated second moment of the lag vector
 * from the local stationary covariance, at the checkpoints in k_list. */
TVAR_API int tvar_covariance_approx_error(
    const tvar_curve* curve, int innovation_family, double moment_order,
    double df, int64_t n, const int64_t* k_list, int64_t k_count,
    int64_t replicates, uint64_t seed, int init_kind, int second_moment_mode,
    int workers, double* deviations_out);

/* ---- full runs -------------------------------------------------------------
 *
 * tvar_run executes a JSON run configuration (or a previously written
 * manifest) and writes the artifact set into its output directory.  Optional
 * overrides mirror the command-line flags; pass NULL / has_* = 0 to leave
 * the document untouched.  On success *summary_out (if non-NULL) receives
 * the summary text; release it with tvar_string_free.
 */
TVAR_API int tvar_run(const char* config_text, const char* command_override,
                      const char* output_dir_override, int has_seed_override,
                      uint64_t seed_override, int has_workers_override,
                      int workers_override, int has_emit_plots_override,
                      int emit_plots_override, char** summary_out);

/* Validates a configuration (or manifest) without running it; on success
 * *normalized_out (if non-NULL) receives the normalized config JSON. */
TVAR_API int tvar_run_config_validate(const char* config_text,
                                      char** normalized_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* TVAR_TVAR_H */
