#include "runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "csv.hpp"
#include "errors.hpp"
#include "local_stationary.hpp"
#include "nlms.hpp"
#include "rng.hpp"

namespace tvar {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) { return CsvWriter::format_double(v); }

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

// One artifact sink per run: remembers what was written, in order.
struct Sink {
  std::string dir;
  std::vector<std::string> files;

  void write(const std::string& name, const std::string& content) {
    write_text_file(join_path(dir, name), content);
    files.push_back(name);
  }
  void write_csv(const std::string& name, const CsvWriter& csv) {
    write(name, csv.to_string());
  }
};

void write_manifest(const RunConfig& cfg, Sink& sink) {
  std::ostringstream out;
  out << kManifestVersionLine << '\n';
  out << "command=" << command_name(cfg.command) << '\n';
  out << "seed=" << cfg.seed << '\n';
  out << "config-json=" << cfg.config_json << '\n';
  sink.write("manifest.txt", out.str());
}

std::string join_doubles(const Eigen::VectorXd& v) {
  std::ostringstream out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out << ',';
    out << fmt(v(i));
  }
  return out.str();
}

using Summary = std::vector<std::pair<std::string, std::string>>;

void common_summary(const RunConfig& cfg, Summary& s) {
  const ParamCurve& curve = *cfg.scenario.curve;
  s.emplace_back("command", command_name(cfg.command));
  s.emplace_back("seed", std::to_string(cfg.seed));
  s.emplace_back("curve", curve.id());
  s.emplace_back("curve_kind", curve_kind_name(curve.kind()));
  s.emplace_back("d", std::to_string(curve.order()));
  s.emplace_back("innovations",
                 innovation_family_name(cfg.scenario.innovations.family));
  s.emplace_back("realized_radius", fmt(curve.realized_radius()));
}

TvarPath simulate_first(const RunConfig& cfg) {
  const Scenario& sc = cfg.scenario;
  const Eigen::VectorXd* x0p = sc.init == InitKind::Explicit ? &sc.x0 : nullptr;
  const std::uint64_t path_seed =
      rng::mix_stream(cfg.seed, rng::kTagPath, 0);
  return simulate(*sc.curve, sc.n_values.front(), sc.innovations, path_seed,
                  sc.init, x0p);
}

std::vector<std::string> theta_headers(const char* stem, int d) {
  std::vector<std::string> h;
  for (int i = 1; i <= d; ++i)
    h.push_back(std::string(stem) + "_" + std::to_string(i));
  return h;
}

// ---- commands ---------------------------------------------------------------

void run_simulate(const RunConfig& cfg, Sink& sink, Summary& s) {
  const TvarPath path = simulate_first(cfg);
  CsvWriter csv({"k", "x", "eps"});
  for (long k = 1; k <= path.n; ++k)
    csv.add_row({static_cast<double>(k), path.samples[k - 1],
                 path.innovations[k - 1]});
  sink.write_csv("path.csv", csv);
  s.emplace_back("n", std::to_string(path.n));
  s.emplace_back("path_seed", std::to_string(path.seed));
  s.emplace_back("x0", join_doubles(path.x0));
}

void run_estimate(const RunConfig& cfg, Sink& sink, Summary& s) {
  const Scenario& sc = cfg.scenario;
  const TvarPath path = simulate_first(cfg);
  const double mu = sc.step.mu_for(path.n);
  const NlmsTrajectory traj = nlms_run(path, mu);
  const bool rom = sc.estimator == Estimator::Romberg;
  NlmsTrajectory traj_g;
  if (rom) traj_g = nlms_run(path, sc.gamma * mu);

  const int d = path.d;
  std::vector<std::string> header{"k"};
  for (const std::string& h : theta_headers("theta_hat", d)) header.push_back(h);
  CsvWriter csv(header);
  std::vector<double> row(static_cast<std::size_t>(d) + 1);
  for (long k = 0; k <= path.n; ++k) {
    row[0] = static_cast<double>(k);
    const double* a = traj.row(k);
    if (!rom) {
      for (int i = 0; i < d; ++i) row[static_cast<std::size_t>(i) + 1] = a[i];
    } else {
      const double* b = traj_g.row(k);
      for (int i = 0; i < d; ++i)
        row[static_cast<std::size_t>(i) + 1] =
            (a[i] - sc.gamma * b[i]) / (1.0 - sc.gamma);
    }
    csv.add_row(row);
  }
  sink.write_csv("trajectory.csv", csv);

  std::vector<std::string> pw_header{"t", "k"};
  for (const std::string& h : theta_headers("theta_hat", d))
    pw_header.push_back(h);
  for (const std::string& h : theta_headers("theta_true", d))
    pw_header.push_back(h);
  CsvWriter pw(pw_header);
  for (double t : sc.t_points) {
    const long k = pointwise_index(t, path.n);
    std::vector<double> r{t, static_cast<double>(k)};
    const double* a = traj.row(k);
    if (!rom) {
      for (int i = 0; i < d; ++i) r.push_back(a[i]);
    } else {
      const double* b = traj_g.row(k);
      for (int i = 0; i < d; ++i)
        r.push_back((a[i] - sc.gamma * b[i]) / (1.0 - sc.gamma));
    }
    const Eigen::VectorXd th = sc.curve->theta(t);
    for (int i = 0; i < d; ++i) r.push_back(th(i));
    pw.add_row(r);
  }
  sink.write_csv("pointwise.csv", pw);

  s.emplace_back("n", std::to_string(path.n));
  s.emplace_back("mu", fmt(mu));
  s.emplace_back("estimator", rom ? "romberg" : "nlms");
  if (rom) s.emplace_back("gamma", fmt(sc.gamma));
}

void run_decompose(const RunConfig& cfg, Sink& sink, Summary& s) {
  const Scenario& sc = cfg.scenario;
  const TvarPath path = simulate_first(cfg);
  const double mu = sc.step.mu_for(path.n);
  const NlmsTrajectory traj = nlms_run(path, mu);
  const ErrorDecomposition dec = error_decomposition(path, mu, *sc.curve);

  const int d = path.d;
  std::vector<std::string> header{"k"};
  for (const std::string& h : theta_headers("u", d)) header.push_back(h);
  for (const std::string& h : theta_headers("v", d)) header.push_back(h);
  for (const std::string& h : theta_headers("w", d)) header.push_back(h);
  for (const std::string& h : theta_headers("delta", d)) header.push_back(h);
  CsvWriter csv(header);

  const double inv_n = 1.0 / static_cast<double>(path.n);
  Eigen::VectorXd th(d);
  double max_residual = 0.0;
  std::vector<double> row;
  for (long k = 0; k <= path.n; ++k) {
    row.clear();
    row.push_back(static_cast<double>(k));
    const double* u = dec.u_row(k);
    const double* v = dec.v_row(k);
    const double* w = dec.w_row(k);
    const double* est = traj.row(k);
    sc.curve->eval_theta(static_cast<double>(k) * inv_n, th.data());
    for (int i = 0; i < d; ++i) row.push_back(u[i]);
    for (int i = 0; i < d; ++i) row.push_back(v[i]);
    for (int i = 0; i < d; ++i) row.push_back(w[i]);
    for (int i = 0; i < d; ++i) {
      const double delta = est[i] - th(i);
      row.push_back(delta);
      max_residual =
          std::max(max_residual, std::abs(u[i] + v[i] + w[i] - delta));
    }
    csv.add_row(row);
  }
  sink.write_csv("decomposition.csv", csv);
  s.emplace_back("n", std::to_string(path.n));
  s.emplace_back("mu", fmt(mu));
  s.emplace_back("max_identity_residual", fmt(max_residual));
}

void run_covariance(const RunConfig& cfg, Sink& sink, Summary& s) {
  const Scenario& sc = cfg.scenario;
  const ParamCurve& curve = *sc.curve;
  const int d = curve.order();

  CsvWriter csv({"t", "i", "j", "yule_walker", "quadrature", "abs_gap"});
  double max_gap = 0.0;
  for (double t : sc.t_points) {
    const Eigen::MatrixXd yw =
        local_covariance_at(curve, t, CovarianceMethod::YuleWalker).matrix;
    const Eigen::MatrixXd quad =
        local_covariance_at(curve, t, CovarianceMethod::Quadrature).matrix;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const double gap = std::abs(yw(i, j) - quad(i, j));
        max_gap = std::max(max_gap, gap);
        csv.add_row({t, static_cast<double>(i + 1), static_cast<double>(j + 1),
                     yw(i, j), quad(i, j), gap});
      }
  }
  sink.write_csv("covariance.csv", csv);

  // Spectral density of the curve frozen at the first requested time.
  {
    const double t0 = sc.t_points.front();
    const Eigen::VectorXd th = curve.theta(t0);
    const double sig = curve.sigma(t0);
    const int nodes = 512;
    CsvWriter spec({"lambda", "density"});
    for (int j = 0; j < nodes; ++j) {
      const double lambda =
          -M_PI + 2.0 * M_PI * static_cast<double>(j) / nodes;
      spec.add_row({lambda, local_spectral_density(th, sig, lambda)});
    }
    sink.write_csv("spectrum.csv", spec);
  }

  // Finite-n second-moment deviation at the pointwise indices.
  const long n = sc.n_values.front();
  std::set<long> k_set;
  for (double t : sc.t_points) k_set.insert(pointwise_index(t, n));
  const std::vector<long> k_list(k_set.begin(), k_set.end());
  const CovarianceApproxResult approx = covariance_approx_error(
      curve, sc.innovations, n, k_list, sc.replicates, cfg.seed, sc.init,
      cfg.cov_mode, cfg.workers);
  CsvWriter ap({"k", "deviation"});
  double max_dev = 0.0;
  for (std::size_t i = 0; i < approx.k.size(); ++i) {
    ap.add_row({static_cast<double>(approx.k[i]), approx.deviation[i]});
    max_dev = std::max(max_dev, approx.deviation[i]);
  }
  sink.write_csv("approx.csv", ap);

  s.emplace_back("n", std::to_string(n));
  s.emplace_back("max_method_gap", fmt(max_gap));
  s.emplace_back("max_deviation", fmt(max_dev));
  s.emplace_back("mode", cfg.cov_mode == SecondMomentMode::Exact
                             ? "exact"
                             : "monte_carlo");
}

CsvWriter risk_csv(const RiskReport& report, bool with_cancelled) {
  const int d = report.d;
  std::vector<std::string> header{"n",  "t",  "mu",        "replicates",
                                  "l1", "l2", "se_sqerr",  "trace_msem"};
  for (const std::string& h : theta_headers("bias", d)) header.push_back(h);
  for (const std::string& h : theta_headers("se_bias", d)) header.push_back(h);
  for (int i = 1; i <= d; ++i)
    for (int j = 1; j <= d; ++j)
      header.push_back("msem_" + std::to_string(i) + "_" + std::to_string(j));
  for (int i = 1; i <= d; ++i)
    for (int j = 1; j <= d; ++j)
      header.push_back("cov_" + std::to_string(i) + "_" + std::to_string(j));
  if (with_cancelled) {
    for (const std::string& h : theta_headers("bias_nc", d))
      header.push_back(h);
    for (const std::string& h : theta_headers("se_bias_nc", d))
      header.push_back(h);
  }
  CsvWriter csv(header);
  std::vector<double> row;
  for (const RiskCell& c : report.cells) {
    row.clear();
    row.insert(row.end(),
               {static_cast<double>(c.n), c.t, c.mu,
                static_cast<double>(c.replicates), c.l1_risk, c.l2_risk,
                c.se_sqerr, c.msem.trace()});
    for (int i = 0; i < d; ++i) row.push_back(c.bias(i));
    for (int i = 0; i < d; ++i) row.push_back(c.se_bias(i));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) row.push_back(c.msem(i, j));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) row.push_back(c.cov(i, j));
    if (with_cancelled) {
      for (int i = 0; i < d; ++i) row.push_back(c.bias_cancelled(i));
      for (int i = 0; i < d; ++i) row.push_back(c.se_bias_cancelled(i));
    }
    csv.add_row(row);
  }
  return csv;
}

void run_risk(const RunConfig& cfg, Sink& sink, Summary& s) {
  const RiskReport report = monte_carlo_msem(cfg.scenario, cfg.workers);
  sink.write_csv("risk.csv",
                 risk_csv(report, cfg.scenario.collect_cancelled_bias));
  s.emplace_back("cells", std::to_string(report.cells.size()));
  s.emplace_back("replicates", std::to_string(cfg.scenario.replicates));
  if (!report.cells.empty()) {
    s.emplace_back("first_l2", fmt(report.cells.front().l2_risk));
    s.emplace_back("last_l2", fmt(report.cells.back().l2_risk));
  }
}

void run_rate(const RunConfig& cfg, Sink& sink, Summary& s) {
  const Scenario& sc = cfg.scenario;
  const RiskReport report = monte_carlo_msem(sc, cfg.workers);
  sink.write_csv("risk.csv", risk_csv(report, sc.collect_cancelled_bias));

  CsvWriter csv({"t", "slope", "intercept", "r_squared", "points"});
  const std::size_t T = sc.t_points.size();
  for (std::size_t ti = 0; ti < T; ++ti) {
    std::vector<double> ns, risks;
    for (std::size_t ni = 0; ni < sc.n_values.size(); ++ni) {
      const RiskCell& c = report.cells[ni * T + ti];
      ns.push_back(static_cast<double>(c.n));
      risks.push_back(c.l2_risk);
    }
    const RateFit fit = rate_fit(ns, risks);
    csv.add_row({sc.t_points[ti], fit.slope, fit.intercept, fit.r_squared,
                 static_cast<double>(ns.size())});
    s.emplace_back("slope_t" + std::to_string(ti), fmt(fit.slope));
  }
  sink.write_csv("rate.csv", csv);
}

void run_expansion(const RunConfig& cfg, Sink& sink, Summary& s) {
  const ExpansionReport report = msem_expansion_check(
      cfg.scenario, cfg.expansion_beta, cfg.theta_t_beta, cfg.workers);
  const int d = cfg.scenario.curve->order();
  std::vector<std::string> header{"n",         "t",        "mu",
                                  "bias_gap",  "bias_within_3se",
                                  "cov_gap",   "cov_scale", "term_mu",
                                  "term_cross", "term_lag2"};
  for (const std::string& h : theta_headers("emp_bias", d)) header.push_back(h);
  for (const std::string& h : theta_headers("se_bias", d)) header.push_back(h);
  for (const std::string& h : theta_headers("pred_bias", d))
    header.push_back(h);
  CsvWriter csv(header);
  bool all_within = true;
  std::vector<double> row;
  for (const ExpansionCell& c : report.cells) {
    all_within = all_within && c.bias_within_3se;
    row.clear();
    row.insert(row.end(), {static_cast<double>(c.n), c.t, c.mu, c.bias_gap,
                           c.bias_within_3se ? 1.0 : 0.0, c.cov_gap,
                           c.cov_scale, c.term_mu, c.term_cross, c.term_lag2});
    for (int i = 0; i < d; ++i) row.push_back(c.emp_bias(i));
    for (int i = 0; i < d; ++i) row.push_back(c.se_bias(i));
    for (int i = 0; i < d; ++i) row.push_back(c.pred_bias(i));
    csv.add_row(row);
  }
  sink.write_csv("expansion.csv", csv);
  s.emplace_back("beta", fmt(report.beta));
  s.emplace_back("cells", std::to_string(report.cells.size()));
  s.emplace_back("bias_within_3se_all", all_within ? "1" : "0");
}

void run_compare(const RunConfig& cfg, Sink& sink, Summary& s) {
  const CompareReport report = compare_estimators(cfg.scenario, cfg.workers);
  CsvWriter csv({"n", "t", "mu", "gamma", "l1_nlms", "l1_romberg", "l2_nlms",
                 "l2_romberg", "ratio", "se_ratio"});
  for (const CompareCell& c : report.cells)
    csv.add_row({static_cast<double>(c.n), c.t, c.mu, c.gamma, c.l1_nlms,
                 c.l1_romberg, c.l2_nlms, c.l2_romberg, c.ratio, c.se_ratio});
  sink.write_csv("compare.csv", csv);
  s.emplace_back("cells", std::to_string(report.cells.size()));
  if (!report.cells.empty())
    s.emplace_back("last_ratio", fmt(report.cells.back().ratio));
}

// ---- plot scripts -----------------------------------------------------------

const char* kPlotPrelude =
    "#!/usr/bin/env python3\n"
    "import csv\n"
    "import sys\n"
    "from pathlib import Path\n"
    "\n"
    "import matplotlib\n"
    "matplotlib.use(\"Agg\")\n"
    "import matplotlib.pyplot as plt\n"
    "\n"
    "HERE = Path(__file__).resolve().parent\n"
    "\n"
    "\n"
    "def read_csv(name):\n"
    "    with open(HERE / name, newline=\"\") as fh:\n"
    "        rows = list(csv.DictReader(fh))\n"
    "    if not rows:\n"
    "        sys.exit(f\"{name} is empty\")\n"
    "    return rows\n"
    "\n";

std::string plot_script(Command command, int d) {
  std::ostringstream out;
  out << kPlotPrelude;
  switch (command) {
    case Command::Simulate:
      out << "rows = read_csv(\"path.csv\")\n"
             "k = [int(r[\"k\"]) for r in rows]\n"
             "x = [float(r[\"x\"]) for r in rows]\n"
             "plt.figure(figsize=(10, 4))\n"
             "plt.plot(k, x, lw=0.6)\n"
             "plt.xlabel(\"k\")\n"
             "plt.ylabel(\"x\")\n"
             "plt.title(\"simulated path\")\n"
             "plt.tight_layout()\n"
             "plt.savefig(HERE / \"plot_simulate.png\", dpi=150)\n";
      break;
    case Command::Estimate:
      out << "rows = read_csv(\"trajectory.csv\")\n"
             "k = [int(r[\"k\"]) for r in rows]\n"
             "plt.figure(figsize=(10, 4))\n"
             "for i in range(1, " << d + 1 << "):\n"
             "    plt.plot(k, [float(r[f\"theta_hat_{i}\"]) for r in rows],\n"
             "             lw=0.8, label=f\"theta_hat_{i}\")\n"
             "plt.xlabel(\"k\")\n"
             "plt.legend()\n"
             "plt.title(\"estimated coefficient trajectory\")\n"
             "plt.tight_layout()\n"
             "plt.savefig(HERE / \"plot_estimate.png\", dpi=150)\n";
      break;
    case Command::Decompose:
      out << "rows = read_csv(\"decomposition.csv\")\n"
             "k = [int(r[\"k\"]) for r in rows]\n"
             "plt.figure(figsize=(10, 4))\n"
             "for stem in (\"u\", \"v\", \"w\"):\n"
             "    plt.plot(k, [float(r[stem + \"_1\"]) for r in rows],\n"
             "             lw=0.8, label=stem + \"_1\")\n"
             "plt.xlabel(\"k\")\n"
             "plt.legend()\n"
             "plt.title(\"error decomposition (first coordinate)\")\n"
             "plt.tight_layout()\n"
             "plt.savefig(HERE / \"plot_decompose.png\", dpi=150)\n";
      break;
    case Command::Covariance:
      out << "rows = read_csv(\"spectrum.csv\")\n"
             "lam = [float(r[\"lambda\"]) for r in rows]\n"
             "f = [float(r[\"density\"]) for r in rows]\n"
             "plt.figure(figsize=(8, 4))\n"
             "plt.plot(lam, f)\n"
             "plt.xlabel(\"lambda\")\n"
             "plt.ylabel(\"density\")\n"
             "plt.title(\"local spectral density\")\n"
             "plt.tight_layout()\n"
             "plt.savefig(HERE / \"plot_covariance.png\", dpi=150)\n";
      break;
    case Command::Risk:
    case Command::Rate:
      out << "rows = read_csv(\"risk.csv\")\n"
             "ts = sorted({r[\"t\"] for r in rows})\n"
             "plt.figure(figsize=(7, 5))\n"
             "for t in ts:\n"
             "    pts = [(int(r[\"n\"]), float(r[\"l2\"]))\n"
             "           for r in rows if r[\"t\"] == t]\n"
             "    pts.sort()\n"
             "    plt.loglog([p[0] for p in pts], [p[1] for p in pts],\n"
             "               \"o-\", label=f\"t={t}\")\n"
             "plt.xlabel(\"n\")\n"
             "plt.ylabel(\"L2 risk\")\n"
             "plt.legend()\n"
             "plt.title(\"pointwise risk against n\")\n"
             "plt.tight_layout()\n"
             "plt.savefig(HERE / \"plot_risk.png\", dpi=150)\n";
      break;
    case Command::ExpansionCheck:
      out << "rows = read_csv(\"expansion.csv\")\n"
             "n = [int(r[\"n\"]) for r in rows]\n"
             "plt.figure(figsize=(7, 5))\n"
             "plt.loglog(n, [float(r[\"bias_gap\"]) for r in rows], \"o-\",\n"
             "           label=\"bias gap\")\n"
             "plt.loglog(n, [float(r[\"cov_gap\"]) for r in rows], \"s-\",\n"
             "           label=\"cov gap\")\n"
             "plt.xlabel(\"n\")\n"
             "plt.legend()\n"
             "plt.title(\"expansion residuals\")\n"
             "plt.tight_layout()\n"
             "plt.savefig(HERE / \"plot_expansion.png\", dpi=150)\n";
      break;
    case Command::Compare:
      out << "rows = read_csv(\"compare.csv\")\n"
             "n = [int(r[\"n\"]) for r in rows]\n"
             "plt.figure(figsize=(7, 5))\n"
             "plt.loglog(n, [float(r[\"l2_nlms\"]) for r in rows], \"o-\",\n"
             "           label=\"plain\")\n"
             "plt.loglog(n, [float(r[\"l2_romberg\"]) for r in rows], \"s-\",\n"
             "           label=\"bias-corrected\")\n"
             "plt.xlabel(\"n\")\n"
             "plt.ylabel(\"L2 risk\")\n"
             "plt.legend()\n"
             "plt.title(\"estimator comparison\")\n"
             "plt.tight_layout()\n"
             "plt.savefig(HERE / \"plot_compare.png\", dpi=150)\n";
      break;
  }
  return out.str();
}

std::string plot_name(Command command) {
  return std::string("plot_") +
         (command == Command::ExpansionCheck ? "expansion"
                                             : command_name(command)) +
         ".py";
}

}  // namespace

RunResult execute_run(const RunConfig& config) {
  std::error_code ec;
  fs::create_directories(fs::path(config.output_dir), ec);
  if (ec)
    throw IoError("cannot create output directory '" + config.output_dir +
                  "': " + ec.message());

  Sink sink;
  sink.dir = config.output_dir;
  Summary summary;
  common_summary(config, summary);

  switch (config.command) {
    case Command::Simulate: run_simulate(config, sink, summary); break;
    case Command::Estimate: run_estimate(config, sink, summary); break;
    case Command::Decompose: run_decompose(config, sink, summary); break;
    case Command::Covariance: run_covariance(config, sink, summary); break;
    case Command::Risk: run_risk(config, sink, summary); break;
    case Command::Rate: run_rate(config, sink, summary); break;
    case Command::ExpansionCheck: run_expansion(config, sink, summary); break;
    case Command::Compare: run_compare(config, sink, summary); break;
  }

  if (config.emit_plots)
    sink.write(plot_name(config.command),
               plot_script(config.command, config.scenario.curve->order()));

  std::ostringstream sum_text;
  for (const auto& [key, value] : summary) sum_text << key << '=' << value << '\n';
  sink.write("summary.txt", sum_text.str());
  write_manifest(config, sink);

  RunResult result;
  result.output_dir = config.output_dir;
  result.files = std::move(sink.files);
  result.summary_text = sum_text.str();
  return result;
}

}  // namespace tvar
