#include "config.hpp"

#include <cstring>
#include <sstream>

#include "errors.hpp"
#include "json.hpp"

namespace tvar {

namespace {

using nlohmann::json;

struct ErrorCollector {
  std::vector<std::string> errors;

  void add(const std::string& path, const std::string& message) {
    errors.push_back(path + ": " + message);
  }
  void throw_if_any() const {
    if (errors.empty()) return;
    std::ostringstream out;
    out << "invalid configuration (" << errors.size() << " problem"
        << (errors.size() == 1 ? "" : "s") << "):";
    for (const std::string& e : errors) out << "\n  - " << e;
    throw ValidationError(out.str());
  }
};

const json* field(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed,
                ErrorCollector& ec) {
  if (!j.is_object()) return;
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known) ec.add(path + "." + it.key(), "unknown field");
  }
}

double num_field(const json& j, const std::string& path, const char* key,
                 ErrorCollector& ec, std::optional<double> fallback) {
  const json* f = field(j, key);
  if (f == nullptr) {
    if (fallback) return *fallback;
    ec.add(path + "." + key, "missing required number");
    return 0.0;
  }
  if (!f->is_number()) {
    ec.add(path + "." + key, "must be a number");
    return fallback.value_or(0.0);
  }
  return f->get<double>();
}

long int_field(const json& j, const std::string& path, const char* key,
               ErrorCollector& ec, std::optional<long> fallback) {
  const json* f = field(j, key);
  if (f == nullptr) {
    if (fallback) return *fallback;
    ec.add(path + "." + key, "missing required integer");
    return 0;
  }
  if (!f->is_number_integer() && !f->is_number_unsigned()) {
    ec.add(path + "." + key, "must be an integer");
    return fallback.value_or(0);
  }
  return f->get<long>();
}

std::string str_field(const json& j, const std::string& path, const char* key,
                      ErrorCollector& ec,
                      std::optional<std::string> fallback) {
  const json* f = field(j, key);
  if (f == nullptr) {
    if (fallback) return *fallback;
    ec.add(path + "." + key, "missing required string");
    return std::string();
  }
  if (!f->is_string()) {
    ec.add(path + "." + key, "must be a string");
    return fallback.value_or(std::string());
  }
  return f->get<std::string>();
}

bool bool_field(const json& j, const std::string& path, const char* key,
                ErrorCollector& ec, bool fallback) {
  const json* f = field(j, key);
  if (f == nullptr) return fallback;
  if (!f->is_boolean()) {
    ec.add(path + "." + key, "must be a boolean");
    return fallback;
  }
  return f->get<bool>();
}

std::vector<double> numvec(const json& j, const std::string& path,
                           ErrorCollector& ec) {
  std::vector<double> out;
  if (!j.is_array()) {
    ec.add(path, "must be an array of numbers");
    return out;
  }
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      ec.add(path + "[" + std::to_string(i) + "]", "must be a number");
      return out;
    }
    out.push_back(j[i].get<double>());
  }
  return out;
}

std::vector<double> numvec_field(const json& j, const std::string& path,
                                 const char* key, ErrorCollector& ec,
                                 bool required) {
  const json* f = field(j, key);
  if (f == nullptr) {
    if (required) ec.add(path + "." + key, "missing required array");
    return {};
  }
  return numvec(*f, path + "." + key, ec);
}

SigmaFunc parse_sigma(const json* j, const std::string& path,
                      ErrorCollector& ec) {
  if (j == nullptr) {
    ec.add(path, "missing required object");
    return SigmaFunc::constant(1.0);
  }
  if (!j->is_object()) {
    ec.add(path, "must be an object");
    return SigmaFunc::constant(1.0);
  }
  SigmaFunc sigma;
  const std::string kind = str_field(*j, path, "kind", ec, std::nullopt);
  if (kind == "constant") {
    check_keys(*j, path, {"kind", "value"}, ec);
    sigma.kind = SigmaFunc::Kind::Constant;
    sigma.value = num_field(*j, path, "value", ec, std::nullopt);
  } else if (kind == "poly") {
    check_keys(*j, path, {"kind", "coeffs"}, ec);
    sigma.kind = SigmaFunc::Kind::Poly;
    sigma.coeffs = numvec_field(*j, path, "coeffs", ec, true);
    if (sigma.coeffs.empty()) ec.add(path + ".coeffs", "must be non-empty");
  } else if (kind == "cosine") {
    check_keys(*j, path, {"kind", "offset", "amplitude", "frequency", "phase"},
               ec);
    sigma.kind = SigmaFunc::Kind::Cosine;
    sigma.offset = num_field(*j, path, "offset", ec, std::nullopt);
    sigma.amplitude = num_field(*j, path, "amplitude", ec, std::nullopt);
    sigma.frequency = num_field(*j, path, "frequency", ec, 1.0);
    sigma.phase = num_field(*j, path, "phase", ec, 0.0);
  } else if (!kind.empty()) {
    ec.add(path + ".kind", "must be one of constant, poly, cosine");
  }
  return sigma;
}

std::shared_ptr<const ParamCurve> parse_curve(const json& j,
                                              const std::string& path,
                                              ErrorCollector& ec) {
  if (!j.is_object()) {
    ec.add(path, "must be an object");
    return nullptr;
  }
  const std::size_t errors_before = ec.errors.size();
  const std::string kind = str_field(j, path, "kind", ec, std::nullopt);
  const double beta = num_field(j, path, "beta", ec, 1.0);
  std::optional<double> rho;
  if (const json* f = field(j, "rho")) {
    if (!f->is_number())
      ec.add(path + ".rho", "must be a number");
    else
      rho = f->get<double>();
  }
  std::string id = str_field(j, path, "id", ec, kind);

  ClosedFormTheta cft;
  std::vector<Knot> knots;
  std::vector<RootSpec> roots;
  SigmaFunc sigma = SigmaFunc::constant(1.0);

  if (kind == "closed_form") {
    check_keys(j, path,
               {"kind", "id", "beta", "rho", "family", "sigma", "theta",
                "offset", "amplitude", "frequency", "phase", "base", "coef",
                "anchor"},
               ec);
    const std::string family = str_field(j, path, "family", ec, std::nullopt);
    sigma = parse_sigma(field(j, "sigma"), path + ".sigma", ec);
    if (family == "poly") {
      cft.family = ClosedFormTheta::Family::Poly;
      const json* th = field(j, "theta");
      if (th == nullptr || !th->is_array() || th->empty()) {
        ec.add(path + ".theta", "must be a non-empty array of coefficient arrays");
      } else {
        for (std::size_t i = 0; i < th->size(); ++i) {
          std::vector<double> ci =
              numvec((*th)[i], path + ".theta[" + std::to_string(i) + "]", ec);
          if (ci.empty())
            ec.add(path + ".theta[" + std::to_string(i) + "]",
                   "must be non-empty");
          cft.coeffs.push_back(std::move(ci));
        }
      }
    } else if (family == "cosine") {
      cft.family = ClosedFormTheta::Family::Cosine;
      cft.offset = numvec_field(j, path, "offset", ec, true);
      cft.amplitude = numvec_field(j, path, "amplitude", ec, true);
      cft.frequency = numvec_field(j, path, "frequency", ec, true);
      cft.phase = numvec_field(j, path, "phase", ec, true);
    } else if (family == "sqrt_drift") {
      cft.family = ClosedFormTheta::Family::SqrtDrift;
      cft.base = numvec_field(j, path, "base", ec, true);
      cft.coef = numvec_field(j, path, "coef", ec, true);
      cft.anchor = num_field(j, path, "anchor", ec, 1.0);
    } else if (!family.empty()) {
      ec.add(path + ".family", "must be one of poly, cosine, sqrt_drift");
    }
    if (ec.errors.size() > errors_before) return nullptr;
    try {
      return std::make_shared<ClosedFormCurve>(std::move(cft), sigma, beta,
                                               rho, std::move(id));
    } catch (const std::exception& e) {
      ec.add(path, e.what());
      return nullptr;
    }
  }

  if (kind == "piecewise_linear") {
    check_keys(j, path, {"kind", "id", "beta", "rho", "knots"}, ec);
    const json* kn = field(j, "knots");
    if (kn == nullptr || !kn->is_array()) {
      ec.add(path + ".knots", "must be an array of knot objects");
    } else {
      for (std::size_t i = 0; i < kn->size(); ++i) {
        const std::string kp = path + ".knots[" + std::to_string(i) + "]";
        const json& kj = (*kn)[i];
        if (!kj.is_object()) {
          ec.add(kp, "must be an object");
          continue;
        }
        check_keys(kj, kp, {"t", "theta", "sigma"}, ec);
        Knot knot;
        knot.t = num_field(kj, kp, "t", ec, std::nullopt);
        std::vector<double> th = numvec_field(kj, kp, "theta", ec, true);
        knot.theta = Eigen::Map<const Eigen::VectorXd>(
            th.data(), static_cast<Eigen::Index>(th.size()));
        knot.sigma = num_field(kj, kp, "sigma", ec, std::nullopt);
        knots.push_back(std::move(knot));
      }
    }
    if (ec.errors.size() > errors_before) return nullptr;
    try {
      return std::make_shared<PiecewiseLinearCurve>(std::move(knots), beta,
                                                    rho, std::move(id));
    } catch (const std::exception& e) {
      ec.add(path, e.what());
      return nullptr;
    }
  }

  if (kind == "root_trajectory") {
    check_keys(j, path, {"kind", "id", "beta", "rho", "roots", "sigma"}, ec);
    sigma = parse_sigma(field(j, "sigma"), path + ".sigma", ec);
    const json* rj = field(j, "roots");
    if (rj == nullptr || !rj->is_array() || rj->empty()) {
      ec.add(path + ".roots", "must be a non-empty array of root objects");
    } else {
      for (std::size_t i = 0; i < rj->size(); ++i) {
        const std::string rp = path + ".roots[" + std::to_string(i) + "]";
        const json& r = (*rj)[i];
        if (!r.is_object()) {
          ec.add(rp, "must be an object");
          continue;
        }
        const std::string type = str_field(r, rp, "type", ec, std::nullopt);
        RootSpec spec;
        if (type == "real") {
          check_keys(r, rp, {"type", "value"}, ec);
          spec.kind = RootSpec::Kind::Real;
          std::vector<double> v = numvec_field(r, rp, "value", ec, true);
          if (v.size() != 2) {
            ec.add(rp + ".value", "must be [intercept, slope]");
          } else {
            spec.value0 = v[0];
            spec.value1 = v[1];
          }
        } else if (type == "pair") {
          check_keys(r, rp, {"type", "modulus", "argument"}, ec);
          spec.kind = RootSpec::Kind::Pair;
          std::vector<double> m = numvec_field(r, rp, "modulus", ec, true);
          std::vector<double> a = numvec_field(r, rp, "argument", ec, true);
          if (m.size() != 2)
            ec.add(rp + ".modulus", "must be [intercept, slope]");
          else {
            spec.modulus0 = m[0];
            spec.modulus1 = m[1];
          }
          if (a.size() != 2)
            ec.add(rp + ".argument", "must be [intercept, slope]");
          else {
            spec.argument0 = a[0];
            spec.argument1 = a[1];
          }
        } else if (!type.empty()) {
          ec.add(rp + ".type", "must be real or pair");
        }
        roots.push_back(spec);
      }
    }
    if (ec.errors.size() > errors_before) return nullptr;
    try {
      return std::make_shared<RootTrajectoryCurve>(std::move(roots), sigma,
                                                   beta, rho, std::move(id));
    } catch (const std::exception& e) {
      ec.add(path, e.what());
      return nullptr;
    }
  }

  if (!kind.empty())
    ec.add(path + ".kind",
           "must be one of closed_form, piecewise_linear, root_trajectory");
  return nullptr;
}

InnovationSpec parse_innovations(const json* j, const std::string& path,
                                 ErrorCollector& ec) {
  InnovationSpec spec;
  if (j == nullptr) return spec;  // gaussian, moment order 4
  if (!j->is_object()) {
    ec.add(path, "must be an object");
    return spec;
  }
  check_keys(*j, path, {"family", "moment_order", "df"}, ec);
  const std::string family = str_field(*j, path, "family", ec, "gaussian");
  if (family == "gaussian")
    spec.family = InnovationFamily::Gaussian;
  else if (family == "uniform")
    spec.family = InnovationFamily::Uniform;
  else if (family == "student_t")
    spec.family = InnovationFamily::StudentT;
  else
    ec.add(path + ".family", "must be one of gaussian, uniform, student_t");
  spec.moment_order = num_field(*j, path, "moment_order", ec, 4.0);
  if (spec.family == InnovationFamily::StudentT)
    spec.df = num_field(*j, path, "df", ec, std::nullopt);
  else if (field(*j, "df") != nullptr)
    ec.add(path + ".df", "only valid for the student_t family");
  return spec;
}

StepRule parse_step(const json* j, const std::string& path,
                    ErrorCollector& ec) {
  StepRule step;
  step.kind = StepRule::Kind::Fixed;
  step.mu = 0.05;
  if (j == nullptr) return step;
  if (!j->is_object()) {
    ec.add(path, "must be an object");
    return step;
  }
  const std::string rule = str_field(*j, path, "rule", ec, std::nullopt);
  if (rule == "fixed") {
    check_keys(*j, path, {"rule", "mu"}, ec);
    step.kind = StepRule::Kind::Fixed;
    step.mu = num_field(*j, path, "mu", ec, std::nullopt);
  } else if (rule == "minimax") {
    check_keys(*j, path, {"rule", "alpha", "beta"}, ec);
    step.kind = StepRule::Kind::Minimax;
    step.alpha = num_field(*j, path, "alpha", ec, 1.0);
    step.beta = num_field(*j, path, "beta", ec, 1.0);
  } else if (!rule.empty()) {
    ec.add(path + ".rule", "must be fixed or minimax");
  }
  return step;
}

void parse_init(const json* j, const std::string& path, ErrorCollector& ec,
                Scenario& scenario) {
  scenario.init = InitKind::Zero;
  if (j == nullptr) return;
  if (j->is_string()) {
    const std::string s = j->get<std::string>();
    if (s == "zero")
      scenario.init = InitKind::Zero;
    else if (s == "stationary")
      scenario.init = InitKind::StationaryAtZero;
    else
      ec.add(path, "must be zero, stationary, or {\"explicit\": [...]}");
    return;
  }
  if (j->is_object()) {
    check_keys(*j, path, {"explicit"}, ec);
    std::vector<double> x0 = numvec_field(*j, path, "explicit", ec, true);
    scenario.init = InitKind::Explicit;
    scenario.x0 = Eigen::Map<const Eigen::VectorXd>(
        x0.data(), static_cast<Eigen::Index>(x0.size()));
    return;
  }
  ec.add(path, "must be zero, stationary, or {\"explicit\": [...]}");
}

Scenario parse_scenario(const json* j, const std::string& path,
                        ErrorCollector& ec) {
  Scenario scenario;
  if (j == nullptr) {
    ec.add(path, "missing required object");
    return scenario;
  }
  if (!j->is_object()) {
    ec.add(path, "must be an object");
    return scenario;
  }
  check_keys(*j, path,
             {"curve", "innovations", "n", "t", "step", "estimator", "gamma",
              "replicates", "init", "collect_cancelled_bias"},
             ec);
  const json* cj = field(*j, "curve");
  if (cj == nullptr)
    ec.add(path + ".curve", "missing required object");
  else
    scenario.curve = parse_curve(*cj, path + ".curve", ec);
  scenario.innovations =
      parse_innovations(field(*j, "innovations"), path + ".innovations", ec);

  const json* nj = field(*j, "n");
  if (nj == nullptr || !nj->is_array() || nj->empty()) {
    ec.add(path + ".n", "must be a non-empty array of integers");
  } else {
    for (std::size_t i = 0; i < nj->size(); ++i) {
      if (!(*nj)[i].is_number_integer() && !(*nj)[i].is_number_unsigned()) {
        ec.add(path + ".n[" + std::to_string(i) + "]", "must be an integer");
        continue;
      }
      const long n = (*nj)[i].get<long>();
      if (n < 10)
        ec.add(path + ".n[" + std::to_string(i) + "]", "must be >= 10");
      scenario.n_values.push_back(n);
    }
  }
  scenario.t_points = numvec_field(*j, path, "t", ec, true);
  for (std::size_t i = 0; i < scenario.t_points.size(); ++i)
    if (!(scenario.t_points[i] > 0.0) || !(scenario.t_points[i] <= 1.0))
      ec.add(path + ".t[" + std::to_string(i) + "]", "must lie in (0, 1]");
  scenario.step = parse_step(field(*j, "step"), path + ".step", ec);
  try {
    scenario.step.validate();
  } catch (const ValidationError& e) {
    ec.add(path + ".step", e.what());
  }

  const std::string estimator = str_field(*j, path, "estimator", ec, "nlms");
  if (estimator == "nlms")
    scenario.estimator = Estimator::Nlms;
  else if (estimator == "romberg")
    scenario.estimator = Estimator::Romberg;
  else
    ec.add(path + ".estimator", "must be nlms or romberg");

  scenario.gamma = num_field(*j, path, "gamma", ec, 0.5);
  if (!(scenario.gamma > 0.0) || !(scenario.gamma < 1.0))
    ec.add(path + ".gamma", "must lie in (0, 1)");
  scenario.replicates = int_field(*j, path, "replicates", ec, 200L);
  if (scenario.replicates < 2)
    ec.add(path + ".replicates", "must be >= 2");
  parse_init(field(*j, "init"), path + ".init", ec, scenario);
  if (scenario.init == InitKind::Explicit && scenario.curve != nullptr &&
      scenario.x0.size() !=
          static_cast<Eigen::Index>(scenario.curve->order()))
    ec.add(path + ".init.explicit", "must have length d");
  scenario.collect_cancelled_bias =
      bool_field(*j, path, "collect_cancelled_bias", ec, false);
  try {
    scenario.innovations.validate();
  } catch (const ValidationError& e) {
    ec.add(path + ".innovations", e.what());
  }
  return scenario;
}

std::uint64_t seed_field(const json& j, const std::string& path,
                         ErrorCollector& ec) {
  const json* f = field(j, "seed");
  if (f == nullptr) return 1;
  if (f->is_number_unsigned()) return f->get<std::uint64_t>();
  if (f->is_number_integer() && f->get<long long>() >= 0)
    return static_cast<std::uint64_t>(f->get<long long>());
  ec.add(path + ".seed", "must be a non-negative integer");
  return 1;
}

}  // namespace

const char* command_name(Command command) {
  switch (command) {
    case Command::Simulate: return "simulate";
    case Command::Estimate: return "estimate";
    case Command::Decompose: return "decompose";
    case Command::Covariance: return "covariance";
    case Command::Risk: return "risk";
    case Command::Rate: return "rate";
    case Command::ExpansionCheck: return "expansion-check";
    case Command::Compare: return "compare";
  }
  return "unknown";
}

Command command_from_name(const std::string& name) {
  if (name == "simulate") return Command::Simulate;
  if (name == "estimate") return Command::Estimate;
  if (name == "decompose") return Command::Decompose;
  if (name == "covariance") return Command::Covariance;
  if (name == "risk") return Command::Risk;
  if (name == "rate") return Command::Rate;
  if (name == "expansion-check") return Command::ExpansionCheck;
  if (name == "compare") return Command::Compare;
  throw ValidationError("unknown command: " + name);
}

RunConfig parse_run_config(const std::string& json_text,
                           const ConfigOverrides& overrides) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object())
    throw ValidationError("configuration root must be a JSON object");

  if (overrides.command) j["command"] = *overrides.command;
  if (overrides.seed) j["seed"] = *overrides.seed;
  if (overrides.output_dir) j["output_dir"] = *overrides.output_dir;
  if (overrides.workers) j["workers"] = *overrides.workers;
  if (overrides.emit_plots) j["emit_plots"] = *overrides.emit_plots;

  ErrorCollector ec;
  const std::string root = "$";
  check_keys(j, root,
             {"command", "seed", "output_dir", "workers", "emit_plots",
              "scenario", "beta", "theta_t_beta", "cov_mode"},
             ec);

  RunConfig cfg;
  const std::string command = str_field(j, root, "command", ec, std::nullopt);
  if (!command.empty()) {
    try {
      cfg.command = command_from_name(command);
    } catch (const ValidationError& e) {
      ec.add(root + ".command", e.what());
    }
  }
  cfg.seed = seed_field(j, root, ec);
  cfg.output_dir = str_field(j, root, "output_dir", ec, "out");
  if (cfg.output_dir.empty())
    ec.add(root + ".output_dir", "must be non-empty");
  cfg.workers = static_cast<int>(int_field(j, root, "workers", ec, 1L));
  if (cfg.workers < 0) ec.add(root + ".workers", "must be >= 0");
  cfg.emit_plots = bool_field(j, root, "emit_plots", ec, false);
  cfg.scenario = parse_scenario(field(j, "scenario"), root + ".scenario", ec);
  cfg.scenario.master_seed = cfg.seed;

  cfg.expansion_beta = num_field(j, root, "beta", ec, 1.0);
  if (const json* f = field(j, "theta_t_beta")) {
    std::vector<double> v = numvec(*f, root + ".theta_t_beta", ec);
    if (!v.empty())
      cfg.theta_t_beta = Eigen::Map<const Eigen::VectorXd>(
          v.data(), static_cast<Eigen::Index>(v.size()));
  }
  const std::string cov_mode = str_field(j, root, "cov_mode", ec, "exact");
  if (cov_mode == "exact")
    cfg.cov_mode = SecondMomentMode::Exact;
  else if (cov_mode == "monte_carlo")
    cfg.cov_mode = SecondMomentMode::MonteCarlo;
  else
    ec.add(root + ".cov_mode", "must be exact or monte_carlo");

  ec.throw_if_any();

  try {
    cfg.scenario.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("$.scenario: ") + e.what());
  }

  cfg.config_json = j.dump();
  return cfg;
}

RunConfig load_run_config_text(const std::string& text,
                               const ConfigOverrides& overrides) {
  const std::size_t pos = text.find_first_not_of(" \t\r\n");
  const std::size_t ver_len = std::strlen(kManifestVersionLine);
  if (pos != std::string::npos &&
      text.compare(pos, ver_len, kManifestVersionLine) == 0) {
    std::istringstream lines(text);
    std::string line;
    const std::string key = "config-json=";
    while (std::getline(lines, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.rfind(key, 0) == 0)
        return parse_run_config(line.substr(key.size()), overrides);
    }
    throw ValidationError("manifest has no config-json line");
  }
  return parse_run_config(text, overrides);
}

std::shared_ptr<const ParamCurve> parse_curve_json(
    const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("invalid JSON: ") + e.what());
  }
  ErrorCollector ec;
  std::shared_ptr<const ParamCurve> curve = parse_curve(j, "$", ec);
  ec.throw_if_any();
  return curve;
}

Scenario parse_scenario_json(const std::string& json_text,
                             std::uint64_t master_seed) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("invalid JSON: ") + e.what());
  }
  ErrorCollector ec;
  Scenario scenario = parse_scenario(&j, "$", ec);
  ec.throw_if_any();
  scenario.master_seed = master_seed;
  scenario.validate();
  return scenario;
}

}  // namespace tvar
