#include "innovations.hpp"

#include <cmath>

#include "errors.hpp"

namespace tvar {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kSqrt3 = 1.7320508075688772935274463415059;
}  // namespace

const char* innovation_family_name(InnovationFamily family) {
  switch (family) {
    case InnovationFamily::Gaussian: return "gaussian";
    case InnovationFamily::Uniform: return "uniform";
    case InnovationFamily::StudentT: return "student_t";
  }
  return "?";
}

void InnovationSpec::validate() const {
  if (!(moment_order >= 2.0)) {
    throw ValidationError("innovations: moment_order must be >= 2, got " +
                          std::to_string(moment_order));
  }
  if (family == InnovationFamily::StudentT) {
    if (!(df > 2.0)) {
      throw ValidationError(
          "innovations: student_t requires df > 2 (unit-variance scaling), "
          "got df = " +
          std::to_string(df));
    }
    if (!(df > moment_order)) {
      throw ValidationError(
          "innovations: student_t requires df > moment_order, got df = " +
          std::to_string(df) + ", moment_order = " +
          std::to_string(moment_order));
    }
  }
}

InnovationSampler::InnovationSampler(const InnovationSpec& spec,
                                     std::uint64_t stream_seed)
    : spec_(spec), rng_(stream_seed) {
  spec_.validate();
  if (spec_.family == InnovationFamily::StudentT) {
    t_scale_ = std::sqrt((spec_.df - 2.0) / spec_.df);
  }
}

double InnovationSampler::next_normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = rng_.uniform01_open_low();
  const double u2 = rng_.uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  cached_normal_ = r * std::sin(kTwoPi * u2);
  has_cached_normal_ = true;
  return r * std::cos(kTwoPi * u2);
}

double InnovationSampler::next_gamma(double shape) {
  // Marsaglia & Tsang squeeze method, valid for shape >= 1.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = next_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng_.uniform01_open_low();
    if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double InnovationSampler::next() {
  switch (spec_.family) {
    case InnovationFamily::Gaussian:
      return next_normal();
    case InnovationFamily::Uniform:
      // Uniform on [-sqrt(3), sqrt(3)]: zero mean, unit variance.
      return (2.0 * rng_.uniform01() - 1.0) * kSqrt3;
    case InnovationFamily::StudentT: {
      // t_df = Z / sqrt(chi2_df / df), rescaled to unit variance.
      const double z = next_normal();
      const double chi2 = 2.0 * next_gamma(0.5 * spec_.df);
      return t_scale_ * z / std::sqrt(chi2 / spec_.df);
    }
  }
  return 0.0;
}

std::vector<double> sample_innovations(const InnovationSpec& spec, long count,
                                       std::uint64_t stream_seed) {
  if (count < 0) throw ValidationError("sample_innovations: count must be >= 0");
  InnovationSampler sampler(spec, stream_seed);
  std::vector<double> out(static_cast<std::size_t>(count));
  for (auto& x : out) x = sampler.next();
  return out;
}

}  // namespace tvar
