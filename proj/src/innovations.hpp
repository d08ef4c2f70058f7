#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rng.hpp"

// Innovation distributions: zero mean and unit variance by construction, with
// the declared moment order recording which absolute moments are finite.
// Sampling uses explicit transforms of the uniform stream (Box–Muller for the
// gaussian; Marsaglia–Tsang gamma for the chi-square inside the Student-t) so
// that a stream seed pins the byte-exact sequence.

namespace tvar {

enum class InnovationFamily { Gaussian, Uniform, StudentT };

struct InnovationSpec {
  InnovationFamily family = InnovationFamily::Gaussian;
  // Declared finite moment order q >= 2 (all moments are finite for the
  // gaussian and uniform families; the Student-t needs df > q).
  double moment_order = 4.0;
  // Degrees of freedom, Student-t only.  df > 2 is required so the variance
  // normalization sqrt((df-2)/df) is defined; df > moment_order is required
  // for the declared moment to exist.
  double df = 0.0;

  void validate() const;  // throws ValidationError
};

const char* innovation_family_name(InnovationFamily family);

// Draws one innovation at a time from a seeded stream.
class InnovationSampler {
 public:
  InnovationSampler(const InnovationSpec& spec, std::uint64_t stream_seed);

  double next();

  // Standard normal via Box–Muller (pairs cached).
  double next_normal();

 private:
  double next_gamma(double shape);  // Marsaglia–Tsang, shape >= 1

  InnovationSpec spec_;
  rng::Xoshiro256pp rng_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
  double t_scale_ = 0.0;  // sqrt((df-2)/df) for Student-t
};

// Bulk sampling with the stream positioned at its origin.
std::vector<double> sample_innovations(const InnovationSpec& spec, long count,
                                       std::uint64_t stream_seed);

}  // namespace tvar
