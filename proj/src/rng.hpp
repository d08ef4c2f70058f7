#pragma once

#include <cstdint>

// Deterministic random number plumbing.
//
// Every random quantity in the library is drawn from an explicitly seeded
// stream so that results are reproducible across runs, platforms, and worker
// counts.  The contract:
//
//   stream_seed = mix_stream(master_seed, purpose_tag, index)
//
// where mix_stream applies the splitmix64 finalizer three times, folding in
// the tag and the index between applications.  Replicate r of a Monte Carlo
// experiment simulates its path from mix_stream(master_seed, kTagPath, r);
// inside a path the innovation stream and the initial-state stream are derived
// from the path seed with kTagInnovations / kTagInitState.  Streams with
// different tags or indices are decorrelated by the 64-bit avalanche of the
// mixer.
//
// The generator behind a stream is xoshiro256++ (Blackman & Vigna), seeded by
// expanding the stream seed through splitmix64 as its authors recommend.

namespace tvar::rng {

inline constexpr std::uint64_t kTagInnovations = 1;
inline constexpr std::uint64_t kTagInitState = 2;
inline constexpr std::uint64_t kTagPath = 3;
inline constexpr std::uint64_t kTagScenario = 4;

// splitmix64 finalizer: one output of the splitmix64 engine with state x.
std::uint64_t splitmix64(std::uint64_t x);

// Derives a stream seed; see the contract above.
std::uint64_t mix_stream(std::uint64_t master_seed, std::uint64_t purpose_tag,
                         std::uint64_t index);

class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t stream_seed);

  std::uint64_t next();

  // Uniform on [0,1), 53-bit resolution.
  double uniform01();

  // Uniform on (0,1]; safe as a log() argument.
  double uniform01_open_low();

 private:
  std::uint64_t s_[4];
};

}  // namespace tvar::rng
