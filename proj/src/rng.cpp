#include "rng.hpp"

namespace tvar::rng {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_stream(std::uint64_t master_seed, std::uint64_t purpose_tag,
                         std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(master_seed) ^ purpose_tag) ^ index);
}

Xoshiro256pp::Xoshiro256pp(std::uint64_t stream_seed) {
  // Seed expansion via a splitmix64 engine, per the xoshiro reference code.
  std::uint64_t sm = stream_seed;
  for (auto& word : s_) {
    sm += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = sm;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    word = z ^ (z >> 31);
  }
  // xoshiro requires a non-zero state; unreachable for splitmix expansion but
  // kept as a guard.
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

static inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

std::uint64_t Xoshiro256pp::next() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Xoshiro256pp::uniform01() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Xoshiro256pp::uniform01_open_low() {
  return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
}

}  // namespace tvar::rng
