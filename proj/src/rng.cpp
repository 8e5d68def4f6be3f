#include "tbench/rng.hpp"

#include <cmath>
#include <utility>

#include "tbench/error.hpp"

namespace tbench {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// splitmix64 output function (Stafford mix13).
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

RngStream::RngStream(std::uint64_t master_seed, std::string stream_key)
    : master_seed_(master_seed), key_(std::move(stream_key)) {
  state_ = mix64(mix64(master_seed_ ^ kGolden) ^ fnv1a64(key_));
}

std::uint64_t RngStream::next_u64() {
  state_ += kGolden;
  return mix64(state_);
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

std::uint64_t RngStream::uniform_int(std::uint64_t n) {
  if (n == 0) throw Error("uniform_int: n must be > 0");
  if ((n & (n - 1)) == 0) return next_u64() & (n - 1);
  // Rejection sampling on the smallest covering bitmask keeps the draw
  // unbiased with integer-only arithmetic.
  std::uint64_t mask = n - 1;
  mask |= mask >> 1;
  mask |= mask >> 2;
  mask |= mask >> 4;
  mask |= mask >> 8;
  mask |= mask >> 16;
  mask |= mask >> 32;
  for (;;) {
    std::uint64_t r = next_u64() & mask;
    if (r < n) return r;
  }
}

double RngStream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  // u1 forced away from zero so log(u1) is finite.
  double u1 = static_cast<double>((next_u64() >> 11) | 1ull) * 0x1.0p-53;
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * 3.14159265358979323846 * u2;
  cached_normal_ = r * std::sin(theta);
  has_cached_normal_ = true;
  return r * std::cos(theta);
}

double RngStream::normal(double mean, double sigma) {
  return mean + sigma * normal();
}

RngStream RngStream::child(std::string_view subkey) const {
  std::string k = key_;
  k += '/';
  k += subkey;
  return RngStream(master_seed_, std::move(k));
}

}  // namespace tbench
