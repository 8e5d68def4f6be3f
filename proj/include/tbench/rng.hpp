#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tbench {

/// Deterministic, keyed random stream. A stream is fully identified by
/// (master_seed, stream_key): the same pair always yields the same sequence,
/// on every platform, because all state transitions are pure 64-bit integer
/// arithmetic (splitmix64). Distinct keys give independent streams, so
/// parallel work derives children by key instead of sharing a generator.
class RngStream {
public:
  RngStream(std::uint64_t master_seed, std::string stream_key);

  std::uint64_t next_u64();

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n);
  /// Standard normal via Box-Muller (second value cached).
  double normal();
  double normal(double mean, double sigma);

  /// Independent child stream keyed "<this key>/<subkey>". Does not consume
  /// or depend on this stream's draw position.
  RngStream child(std::string_view subkey) const;

  std::uint64_t master_seed() const { return master_seed_; }
  const std::string& stream_key() const { return key_; }

private:
  std::uint64_t master_seed_;
  std::string key_;
  std::uint64_t state_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// In-place Fisher-Yates shuffle driven by the stream.
template <typename T>
void shuffle(std::vector<T>& v, RngStream& rng) {
  if (v.size() < 2) return;
  for (std::size_t i = v.size() - 1; i > 0; --i) {
    std::size_t j = static_cast<std::size_t>(rng.uniform_int(i + 1));
    std::swap(v[i], v[j]);
  }
}

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace tbench
