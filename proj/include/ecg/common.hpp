#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace ecg {

// ---------------------------------------------------------------------------
// Errors. The CLI maps each class to a distinct exit code.
// ---------------------------------------------------------------------------

/// File or stream problem: missing input, short read, unwritable path.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Violated precondition or invariant; the message names the offending field.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-finite value encountered during optimization.
struct DivergenceError : std::runtime_error {
  explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

// ---------------------------------------------------------------------------
// Rng: deterministic random source. All draws go through explicit transforms
// (not std::*_distribution) so streams are reproducible across standard
// libraries. Every consumer gets its own stream via split().
// ---------------------------------------------------------------------------

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : seed_(seed), engine_(splitmix64(seed)) {}

  uint64_t seed() const { return seed_; }

  /// Independent child stream; same (seed, stream) always yields same draws.
  Rng split(uint64_t stream) const {
    return Rng(splitmix64(seed_ ^ (0xA24BAED4963EE407ULL + stream)));
  }

  uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
  uint64_t uniform_int(uint64_t n) {
    if (n == 0) throw ValidationError("uniform_int: n must be positive");
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % n;
  }

  /// Standard normal via Box-Muller; caches the paired draw.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Fisher-Yates; deterministic for a given stream.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Stream ids for the per-module split of the root seed.
namespace rng_stream {
constexpr uint64_t kSynth = 1;
constexpr uint64_t kCorrupt = 2;
constexpr uint64_t kBalance = 3;
constexpr uint64_t kSplit = 4;
constexpr uint64_t kStage1Init = 5;
constexpr uint64_t kStage1Train = 6;
constexpr uint64_t kStage2Init = 7;
constexpr uint64_t kStage2Train = 8;
constexpr uint64_t kGradCheck = 9;
}  // namespace rng_stream

inline double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace ecg
