#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace qrf {

// Thrown when an input violates a documented precondition.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an input is degenerate (all-zero waveform, empty key, ...).
class DegenerateInputError : public ValidationError {
 public:
  explicit DegenerateInputError(const std::string& what) : ValidationError(what) {}
};

// Deterministic random stream. All randomness in the project flows through
// this class so that runs are reproducible from named seeds across platforms;
// std::normal_distribution and friends are implementation-defined, so the
// transforms are spelled out here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n) {
    // Rejection sampling keeps the stream unbiased.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

  bool coin() { return (gen_() & 1u) != 0; }

  // Standard normal via Box-Muller with a cached spare.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Derives an independent child seed; used to hand disjoint streams to
  // sub-tasks (per-waveform, per-trial) so ordering cannot couple them.
  std::uint64_t derive(std::uint64_t salt) {
    std::uint64_t z = seed_mix_ ^ (salt + 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed ^ (salt + 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 gen_;
  std::uint64_t seed_mix_ = gen_();
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// A sampled RF transient: voltage vs. time at a fixed sample rate. The unit
// of all DSP and classification work.
struct WaveformRecord {
  double sample_rate = 1e9;          // Hz
  std::vector<double> samples;       // volts
  int trigger_index = -1;            // -1 = no trigger (free-running capture)
  int label = -1;                    // detector id 0/1, -1 = unlabeled

  std::size_t size() const { return samples.size(); }

  double energy() const {
    double e = 0.0;
    for (double s : samples) e += s * s;
    return e;
  }

  void validate() const;
};

}  // namespace qrf
