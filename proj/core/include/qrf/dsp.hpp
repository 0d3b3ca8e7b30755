#pragma once

#include <cstddef>
#include <vector>

#include "qrf/common.hpp"

namespace qrf {

// Pass band for the frequency-domain excision (brickwall mask).
struct BandSpec {
  double f_low = 30e6;   // Hz
  double f_high = 300e6;  // Hz

  void validate(double sample_rate) const;
};

enum class MatrixKind { kCoLocation, kCrossLocation };

// n x n matrix of peak |cross-correlation| values between two waveform sets.
struct CorrelationMatrix {
  std::vector<std::vector<double>> values;
  MatrixKind kind = MatrixKind::kCoLocation;

  std::size_t n_rows() const { return values.size(); }
  std::size_t n_cols() const { return values.empty() ? 0 : values[0].size(); }
};

struct SeparabilityReport {
  double min_co = 0.0;
  double max_cross = 0.0;
  double margin = 0.0;      // min_co - max_cross
  double threshold = 0.0;   // midpoint, meaningful when separable
  bool separable = false;
};

// Full linear cross-correlation R[tau] = sum_n w1[n] * w2[n + tau],
// tau in [-(n1-1), n2-1].
struct CorrelationSequence {
  std::vector<double> values;
  int lag_min = 0;  // lag of values[0]

  double at_lag(int tau) const { return values[static_cast<std::size_t>(tau - lag_min)]; }
};

struct DetectionConfig {
  int window = 64;             // sliding energy window, samples
  double k = 5.0;              // threshold = mu + k * sigma of windowed noise energy
  int segment_len = 256;       // emitted segment length
  int refractory = 1200;       // samples suppressed after a detection (one pulse length)
  int noise_est_samples = 512; // leading quiet segment used when sigma not given
  double noise_sigma = -1.0;   // per-sample noise std-dev; < 0 = estimate from stream
};

struct Detection {
  int index = 0;               // peak-|sample| position in the stream
  WaveformRecord segment;      // 256-sample excised cut around the pulse
};

// Zeroes every DFT bin strictly outside [f_low, f_high] (and conjugates);
// bins exactly at the edges are kept. Length-preserving, output real.
WaveformRecord frequency_excision(const WaveformRecord& w, const BandSpec& band);

// Start index of the contiguous window of maximal energy.
std::size_t max_energy_window_start(const std::vector<double>& samples, std::size_t out_len);

// Crops to the contiguous out_len-sample window of maximal energy.
WaveformRecord time_excision(const WaveformRecord& w, std::size_t out_len = 256);

enum class NormalizationMode { kUnitEnergy, kLiteralPower };

// Unit-energy: divide by sqrt(sum s^2). Literal-power: divide by sum s^2
// (kept as a reproduction mode).
WaveformRecord normalize(const WaveformRecord& w,
                         NormalizationMode mode = NormalizationMode::kUnitEnergy);

// Transform-domain product, padded to n1+n2-1; agrees with the direct sum
// to ~1e-9 on unit-scale inputs.
CorrelationSequence cross_correlation(const WaveformRecord& w1, const WaveformRecord& w2);

// max over tau of |r[tau]|.
double correlation_peak(const CorrelationSequence& r);

// values[i][j] = correlation_peak(cross_correlation(A[i], B[j])). Inputs must
// be unit-energy normalized.
CorrelationMatrix correlation_matrix(const std::vector<WaveformRecord>& set_a,
                                     const std::vector<WaveformRecord>& set_b, MatrixKind kind);

// min over co-location entries (diagonal excluded for co matrices) minus max
// over cross-location entries.
SeparabilityReport separability_margin(const CorrelationMatrix& m_co,
                                       const CorrelationMatrix& m_cross);

// Sample-wise mean of trigger-aligned records.
WaveformRecord coherent_average(const std::vector<WaveformRecord>& ws);

// Sliding-window energy detector for free-running capture; fires where
// windowed energy exceeds mu + k*sigma of the noise-energy distribution, with
// a refractory period suppressing duplicates.
std::vector<Detection> detect_pulses(const WaveformRecord& stream, const DetectionConfig& cfg);

}  // namespace qrf
