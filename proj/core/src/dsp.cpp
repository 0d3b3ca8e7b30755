#include "qrf/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <mutex>

namespace qrf {

namespace {

// FFTW plan creation is not thread-safe and not free; plans are cached per
// size behind a mutex and executed via the new-array interface.
class FftCache {
 public:
  static FftCache& instance() {
    static FftCache c;
    return c;
  }

  // Real-to-complex forward transform, n real -> n/2+1 complex.
  std::vector<std::complex<double>> forward(const std::vector<double>& in) {
    const std::size_t n = in.size();
    std::vector<double> buf(in);
    std::vector<std::complex<double>> out(n / 2 + 1);
    fftw_plan plan;
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = fwd_.find(n);
      if (it == fwd_.end()) {
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), buf.data(),
                                    reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
        fwd_[n] = plan;
      } else {
        plan = it->second;
      }
    }
    fftw_execute_dft_r2c(plan, buf.data(), reinterpret_cast<fftw_complex*>(out.data()));
    return out;
  }

  // Complex-to-real inverse; caller divides by n.
  std::vector<double> inverse(std::vector<std::complex<double>> spec, std::size_t n) {
    std::vector<double> out(n);
    fftw_plan plan;
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = inv_.find(n);
      if (it == inv_.end()) {
        plan = fftw_plan_dft_c2r_1d(static_cast<int>(n),
                                    reinterpret_cast<fftw_complex*>(spec.data()), out.data(),
                                    FFTW_ESTIMATE);
        inv_[n] = plan;
      } else {
        plan = it->second;
      }
    }
    fftw_execute_dft_c2r(plan, reinterpret_cast<fftw_complex*>(spec.data()), out.data());
    return out;
  }

 private:
  std::mutex mu_;
  std::map<std::size_t, fftw_plan> fwd_;
  std::map<std::size_t, fftw_plan> inv_;
};

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

void BandSpec::validate(double sample_rate) const {
  if (f_low < 0.0 || !(f_low < f_high))
    throw ValidationError("BandSpec: need 0 <= f_low < f_high");
  if (f_high > sample_rate / 2.0)
    throw ValidationError("BandSpec: f_high exceeds Nyquist");
}

WaveformRecord frequency_excision(const WaveformRecord& w, const BandSpec& band) {
  w.validate();
  band.validate(w.sample_rate);
  const std::size_t n = w.samples.size();
  auto spec = FftCache::instance().forward(w.samples);

  const double df = w.sample_rate / static_cast<double>(n);
  // Edge bins exactly at f_low / f_high are kept; a hair of relative slack
  // absorbs the bin-frequency rounding.
  const double lo = band.f_low * (1.0 - 1e-12) - 1e-9;
  const double hi = band.f_high * (1.0 + 1e-12) + 1e-9;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = df * static_cast<double>(k);
    if (f < lo || f > hi) spec[k] = 0.0;
  }

  WaveformRecord out = w;
  out.samples = FftCache::instance().inverse(std::move(spec), n);
  const double scale = 1.0 / static_cast<double>(n);
  for (double& s : out.samples) s *= scale;
  return out;
}

std::size_t max_energy_window_start(const std::vector<double>& samples, std::size_t out_len) {
  if (out_len == 0 || out_len > samples.size())
    throw ValidationError("max_energy_window_start: bad window length");
  double e = 0.0;
  for (std::size_t i = 0; i < out_len; ++i) e += samples[i] * samples[i];
  double best = e;
  std::size_t best_start = 0;
  for (std::size_t i = out_len; i < samples.size(); ++i) {
    e += samples[i] * samples[i] - samples[i - out_len] * samples[i - out_len];
    if (e > best) {
      best = e;
      best_start = i - out_len + 1;
    }
  }
  return best_start;
}

WaveformRecord time_excision(const WaveformRecord& w, std::size_t out_len) {
  w.validate();
  if (out_len == 0) throw ValidationError("time_excision: out_len must be positive");
  if (out_len > w.samples.size())
    throw ValidationError("time_excision: out_len exceeds record length");

  const std::size_t start = max_energy_window_start(w.samples, out_len);
  WaveformRecord out;
  out.sample_rate = w.sample_rate;
  out.label = w.label;
  out.samples.assign(w.samples.begin() + static_cast<std::ptrdiff_t>(start),
                     w.samples.begin() + static_cast<std::ptrdiff_t>(start + out_len));
  if (w.trigger_index >= 0 && static_cast<std::size_t>(w.trigger_index) >= start &&
      static_cast<std::size_t>(w.trigger_index) < start + out_len) {
    out.trigger_index = w.trigger_index - static_cast<int>(start);
  }
  return out;
}

WaveformRecord normalize(const WaveformRecord& w, NormalizationMode mode) {
  w.validate();
  const double e = w.energy();
  if (e <= 0.0) throw DegenerateInputError("normalize: zero-energy waveform");
  WaveformRecord out = w;
  const double scale = mode == NormalizationMode::kUnitEnergy ? 1.0 / std::sqrt(e) : 1.0 / e;
  for (double& s : out.samples) s *= scale;
  return out;
}

CorrelationSequence cross_correlation(const WaveformRecord& w1, const WaveformRecord& w2) {
  if (w1.samples.empty() || w2.samples.empty())
    throw ValidationError("cross_correlation: empty input");
  if (w1.sample_rate != w2.sample_rate)
    throw ValidationError("cross_correlation: sample rates differ");

  const std::size_t n1 = w1.samples.size();
  const std::size_t n2 = w2.samples.size();
  const std::size_t full = n1 + n2 - 1;
  const std::size_t padded = next_pow2(full);

  // R[tau] = sum_n w1[n] w2[n+tau] == conv(reverse(w1), w2) shifted by n1-1.
  std::vector<double> a(padded, 0.0), b(padded, 0.0);
  for (std::size_t i = 0; i < n1; ++i) a[i] = w1.samples[n1 - 1 - i];
  for (std::size_t i = 0; i < n2; ++i) b[i] = w2.samples[i];

  auto fa = FftCache::instance().forward(a);
  auto fb = FftCache::instance().forward(b);
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
  auto conv = FftCache::instance().inverse(std::move(fa), padded);

  CorrelationSequence r;
  r.lag_min = -static_cast<int>(n1 - 1);
  r.values.resize(full);
  const double scale = 1.0 / static_cast<double>(padded);
  for (std::size_t i = 0; i < full; ++i) r.values[i] = conv[i] * scale;
  return r;
}

double correlation_peak(const CorrelationSequence& r) {
  if (r.values.empty()) throw ValidationError("correlation_peak: empty sequence");
  double peak = 0.0;
  for (double v : r.values) peak = std::max(peak, std::abs(v));
  return peak;
}

CorrelationMatrix correlation_matrix(const std::vector<WaveformRecord>& set_a,
                                     const std::vector<WaveformRecord>& set_b, MatrixKind kind) {
  if (set_a.empty() || set_b.empty()) throw ValidationError("correlation_matrix: empty set");
  for (const auto* set : {&set_a, &set_b}) {
    for (const auto& w : *set) {
      if (std::abs(w.energy() - 1.0) > 1e-6)
        throw ValidationError("correlation_matrix: inputs must be unit-energy normalized");
    }
  }
  CorrelationMatrix m;
  m.kind = kind;
  m.values.assign(set_a.size(), std::vector<double>(set_b.size(), 0.0));
  for (std::size_t i = 0; i < set_a.size(); ++i) {
    for (std::size_t j = 0; j < set_b.size(); ++j) {
      m.values[i][j] = correlation_peak(cross_correlation(set_a[i], set_b[j]));
    }
  }
  return m;
}

SeparabilityReport separability_margin(const CorrelationMatrix& m_co,
                                       const CorrelationMatrix& m_cross) {
  if (m_co.values.empty() || m_cross.values.empty())
    throw ValidationError("separability_margin: empty matrix");
  SeparabilityReport rep;
  rep.min_co = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m_co.n_rows(); ++i) {
    for (std::size_t j = 0; j < m_co.n_cols(); ++j) {
      // Self-pairs carry no information; skip the diagonal of co matrices.
      if (m_co.kind == MatrixKind::kCoLocation && i == j) continue;
      rep.min_co = std::min(rep.min_co, m_co.values[i][j]);
    }
  }
  rep.max_cross = 0.0;
  for (const auto& row : m_cross.values)
    for (double v : row) rep.max_cross = std::max(rep.max_cross, v);
  rep.margin = rep.min_co - rep.max_cross;
  rep.separable = rep.margin > 0.0;
  rep.threshold = 0.5 * (rep.min_co + rep.max_cross);
  return rep;
}

WaveformRecord coherent_average(const std::vector<WaveformRecord>& ws) {
  if (ws.empty()) throw ValidationError("coherent_average: empty list");
  const std::size_t n = ws[0].samples.size();
  for (const auto& w : ws) {
    if (w.samples.size() != n) throw ValidationError("coherent_average: length mismatch");
    if (w.sample_rate != ws[0].sample_rate)
      throw ValidationError("coherent_average: sample-rate mismatch");
  }
  WaveformRecord out = ws[0];
  out.samples.assign(n, 0.0);
  for (const auto& w : ws)
    for (std::size_t i = 0; i < n; ++i) out.samples[i] += w.samples[i];
  const double inv = 1.0 / static_cast<double>(ws.size());
  for (double& s : out.samples) s *= inv;
  return out;
}

std::vector<Detection> detect_pulses(const WaveformRecord& stream, const DetectionConfig& cfg) {
  stream.validate();
  const int n = static_cast<int>(stream.samples.size());
  if (n < cfg.window || n < cfg.segment_len)
    throw ValidationError("detect_pulses: stream shorter than detection window");

  // Noise-energy statistics for a window of W samples of white noise with
  // per-sample variance s^2: mean W*s^2, variance 2*W*s^4.
  double sigma2;
  if (cfg.noise_sigma >= 0.0) {
    sigma2 = cfg.noise_sigma * cfg.noise_sigma;
  } else {
    if (n < cfg.noise_est_samples)
      throw ValidationError("detect_pulses: stream shorter than noise-estimation segment");
    double acc = 0.0;
    for (int i = 0; i < cfg.noise_est_samples; ++i) acc += stream.samples[i] * stream.samples[i];
    sigma2 = acc / cfg.noise_est_samples;
  }
  const double w = static_cast<double>(cfg.window);
  const double threshold = w * sigma2 + cfg.k * std::sqrt(2.0 * w) * sigma2;

  std::vector<Detection> detections;
  double energy = 0.0;
  for (int i = 0; i < cfg.window; ++i) energy += stream.samples[i] * stream.samples[i];

  int i = 0;
  while (i + cfg.window <= n) {
    if (energy > threshold) {
      // The pulse that triggered the crossing lies inside or just ahead of
      // the current window; locate its peak-|sample| position there.
      const int search_end = std::min(n, i + cfg.window + cfg.segment_len);
      int peak_at = i;
      double peak = -1.0;
      for (int j = i; j < search_end; ++j) {
        if (std::abs(stream.samples[j]) > peak) {
          peak = std::abs(stream.samples[j]);
          peak_at = j;
        }
      }
      Detection det;
      det.index = peak_at;
      const int slice_start = std::max(0, peak_at - cfg.segment_len);
      const int slice_end = std::min(n, peak_at + cfg.segment_len);
      WaveformRecord slice;
      slice.sample_rate = stream.sample_rate;
      slice.samples.assign(stream.samples.begin() + slice_start,
                           stream.samples.begin() + slice_end);
      det.segment = time_excision(slice, static_cast<std::size_t>(
                                             std::min<int>(cfg.segment_len, slice_end - slice_start)));
      detections.push_back(std::move(det));

      // Suppress duplicates for one refractory period past the peak, backing
      // off by one window so a pulse arriving exactly one period later is
      // still caught on its rising edge.
      i = std::max(i + 1, peak_at + cfg.refractory - cfg.window);
      if (i + cfg.window > n) break;
      energy = 0.0;
      for (int j = i; j < i + cfg.window; ++j) energy += stream.samples[j] * stream.samples[j];
      continue;
    }
    if (i + cfg.window < n) {
      energy += stream.samples[i + cfg.window] * stream.samples[i + cfg.window] -
                stream.samples[i] * stream.samples[i];
    }
    ++i;
  }
  return detections;
}

}  // namespace qrf
