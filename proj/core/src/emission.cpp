#include "qrf/emission.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace qrf {

void WaveformRecord::validate() const {
  if (samples.empty()) throw ValidationError("WaveformRecord: empty sample buffer");
  if (sample_rate <= 0.0) throw ValidationError("WaveformRecord: sample_rate must be positive");
  for (double s : samples) {
    if (!std::isfinite(s)) throw ValidationError("WaveformRecord: non-finite sample");
  }
  if (trigger_index >= 0 && static_cast<std::size_t>(trigger_index) >= samples.size())
    throw ValidationError("WaveformRecord: trigger_index out of bounds");
}

void AvalanchePulseSpec::validate() const {
  if (peak_current < 0.0) throw ValidationError("AvalanchePulseSpec: peak_current < 0");
  if (decay_tau <= 0.0) throw ValidationError("AvalanchePulseSpec: decay_tau must be positive");
  if (gauss_sigma <= 0.0) throw ValidationError("AvalanchePulseSpec: gauss_sigma must be positive");
  if (!(t_rise < t_fall)) throw ValidationError("AvalanchePulseSpec: t_rise must be < t_fall");
  if (shape == PulseShape::kSmoothedExponential && gauss_sigma >= decay_tau)
    throw ValidationError("AvalanchePulseSpec: gauss_sigma must be < decay_tau (impulse-like)");
}

void PointChargeKinematics::validate() const {
  if (charge < 0.0) throw ValidationError("PointChargeKinematics: charge < 0");
  if (speed_ratio >= 0.1)
    throw ValidationError("PointChargeKinematics: v/c >= 0.1 violates the slow-charge regime");
}

void FingerprintSpec::validate() const {
  if (length < 16) throw ValidationError("FingerprintSpec: length must be >= 16");
  if (sample_rate <= 0.0) throw ValidationError("FingerprintSpec: sample_rate must be positive");
  for (const auto& r : resonances) {
    if (r.frequency_hz <= 0.0 || r.frequency_hz >= sample_rate / 2.0)
      throw ValidationError("FingerprintSpec: resonance outside (0, Nyquist)");
    if (r.damping <= 0.0) throw ValidationError("FingerprintSpec: damping must be positive");
  }
}

void ChannelFingerprint::validate() const {
  if (taps.empty()) throw ValidationError("ChannelFingerprint: no taps");
  if (tap_energy() <= 0.0) throw ValidationError("ChannelFingerprint: zero tap energy");
  if (delay_samples < 0) throw ValidationError("ChannelFingerprint: negative delay");
}

void NoiseSpec::validate() const {
  if (thermal_sigma < 0.0) throw ValidationError("NoiseSpec: thermal_sigma < 0");
  if (digitizer_bits < 4 || digitizer_bits > 24)
    throw ValidationError("NoiseSpec: digitizer_bits outside [4, 24]");
  if (full_scale <= 0.0) throw ValidationError("NoiseSpec: full_scale must be positive");
}

namespace {

// Unscaled smoothed-exponential shape: causal exp(-(t-onset)/tau) convolved
// with a unit-area Gaussian of width sigma. Closed form via the
// complementary error function.
double smoothed_exp_shape(double t, const AvalanchePulseSpec& s) {
  const double dt = t - s.onset;
  const double tau = s.decay_tau;
  const double sig = s.gauss_sigma;
  const double arg = sig / (tau * 1.4142135623730951) - dt / (sig * 1.4142135623730951);
  // exp term can overflow for large negative dt; the erfc factor kills it.
  const double log_exp = sig * sig / (2.0 * tau * tau) - dt / tau;
  const double e = std::erfc(arg);
  if (e <= 0.0) return 0.0;
  return 0.5 * std::exp(log_exp + std::log(e));
}

// Peak of the unimodal shape, found by ternary search; cached per-spec would
// be nice but the search is already cheap (~1 us).
double smoothed_exp_peak_search(const AvalanchePulseSpec& s) {
  double lo = s.onset - 6.0 * s.gauss_sigma;
  double hi = s.onset + 6.0 * s.gauss_sigma + 3.0 * s.decay_tau;
  for (int i = 0; i < 120; ++i) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (smoothed_exp_shape(m1, s) < smoothed_exp_shape(m2, s))
      lo = m1;
    else
      hi = m2;
  }
  return smoothed_exp_shape(0.5 * (lo + hi), s);
}

// The peak depends only on (tau, sigma); a one-entry memo makes per-sample
// evaluation cheap inside synthesis loops.
double smoothed_exp_peak(const AvalanchePulseSpec& s) {
  thread_local double cached_tau = -1.0, cached_sigma = -1.0, cached_peak = 0.0;
  if (s.decay_tau != cached_tau || s.gauss_sigma != cached_sigma) {
    cached_tau = s.decay_tau;
    cached_sigma = s.gauss_sigma;
    cached_peak = smoothed_exp_peak_search(s);
  }
  return cached_peak;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps)
    return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double eps) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, eps, 40);
}

}  // namespace

double avalanche_current(double t, const AvalanchePulseSpec& spec) {
  spec.validate();
  if (spec.peak_current == 0.0) return 0.0;
  if (spec.shape == PulseShape::kRectangular) {
    return (t >= spec.onset && t < spec.onset + spec.decay_tau) ? spec.peak_current : 0.0;
  }
  const double peak = smoothed_exp_peak(spec);
  if (peak <= 0.0) return 0.0;
  return spec.peak_current / peak * smoothed_exp_shape(t, spec);
}

double discharge_charge(const AvalanchePulseSpec& spec) {
  spec.validate();
  if (spec.peak_current == 0.0) return 0.0;
  if (spec.shape == PulseShape::kRectangular) {
    const double lo = std::max(spec.t_rise, spec.onset);
    const double hi = std::min(spec.t_fall, spec.onset + spec.decay_tau);
    return hi > lo ? spec.peak_current * (hi - lo) : 0.0;
  }
  const double scale = spec.peak_current * spec.decay_tau;  // rough magnitude for eps
  return integrate([&](double t) { return avalanche_current(t, spec); }, spec.t_rise, spec.t_fall,
                   1e-12 * std::max(scale, 1e-300));
}

double radiated_power(const PointChargeKinematics& k, double speed_of_light) {
  k.validate();
  const double c3 = speed_of_light * speed_of_light * speed_of_light;
  return (2.0 / 3.0) * k.charge * k.charge * k.acceleration * k.acceleration / c3;
}

ChannelFingerprint generate_fingerprint(std::uint64_t seed, const FingerprintSpec& spec,
                                        int delay_samples) {
  spec.validate();
  if (delay_samples < 0) throw ValidationError("generate_fingerprint: negative delay");
  Rng rng(seed);
  std::vector<double> taps(static_cast<std::size_t>(spec.length), 0.0);
  const int n = spec.length;

  // Sparse multipath: direct path at tap 0 plus exponentially decaying echoes
  // at random delays with random signs.
  const int n_echoes = 6 + static_cast<int>(rng.uniform_int(5));
  taps[0] = 1.0;
  for (int e = 0; e < n_echoes; ++e) {
    const int d = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n - 1)));
    const double amp = std::exp(-1.5 * static_cast<double>(d) / n);
    const double sign = rng.coin() ? 1.0 : -1.0;
    taps[static_cast<std::size_t>(d)] += sign * amp * (0.4 + 0.6 * rng.uniform());
  }

  // Damped sinusoids at the configured cavity resonances; these dominate the
  // spectrum, matching a multi-peak FFT signature.
  for (const auto& r : spec.resonances) {
    const double w = 2.0 * M_PI * r.frequency_hz / spec.sample_rate;
    const double phase = 2.0 * M_PI * rng.uniform();
    const double amp = 1.5 * (0.8 + 0.4 * rng.uniform());
    for (int i = 0; i < n; ++i) {
      taps[static_cast<std::size_t>(i)] +=
          amp * std::exp(-r.damping * i) * std::sin(w * i + phase);
    }
  }

  double energy = 0.0;
  for (double t : taps) energy += t * t;
  const double scale = 1.0 / std::sqrt(energy);
  for (double& t : taps) t *= scale;

  ChannelFingerprint fp;
  fp.taps = std::move(taps);
  fp.delay_samples = delay_samples;
  fp.spec = spec;
  fp.seed = seed;
  return fp;
}

ChannelFingerprint derive_correlated_fingerprint(const ChannelFingerprint& base, double rho,
                                                 std::uint64_t seed) {
  base.validate();
  if (rho < 0.0 || rho > 1.0)
    throw ValidationError("derive_correlated_fingerprint: rho outside [0, 1]");

  ChannelFingerprint indep = generate_fingerprint(seed, base.spec, base.delay_samples);

  // Orthogonalize the fresh draw against the base so rho is exactly the
  // resulting inner product.
  const std::size_t n = base.taps.size();
  double dot = 0.0, base_e = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dot += indep.taps[i] * base.taps[i];
    base_e += base.taps[i] * base.taps[i];
  }
  std::vector<double> ortho(n);
  double oe = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ortho[i] = indep.taps[i] - dot / base_e * base.taps[i];
    oe += ortho[i] * ortho[i];
  }
  if (oe <= 0.0) throw ValidationError("derive_correlated_fingerprint: degenerate draw");
  const double onorm = 1.0 / std::sqrt(oe);
  const double bnorm = 1.0 / std::sqrt(base_e);

  ChannelFingerprint out = base;
  out.seed = seed;
  out.taps.assign(n, 0.0);
  const double mix = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  double e = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.taps[i] = rho * base.taps[i] * bnorm + mix * ortho[i] * onorm;
    e += out.taps[i] * out.taps[i];
  }
  const double s = 1.0 / std::sqrt(e);
  for (double& t : out.taps) t *= s;
  return out;
}

std::vector<double> quantize(const std::vector<double>& samples, const NoiseSpec& noise) {
  noise.validate();
  const double lsb = noise.lsb();
  const double half = noise.full_scale / 2.0;
  std::vector<double> out(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double clamped = std::clamp(samples[i], -half, half);
    out[i] = std::round(clamped / lsb) * lsb;
  }
  return out;
}

WaveformRecord synthesize_waveform(const ChannelFingerprint& fp, const AvalanchePulseSpec& pulse,
                                   const std::optional<NoiseSpec>& noise, int n_samples,
                                   std::uint64_t seed, double amplitude) {
  fp.validate();
  pulse.validate();
  if (noise) noise->validate();
  if (n_samples < static_cast<int>(fp.taps.size()) + fp.delay_samples)
    throw ValidationError("synthesize_waveform: buffer shorter than taps + delay");

  const double fs = fp.spec.sample_rate;
  const int n = n_samples;

  // Sampled avalanche impulse, normalized to unit peak so `amplitude` is the
  // received peak voltage of the direct path.
  std::vector<double> impulse(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    impulse[static_cast<std::size_t>(i)] = avalanche_current(static_cast<double>(i) / fs, pulse);
  }
  const double peak = pulse.peak_current > 0.0 ? pulse.peak_current : 1.0;
  for (double& v : impulse) v *= amplitude / peak;

  WaveformRecord w;
  w.sample_rate = fs;
  w.trigger_index = static_cast<int>(std::lround(pulse.onset * fs));
  w.samples.assign(static_cast<std::size_t>(n), 0.0);

  // Direct convolution with the taps, shifted by the arrival delay.
  const int m = static_cast<int>(fp.taps.size());
  for (int i = 0; i < n; ++i) {
    const double x = impulse[static_cast<std::size_t>(i)];
    if (x == 0.0) continue;
    const int lim = std::min(m, n - i - fp.delay_samples);
    for (int j = 0; j < lim; ++j) {
      w.samples[static_cast<std::size_t>(i + fp.delay_samples + j)] += x * fp.taps[static_cast<std::size_t>(j)];
    }
  }

  if (noise) {
    Rng rng(seed);
    for (double& s : w.samples) s += noise->thermal_sigma * rng.gaussian();
    w.samples = quantize(w.samples, *noise);
  }
  return w;
}

double amplitude_for_snr(const ChannelFingerprint& fp, const AvalanchePulseSpec& pulse,
                         const NoiseSpec& noise, int n_samples, double snr_db) {
  WaveformRecord clean = synthesize_waveform(fp, pulse, std::nullopt, n_samples, 0, 1.0);
  double peak = 0.0;
  for (double s : clean.samples) peak = std::max(peak, std::abs(s));
  if (peak <= 0.0) throw ValidationError("amplitude_for_snr: zero reference waveform");
  const double target = noise.thermal_sigma * std::pow(10.0, snr_db / 20.0);
  return target / peak;
}

}  // namespace qrf
