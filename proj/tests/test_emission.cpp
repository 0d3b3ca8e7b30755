#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "qrf/emission.hpp"

using namespace qrf;

namespace {

AvalanchePulseSpec reference_pulse() {
  AvalanchePulseSpec s;
  s.peak_current = 10e-3;
  s.decay_tau = 2.5e-9;
  s.gauss_sigma = 0.2e-9;
  s.t_rise = 0.0;
  s.t_fall = 200e-9;
  s.onset = 100e-9;
  return s;
}

// Independent quadrature oracle: composite trapezoid on a fine grid.
double trapezoid_charge(const AvalanchePulseSpec& s, int n_steps = 400000) {
  const double h = (s.t_fall - s.t_rise) / n_steps;
  double acc = 0.5 * (avalanche_current(s.t_rise, s) + avalanche_current(s.t_fall, s));
  for (int i = 1; i < n_steps; ++i) acc += avalanche_current(s.t_rise + i * h, s);
  return acc * h;
}

// Naive DFT magnitude at one frequency.
double dft_magnitude(const std::vector<double>& x, double freq, double fs) {
  std::complex<double> acc(0.0, 0.0);
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double phi = -2.0 * M_PI * freq * static_cast<double>(n) / fs;
    acc += x[n] * std::complex<double>(std::cos(phi), std::sin(phi));
  }
  return std::abs(acc);
}

ChannelFingerprint impulse_channel(double fs = 1e9) {
  ChannelFingerprint fp;
  fp.taps = {1.0};
  fp.delay_samples = 0;
  fp.spec.length = 16;
  fp.spec.sample_rate = fs;
  return fp;
}

}  // namespace

TEST_CASE("avalanche current is causal") {
  const auto s = reference_pulse();
  const double before = avalanche_current(s.onset - 10.0 * s.gauss_sigma, s);
  CHECK(std::abs(before) < 1e-6 * s.peak_current);
}

TEST_CASE("avalanche current peaks at the configured 10 mA") {
  const auto s = reference_pulse();  // gauss_sigma <= decay_tau / 10
  double peak = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double t = s.onset - 5e-9 + i * 1e-12;
    peak = std::max(peak, avalanche_current(t, s));
  }
  CHECK(peak == doctest::Approx(10e-3).epsilon(0.01));
}

TEST_CASE("discharge charge matches an independent quadrature oracle") {
  const auto s = reference_pulse();
  const double q = discharge_charge(s);
  const double oracle = trapezoid_charge(s);
  CHECK(q == doctest::Approx(oracle).epsilon(1e-3));
}

TEST_CASE("rectangular pulse charge: 10 mA x 10 ns = 1e-10 C") {
  AvalanchePulseSpec s;
  s.shape = PulseShape::kRectangular;
  s.peak_current = 10e-3;
  s.decay_tau = 10e-9;  // rectangle width
  s.onset = 0.0;
  s.t_rise = 0.0;
  s.t_fall = 10e-9;
  CHECK(discharge_charge(s) == doctest::Approx(1.0e-10).epsilon(1e-12));
}

TEST_CASE("zero-amplitude pulse carries zero charge") {
  auto s = reference_pulse();
  s.peak_current = 0.0;
  CHECK(discharge_charge(s) == 0.0);
}

TEST_CASE("near-pure exponential matches the closed form") {
  AvalanchePulseSpec s;
  s.peak_current = 10e-3;
  s.decay_tau = 5e-9;
  s.gauss_sigma = 5e-12;  // sigma << tau: effectively a pure exponential
  s.onset = 0.0;
  s.t_rise = 0.0;
  s.t_fall = 50e-9;
  const double closed = 10e-3 * 5e-9 * (1.0 - std::exp(-10.0));
  CHECK(discharge_charge(s) == doctest::Approx(closed).epsilon(1e-3));
}

TEST_CASE("charge is invariant under time translation") {
  auto s = reference_pulse();
  const double q0 = discharge_charge(s);
  s.onset += 37e-9;
  s.t_rise += 37e-9;
  s.t_fall += 37e-9;
  CHECK(discharge_charge(s) == doctest::Approx(q0).epsilon(1e-9));
}

TEST_CASE("degenerate integration interval rejected") {
  auto s = reference_pulse();
  s.t_rise = s.t_fall;
  CHECK_THROWS_AS(discharge_charge(s), ValidationError);
}

TEST_CASE("radiated power basics") {
  PointChargeKinematics k;
  k.charge = 2.0;
  k.acceleration = 0.0;
  CHECK(radiated_power(k) == 0.0);

  k.charge = 1.0;
  k.acceleration = 1.0;
  CHECK(radiated_power(k, 1.0) == doctest::Approx(2.0 / 3.0));

  const double p1 = radiated_power(k);
  k.charge = 2.0;
  CHECK(radiated_power(k) == doctest::Approx(4.0 * p1));
  k.charge = 1.0;
  k.acceleration = 2.0;
  CHECK(radiated_power(k) == doctest::Approx(4.0 * p1));

  // Even in acceleration.
  k.acceleration = -2.0;
  CHECK(radiated_power(k) == doctest::Approx(4.0 * p1));

  k.speed_ratio = 0.5;
  CHECK_THROWS_AS(radiated_power(k), ValidationError);
}

TEST_CASE("fingerprint generation is deterministic and unit energy") {
  FingerprintSpec spec;
  spec.length = 128;
  spec.sample_rate = 1e9;
  spec.resonances = {{60e6, 0.015}, {120e6, 0.02}, {190e6, 0.025}};
  const auto a = generate_fingerprint(42, spec);
  const auto b = generate_fingerprint(42, spec);
  CHECK(a.taps == b.taps);
  CHECK(a.tap_energy() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(generate_fingerprint(43, spec).taps != a.taps);
}

TEST_CASE("fingerprint spectrum shows the configured resonances") {
  FingerprintSpec spec;
  spec.length = 128;
  spec.sample_rate = 1e9;
  spec.resonances = {{60e6, 0.015}, {120e6, 0.02}, {190e6, 0.025}};
  const auto fp = generate_fingerprint(7, spec);

  // In-band median magnitude over 30-300 MHz from a direct DFT.
  std::vector<double> inband;
  for (double f = 30e6; f <= 300e6; f += 2e6) inband.push_back(dft_magnitude(fp.taps, f, 1e9));
  std::sort(inband.begin(), inband.end());
  const double median = inband[inband.size() / 2];
  for (const auto& r : spec.resonances) {
    CHECK(dft_magnitude(fp.taps, r.frequency_hz, 1e9) >= 3.0 * median);
  }
}

TEST_CASE("resonance outside the Nyquist band rejected") {
  FingerprintSpec spec;
  spec.length = 64;
  spec.sample_rate = 1e9;
  spec.resonances = {{600e6, 0.02}};
  CHECK_THROWS_AS(generate_fingerprint(1, spec), ValidationError);
}

TEST_CASE("correlated fingerprint derivation") {
  FingerprintSpec spec;
  spec.length = 128;
  spec.sample_rate = 1e9;
  spec.resonances = {{60e6, 0.015}, {120e6, 0.02}};
  const auto base = generate_fingerprint(5, spec);

  SUBCASE("rho = 1 reproduces the base") {
    const auto same = derive_correlated_fingerprint(base, 1.0, 99);
    for (std::size_t i = 0; i < base.taps.size(); ++i)
      CHECK(same.taps[i] == doctest::Approx(base.taps[i]).epsilon(1e-9));
  }
  SUBCASE("rho = 0 decorrelates on average") {
    double acc = 0.0;
    for (int s = 0; s < 100; ++s) {
      const auto other = derive_correlated_fingerprint(base, 0.0, 1000 + s);
      double dot = 0.0;
      for (std::size_t i = 0; i < base.taps.size(); ++i) dot += base.taps[i] * other.taps[i];
      acc += std::abs(dot);
    }
    CHECK(acc / 100.0 < 0.05);
  }
  SUBCASE("output has unit energy") {
    const auto other = derive_correlated_fingerprint(base, 0.3, 11);
    CHECK(other.tap_energy() == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("rho outside [0,1] rejected") {
    CHECK_THROWS_AS(derive_correlated_fingerprint(base, 1.5, 1), ValidationError);
  }
}

TEST_CASE("quantizer basics") {
  NoiseSpec n;
  n.digitizer_bits = 8;
  n.full_scale = 1.0;
  CHECK(quantize({0.0}, n)[0] == 0.0);

  Rng rng(3);
  const double lsb = n.lsb();
  for (int i = 0; i < 1000; ++i) {
    const double v = (rng.uniform() - 0.5) * 0.9;  // in range
    const double q = quantize({v}, n)[0];
    CHECK(std::abs(q - v) <= lsb / 2.0 + 1e-15);
  }
}

TEST_CASE("quantizer error variance on a ramp is LSB^2/12") {
  NoiseSpec n;
  n.digitizer_bits = 10;
  n.full_scale = 1.0;
  const double lsb = n.lsb();
  const int count = 200000;
  std::vector<double> ramp(count);
  for (int i = 0; i < count; ++i) ramp[i] = -0.45 + 0.9 * i / static_cast<double>(count);
  const auto q = quantize(ramp, n);
  double var = 0.0;
  for (int i = 0; i < count; ++i) var += (q[i] - ramp[i]) * (q[i] - ramp[i]);
  var /= count;
  CHECK(var == doctest::Approx(lsb * lsb / 12.0).epsilon(0.05));
}

TEST_CASE("identity channel reproduces the sampled avalanche pulse") {
  const auto pulse = reference_pulse();
  const auto fp = impulse_channel();
  const auto w = synthesize_waveform(fp, pulse, std::nullopt, 600, 0, 1.0);
  for (int i = 0; i < 600; ++i) {
    const double expected = avalanche_current(i * 1e-9, pulse) / pulse.peak_current;
    CHECK(w.samples[static_cast<std::size_t>(i)] == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(w.trigger_index == 100);
}

TEST_CASE("synthesis convolution matches a direct O(n^2) sum") {
  FingerprintSpec spec;
  spec.length = 64;
  spec.sample_rate = 1e9;
  spec.resonances = {{80e6, 0.03}};
  const auto fp = generate_fingerprint(21, spec);
  const auto pulse = reference_pulse();
  const int n = 512;
  const auto w = synthesize_waveform(fp, pulse, std::nullopt, n, 0, 2.5);

  std::vector<double> impulse(n);
  for (int i = 0; i < n; ++i)
    impulse[static_cast<std::size_t>(i)] = 2.5 * avalanche_current(i * 1e-9, pulse) / pulse.peak_current;
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j <= i; ++j) {
      if (i - j < static_cast<int>(fp.taps.size()))
        acc += impulse[static_cast<std::size_t>(j)] * fp.taps[static_cast<std::size_t>(i - j)];
    }
    CHECK(w.samples[static_cast<std::size_t>(i)] == doctest::Approx(acc).epsilon(1e-9));
  }
}

TEST_CASE("zero impulse leaves thermal noise plus quantization error") {
  auto pulse = reference_pulse();
  pulse.peak_current = 0.0;
  const auto fp = impulse_channel();
  NoiseSpec n;
  n.thermal_sigma = 1e-3;
  n.digitizer_bits = 12;
  n.full_scale = 0.5;
  const auto w = synthesize_waveform(fp, pulse, n, 10000, 77, 1.0);
  double var = 0.0;
  for (double s : w.samples) var += s * s;
  var /= static_cast<double>(w.samples.size());
  const double lsb = n.lsb();
  CHECK(var == doctest::Approx(n.thermal_sigma * n.thermal_sigma + lsb * lsb / 12.0).epsilon(0.05));
}

TEST_CASE("synthesis is linear before quantization") {
  FingerprintSpec spec;
  spec.length = 32;
  spec.sample_rate = 1e9;
  const auto fp = generate_fingerprint(8, spec);
  const auto pulse = reference_pulse();
  const auto w1 = synthesize_waveform(fp, pulse, std::nullopt, 400, 0, 1.0);
  const auto w3 = synthesize_waveform(fp, pulse, std::nullopt, 400, 0, 3.0);
  for (std::size_t i = 0; i < w1.samples.size(); ++i)
    CHECK(w3.samples[i] == doctest::Approx(3.0 * w1.samples[i]).epsilon(1e-12));
}

TEST_CASE("synthesis is deterministic by seed") {
  FingerprintSpec spec;
  spec.length = 32;
  spec.sample_rate = 1e9;
  const auto fp = generate_fingerprint(8, spec);
  const auto pulse = reference_pulse();
  NoiseSpec n;
  const auto a = synthesize_waveform(fp, pulse, n, 400, 1234, 0.01);
  const auto b = synthesize_waveform(fp, pulse, n, 400, 1234, 0.01);
  CHECK(a.samples == b.samples);
  const auto c = synthesize_waveform(fp, pulse, n, 400, 1235, 0.01);
  CHECK(a.samples != c.samples);
}

TEST_CASE("single unit tap preserves impulse energy exactly") {
  ChannelFingerprint fp;
  fp.taps = {1.0};
  fp.spec.length = 1;
  fp.spec.sample_rate = 1e9;
  const auto pulse = reference_pulse();
  const int n = 4096;  // generous tail so the convolution is not truncated
  const auto w = synthesize_waveform(fp, pulse, std::nullopt, n, 0, 1.0);

  double impulse_energy = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = avalanche_current(i * 1e-9, pulse) / pulse.peak_current;
    impulse_energy += v * v;
  }
  CHECK(w.energy() == doctest::Approx(impulse_energy).epsilon(1e-9));
}

TEST_CASE("buffer shorter than taps plus delay rejected") {
  FingerprintSpec spec;
  spec.length = 64;
  spec.sample_rate = 1e9;
  auto fp = generate_fingerprint(1, spec);
  fp.delay_samples = 10;
  CHECK_THROWS_AS(synthesize_waveform(fp, reference_pulse(), std::nullopt, 70, 0, 1.0),
                  ValidationError);
}
