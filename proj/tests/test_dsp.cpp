#include <doctest.h>

#include <cmath>
#include <vector>

#include "qrf/dsp.hpp"
#include "qrf/emission.hpp"

using namespace qrf;

namespace {

WaveformRecord tone(double freq, std::size_t n = 1200, double fs = 1e9, double amp = 1.0) {
  WaveformRecord w;
  w.sample_rate = fs;
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    w.samples[i] = amp * std::sin(2.0 * M_PI * freq * static_cast<double>(i) / fs);
  return w;
}

WaveformRecord noise_record(std::uint64_t seed, std::size_t n, double sigma = 1.0,
                            double fs = 1e9) {
  Rng rng(seed);
  WaveformRecord w;
  w.sample_rate = fs;
  w.samples.resize(n);
  for (auto& s : w.samples) s = sigma * rng.gaussian();
  return w;
}

// Brute-force O(n^2) cross-correlation oracle, same lag convention.
std::vector<double> xcorr_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  const int n1 = static_cast<int>(a.size());
  const int n2 = static_cast<int>(b.size());
  std::vector<double> r(static_cast<std::size_t>(n1 + n2 - 1), 0.0);
  for (int tau = -(n1 - 1); tau <= n2 - 1; ++tau) {
    double acc = 0.0;
    for (int n = 0; n < n1; ++n) {
      const int m = n + tau;
      if (m >= 0 && m < n2) acc += a[static_cast<std::size_t>(n)] * b[static_cast<std::size_t>(m)];
    }
    r[static_cast<std::size_t>(tau + n1 - 1)] = acc;
  }
  return r;
}

}  // namespace

TEST_CASE("frequency excision keeps bin-aligned in-band tones") {
  const auto w = tone(100e6);  // bin 120 of 1200 at 1 GS/s
  const auto out = frequency_excision(w, BandSpec{});
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    err += (out.samples[i] - w.samples[i]) * (out.samples[i] - w.samples[i]);
    ref += w.samples[i] * w.samples[i];
  }
  CHECK(std::sqrt(err / ref) < 1e-9);
}

TEST_CASE("frequency excision kills bin-aligned out-of-band tones") {
  const auto w = tone(10e6);  // bin 12, below the 30 MHz edge
  const auto out = frequency_excision(w, BandSpec{});
  CHECK(out.energy() < 1e-18 * w.energy());
}

TEST_CASE("frequency excision is linear") {
  const auto a = noise_record(1, 1200);
  const auto b = noise_record(2, 1200);
  WaveformRecord sum = a;
  for (std::size_t i = 0; i < sum.samples.size(); ++i) sum.samples[i] += b.samples[i];
  const auto ea = frequency_excision(a, BandSpec{});
  const auto eb = frequency_excision(b, BandSpec{});
  const auto es = frequency_excision(sum, BandSpec{});
  for (std::size_t i = 0; i < es.samples.size(); ++i)
    CHECK(es.samples[i] == doctest::Approx(ea.samples[i] + eb.samples[i]).epsilon(1e-12));
}

TEST_CASE("frequency excision is idempotent") {
  const auto w = noise_record(3, 1200);
  const auto once = frequency_excision(w, BandSpec{});
  const auto twice = frequency_excision(once, BandSpec{});
  for (std::size_t i = 0; i < once.samples.size(); ++i)
    CHECK(twice.samples[i] == doctest::Approx(once.samples[i]).epsilon(1e-12));
}

TEST_CASE("band exceeding Nyquist rejected") {
  const auto w = tone(100e6);
  BandSpec band;
  band.f_high = 600e6;
  CHECK_THROWS_AS(frequency_excision(w, band), ValidationError);
}

TEST_CASE("time excision basics") {
  SUBCASE("full-length window is the identity") {
    const auto w = noise_record(4, 300);
    const auto out = time_excision(w, 300);
    CHECK(out.samples == w.samples);
  }
  SUBCASE("window contains the global peak of a pulse in noise") {
    auto w = noise_record(5, 1200, 0.01);
    for (int i = 0; i < 40; ++i)
      w.samples[static_cast<std::size_t>(700 + i)] += std::exp(-i / 10.0);
    std::size_t argmax = 0;
    for (std::size_t i = 0; i < w.samples.size(); ++i)
      if (std::abs(w.samples[i]) > std::abs(w.samples[argmax])) argmax = i;
    const std::size_t start = max_energy_window_start(w.samples, 256);
    CHECK(argmax >= start);
    CHECK(argmax < start + 256);
  }
  SUBCASE("selected window beats every other window (exhaustive scan)") {
    const auto w = noise_record(6, 500);
    const std::size_t start = max_energy_window_start(w.samples, 128);
    auto window_energy = [&](std::size_t s) {
      double e = 0.0;
      for (std::size_t i = s; i < s + 128; ++i) e += w.samples[i] * w.samples[i];
      return e;
    };
    const double best = window_energy(start);
    for (std::size_t s = 0; s + 128 <= w.samples.size(); ++s)
      CHECK(window_energy(s) <= best + 1e-12);
  }
  SUBCASE("never increases energy, preserves sample rate") {
    const auto w = noise_record(7, 600);
    const auto out = time_excision(w, 100);
    CHECK(out.energy() <= w.energy());
    CHECK(out.sample_rate == w.sample_rate);
  }
  SUBCASE("zero-length window rejected") {
    const auto w = noise_record(8, 100);
    CHECK_THROWS_AS(time_excision(w, 0), ValidationError);
  }
}

TEST_CASE("normalization") {
  const auto w = noise_record(9, 256);
  SUBCASE("unit-energy output") {
    const auto out = normalize(w);
    CHECK(out.energy() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("scale invariance in unit-energy mode") {
    WaveformRecord scaled = w;
    for (auto& s : scaled.samples) s *= 7.5;
    const auto a = normalize(w);
    const auto b = normalize(scaled);
    for (std::size_t i = 0; i < a.samples.size(); ++i)
      CHECK(a.samples[i] == doctest::Approx(b.samples[i]).epsilon(1e-12));
  }
  SUBCASE("literal-power mode divides by total power") {
    const auto out = normalize(w, NormalizationMode::kLiteralPower);
    const double e = w.energy();
    CHECK(out.samples[0] == doctest::Approx(w.samples[0] / e).epsilon(1e-12));
  }
  SUBCASE("all-zero input rejected") {
    WaveformRecord z;
    z.samples.assign(64, 0.0);
    CHECK_THROWS_AS(normalize(z), DegenerateInputError);
  }
}

TEST_CASE("cross-correlation of a unit-energy waveform with itself peaks at lag 0") {
  const auto w = normalize(noise_record(10, 256));
  const auto r = cross_correlation(w, w);
  CHECK(r.at_lag(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(correlation_peak(r) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("delayed copy peaks at the delay lag") {
  const int d = 17;
  auto base = normalize(noise_record(11, 200));
  WaveformRecord delayed;
  delayed.sample_rate = base.sample_rate;
  delayed.samples.assign(200 + d, 0.0);
  for (std::size_t i = 0; i < base.samples.size(); ++i)
    delayed.samples[i + static_cast<std::size_t>(d)] = base.samples[i];
  const auto r = cross_correlation(base, delayed);
  double best = 0.0;
  int best_lag = 0;
  for (int tau = r.lag_min; tau < r.lag_min + static_cast<int>(r.values.size()); ++tau) {
    if (std::abs(r.at_lag(tau)) > best) {
      best = std::abs(r.at_lag(tau));
      best_lag = tau;
    }
  }
  CHECK(best_lag == d);
  CHECK(best == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("transform-domain correlation matches the O(n^2) oracle") {
  for (int trial = 0; trial < 5; ++trial) {
    const auto a = noise_record(100 + static_cast<std::uint64_t>(trial), 173);
    const auto b = noise_record(200 + static_cast<std::uint64_t>(trial), 241);
    const auto r = cross_correlation(a, b);
    const auto oracle = xcorr_oracle(a.samples, b.samples);
    REQUIRE(r.values.size() == oracle.size());
    for (std::size_t i = 0; i < oracle.size(); ++i)
      CHECK(r.values[i] == doctest::Approx(oracle[i]).epsilon(1e-9));
  }
}

TEST_CASE("correlation peak basics") {
  CorrelationSequence r;
  r.values = {0.0, -0.8, 0.3};
  CHECK(correlation_peak(r) == doctest::Approx(0.8));
  for (auto& v : r.values) v = -v;
  CHECK(correlation_peak(r) == doctest::Approx(0.8));
  r.values.assign(5, 0.0);
  CHECK(correlation_peak(r) == 0.0);
  r.values.clear();
  CHECK_THROWS_AS(correlation_peak(r), ValidationError);
}

TEST_CASE("peak is symmetric in argument order") {
  const auto a = normalize(noise_record(12, 128));
  const auto b = normalize(noise_record(13, 128));
  CHECK(correlation_peak(cross_correlation(a, b)) ==
        doctest::Approx(correlation_peak(cross_correlation(b, a))).epsilon(1e-12));
}

TEST_CASE("correlation matrix") {
  std::vector<WaveformRecord> set;
  for (int i = 0; i < 3; ++i)
    set.push_back(normalize(noise_record(20 + static_cast<std::uint64_t>(i), 128)));

  SUBCASE("identical sets give a unit diagonal and symmetry") {
    const auto m = correlation_matrix(set, set, MatrixKind::kCoLocation);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(m.values[i][i] == doctest::Approx(1.0).epsilon(1e-9));
      for (std::size_t j = 0; j < 3; ++j)
        CHECK(m.values[i][j] == doctest::Approx(m.values[j][i]).epsilon(1e-12));
    }
  }
  SUBCASE("entries match per-pair brute force and respect Cauchy-Schwarz") {
    const auto m = correlation_matrix(set, set, MatrixKind::kCoLocation);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        const auto oracle = xcorr_oracle(set[i].samples, set[j].samples);
        double peak = 0.0;
        for (double v : oracle) peak = std::max(peak, std::abs(v));
        CHECK(m.values[i][j] == doctest::Approx(peak).epsilon(1e-9));
        CHECK(m.values[i][j] >= 0.0);
        CHECK(m.values[i][j] <= 1.0 + 1e-9);
      }
    }
  }
  SUBCASE("unnormalized inputs rejected") {
    auto bad = set;
    for (auto& s : bad[0].samples) s *= 2.0;
    CHECK_THROWS_AS(correlation_matrix(bad, bad, MatrixKind::kCoLocation), ValidationError);
  }
}

TEST_CASE("separability margin") {
  CorrelationMatrix co, cross;
  co.kind = MatrixKind::kCoLocation;
  cross.kind = MatrixKind::kCrossLocation;
  co.values = {{1.0, 0.9}, {0.9, 1.0}};
  cross.values = {{0.5, 0.5}, {0.5, 0.5}};
  const auto rep = separability_margin(co, cross);
  CHECK(rep.min_co == doctest::Approx(0.9));  // diagonal excluded
  CHECK(rep.max_cross == doctest::Approx(0.5));
  CHECK(rep.margin == doctest::Approx(0.4));
  CHECK(rep.separable);

  co.values = {{1.0, 0.6}, {0.6, 1.0}};
  cross.values = {{0.7, 0.7}, {0.7, 0.7}};
  const auto rep2 = separability_margin(co, cross);
  CHECK(rep2.margin == doctest::Approx(-0.1));
  CHECK_FALSE(rep2.separable);
}

TEST_CASE("coherent averaging") {
  SUBCASE("identical copies average to themselves") {
    const auto w = noise_record(30, 200);
    const auto avg = coherent_average({w, w, w, w});
    for (std::size_t i = 0; i < w.samples.size(); ++i)
      CHECK(avg.samples[i] == doctest::Approx(w.samples[i]).epsilon(1e-15));
  }
  SUBCASE("residual noise variance scales as sigma^2/K") {
    const int k = 16;
    const double sigma = 0.5;
    double resid = 0.0;
    long count = 0;
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<WaveformRecord> copies;
      for (int i = 0; i < k; ++i)
        copies.push_back(noise_record(40000 + static_cast<std::uint64_t>(trial * k + i), 64, sigma));
      const auto avg = coherent_average(copies);
      for (double s : avg.samples) {
        resid += s * s;
        ++count;
      }
    }
    CHECK(resid / count == doctest::Approx(sigma * sigma / k).epsilon(0.10));
  }
  SUBCASE("empty list and mismatched lengths rejected") {
    CHECK_THROWS_AS(coherent_average({}), ValidationError);
    CHECK_THROWS_AS(coherent_average({noise_record(1, 64), noise_record(2, 65)}),
                    ValidationError);
  }
}

TEST_CASE("pulse detection") {
  const double sigma = 0.01;
  SUBCASE("three injected pulses found within two samples of truth") {
    auto stream = noise_record(50, 30000, sigma);
    const std::vector<int> truth = {5000, 12000, 22000};
    for (int at : truth) {
      for (int i = 0; i < 60; ++i)
        stream.samples[static_cast<std::size_t>(at + i)] +=
            0.1 * std::exp(-i / 15.0) * std::cos(0.7 * i);
    }
    DetectionConfig cfg;
    cfg.noise_sigma = sigma;
    cfg.refractory = 1200;
    const auto dets = detect_pulses(stream, cfg);
    REQUIRE(dets.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      // The injected peak sits at the pulse start (decaying envelope).
      CHECK(std::abs(dets[i].index - truth[i]) <= 2);
    }
  }
  SUBCASE("pure noise yields almost no false detections at k = 5") {
    long total = 0;
    for (int trial = 0; trial < 10; ++trial) {
      const auto stream = noise_record(60 + static_cast<std::uint64_t>(trial), 10000, sigma);
      DetectionConfig cfg;
      cfg.noise_sigma = sigma;
      total += static_cast<long>(detect_pulses(stream, cfg).size());
    }
    CHECK(total <= 3);  // expectation under the Gaussian tail is well below 1 per stream
  }
  SUBCASE("pulses inside one refractory period merge") {
    auto stream = noise_record(70, 8000, sigma);
    for (int at : {3000, 3400}) {
      for (int i = 0; i < 40; ++i)
        stream.samples[static_cast<std::size_t>(at + i)] += 0.1 * std::exp(-i / 10.0);
    }
    DetectionConfig cfg;
    cfg.noise_sigma = sigma;
    cfg.refractory = 1200;
    CHECK(detect_pulses(stream, cfg).size() == 1);
  }
  SUBCASE("stream shorter than the window rejected") {
    const auto stream = noise_record(80, 32, sigma);
    DetectionConfig cfg;
    cfg.noise_sigma = sigma;
    CHECK_THROWS_AS(detect_pulses(stream, cfg), ValidationError);
  }
}
