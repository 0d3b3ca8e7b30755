#include <benchmark/benchmark.h>

#include "qrf/attack.hpp"

using namespace qrf;

namespace {

WaveformRecord random_record(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  WaveformRecord w;
  w.samples.resize(n);
  for (auto& s : w.samples) s = rng.gaussian();
  return w;
}

void bm_synthesize_waveform(benchmark::State& state) {
  FingerprintSpec spec;
  spec.resonances = {{60e6, 0.015}, {120e6, 0.02}, {190e6, 0.025}};
  const auto fp = generate_fingerprint(7, spec);
  const AvalanchePulseSpec pulse;
  const NoiseSpec noise;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(synthesize_waveform(fp, pulse, noise, 1200, seed++, 0.01));
  }
}
BENCHMARK(bm_synthesize_waveform);

void bm_frequency_excision(benchmark::State& state) {
  const auto w = random_record(1, 1200);
  const BandSpec band;
  for (auto _ : state) benchmark::DoNotOptimize(frequency_excision(w, band));
}
BENCHMARK(bm_frequency_excision);

void bm_cross_correlation(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_record(2, n);
  const auto b = random_record(3, n);
  for (auto _ : state) benchmark::DoNotOptimize(cross_correlation(a, b));
}
BENCHMARK(bm_cross_correlation)->Arg(256)->Arg(1024)->Arg(4096);

void bm_correlation_matrix(benchmark::State& state) {
  std::vector<WaveformRecord> set;
  for (std::uint64_t i = 0; i < 16; ++i) set.push_back(normalize(random_record(10 + i, 256)));
  for (auto _ : state)
    benchmark::DoNotOptimize(correlation_matrix(set, set, MatrixKind::kCoLocation));
}
BENCHMARK(bm_correlation_matrix);

void bm_mlp_forward(benchmark::State& state) {
  const auto model = init_model({256, 128, 64, 32, 16, 8, 1}, 5);
  const auto input = random_record(6, 256).samples;
  for (auto _ : state) benchmark::DoNotOptimize(forward(model, input));
}
BENCHMARK(bm_mlp_forward);

void bm_detect_pulses(benchmark::State& state) {
  auto stream = random_record(8, 120000);
  for (auto& s : stream.samples) s *= 1e-3;
  for (int at = 5000; at < 115000; at += 12000)
    for (int i = 0; i < 40; ++i)
      stream.samples[static_cast<std::size_t>(at + i)] += 0.05 * std::exp(-i / 10.0);
  DetectionConfig cfg;
  cfg.noise_sigma = 1e-3;
  for (auto _ : state) benchmark::DoNotOptimize(detect_pulses(stream, cfg));
}
BENCHMARK(bm_detect_pulses);

}  // namespace

BENCHMARK_MAIN();
