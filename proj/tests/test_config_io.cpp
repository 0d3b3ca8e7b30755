#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "qrf/config.hpp"
#include "qrf/waveform_io.hpp"

using namespace qrf;

TEST_CASE("empty config keeps every default") {
  const auto cfg = parse_config("");
  CHECK(cfg.scenario.master_seed == 1);
  CHECK(cfg.scenario.rho == 0.3);
  CHECK(cfg.scenario.snr_db == 20.0);
  CHECK(cfg.scenario.raw_samples == 1200);
  CHECK(cfg.scenario.excised_samples == 256);
  CHECK(cfg.scenario.band.f_low == 30e6);
  CHECK(cfg.scenario.band.f_high == 300e6);
  CHECK(cfg.bell_pairs == 100000);
  CHECK(cfg.bell_settings_deg[3] == -45.0);
}

TEST_CASE("keys, comments and whitespace parse") {
  const std::string text =
      "# scenario overrides\n"
      "seed = 99\n"
      "scenario.rho = 0.7\n"
      "  scenario.snr_db=14.5  \n"
      "\n"
      "mlp.hidden = 32,16\n"
      "train.optimizer = gd\n"
      "fingerprint.resonances = 50e6:0.01,150e6:0.02\n"
      "bell.beta_prime = 135\n"
      "sweep.values = 0,6,12\n";
  const auto cfg = parse_config(text);
  CHECK(cfg.scenario.master_seed == 99);
  CHECK(cfg.scenario.rho == 0.7);
  CHECK(cfg.scenario.snr_db == 14.5);
  CHECK(cfg.scenario.hidden_dims == std::vector<int>{32, 16});
  CHECK(cfg.scenario.train_cfg.optimizer == Optimizer::kGradientDescent);
  REQUIRE(cfg.scenario.fingerprint.resonances.size() == 2);
  CHECK(cfg.scenario.fingerprint.resonances[1].frequency_hz == 150e6);
  CHECK(cfg.bell_settings_deg[3] == 135.0);
  CHECK(cfg.sweep_values == std::vector<double>{0.0, 6.0, 12.0});
}

TEST_CASE("config errors name the problem") {
  SUBCASE("unknown key carries the line number") {
    try {
      parse_config("seed = 1\nscenario.bogus = 3\n");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("scenario.bogus") != std::string::npos);
      CHECK(msg.find("2") != std::string::npos);
    }
  }
  SUBCASE("malformed line") {
    CHECK_THROWS_AS(parse_config("just words\n"), ConfigError);
  }
  SUBCASE("non-numeric value") {
    CHECK_THROWS_AS(parse_config("scenario.rho = fast\n"), ConfigError);
  }
  SUBCASE("inverted band rejected with the key named") {
    try {
      parse_config("band.f_low = 400e6\nband.f_high = 100e6\n");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("band") != std::string::npos);
    }
  }
  SUBCASE("rho outside [0, 1] rejected") {
    CHECK_THROWS_AS(parse_config("scenario.rho = 1.5\n"), ConfigError);
  }
}

TEST_CASE("effective config round-trips") {
  auto cfg = parse_config("");
  cfg.scenario.master_seed = 424242;
  cfg.scenario.rho = 0.65;
  cfg.scenario.jammer_sigma = 2.5e-4;
  cfg.scenario.hidden_dims = {64, 8};
  cfg.sweep_values = {0.1, 0.2};
  cfg.bell_pairs = 777;
  const auto back = parse_config(config_to_string(cfg));
  CHECK(config_to_string(back) == config_to_string(cfg));
  CHECK(back.scenario.master_seed == 424242);
  CHECK(back.scenario.jammer_sigma == 2.5e-4);
  CHECK(back.scenario.hidden_dims == cfg.scenario.hidden_dims);
  CHECK(back.bell_pairs == 777);
}

TEST_CASE("waveform text format round-trips") {
  Rng rng(17);
  WaveformRecord w;
  w.sample_rate = 1e9;
  w.trigger_index = 100;
  w.label = 1;
  w.samples.resize(300);
  for (auto& s : w.samples) s = rng.gaussian();
  const std::string path = "roundtrip_waveform.txt";
  save_waveform_text(w, path);
  const auto back = load_waveform_text(path);
  CHECK(back.sample_rate == w.sample_rate);
  CHECK(back.trigger_index == w.trigger_index);
  CHECK(back.label == w.label);
  CHECK(back.samples == w.samples);
  std::remove(path.c_str());
}

TEST_CASE("waveform binary format round-trips bit-exactly") {
  Rng rng(18);
  WaveformRecord w;
  w.sample_rate = 2.5e9;
  w.trigger_index = -1;
  w.samples.resize(1200);
  for (auto& s : w.samples) s = rng.gaussian() * 1e-3;
  const std::string path = "roundtrip_waveform.bin";
  save_waveform_binary(w, path);
  const auto back = load_waveform_binary(path);
  CHECK(back.sample_rate == w.sample_rate);
  CHECK(back.trigger_index == w.trigger_index);
  CHECK(back.samples == w.samples);
  std::remove(path.c_str());

  SUBCASE("corrupt magic rejected") {
    std::ofstream f("bad_waveform.bin", std::ios::binary);
    f << "NOPE garbage";
    f.close();
    CHECK_THROWS(load_waveform_binary("bad_waveform.bin"));
    std::remove("bad_waveform.bin");
  }
}

TEST_CASE("matrix csv round-trips") {
  CorrelationMatrix m;
  m.kind = MatrixKind::kCrossLocation;
  m.values = {{0.1, 0.2, 0.3}, {0.4, 0.5, 0.6}, {0.7, 0.8, 0.9}};
  const std::string path = "roundtrip_matrix.csv";
  save_matrix_csv(m, path);
  const auto back = load_matrix_csv(path);
  CHECK(back.kind == MatrixKind::kCrossLocation);
  CHECK(back.values == m.values);
  std::remove(path.c_str());
}

TEST_CASE("checksum changes with content and is stable") {
  const std::string path = "checksum_probe.txt";
  {
    std::ofstream f(path);
    f << "alpha";
  }
  const auto c1 = file_checksum(path);
  CHECK(file_checksum(path) == c1);
  {
    std::ofstream f(path);
    f << "alphb";
  }
  CHECK(file_checksum(path) != c1);
  std::remove(path.c_str());
  CHECK_THROWS(file_checksum(path));
}
