// qrf: command-line front-end for the RF side-channel simulator.
//
// Subcommands map one-to-one onto the pipeline stages: synth, dsp, train,
// attack learn, attack intercept, sweep, bell, demo.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "qrf/attack.hpp"
#include "qrf/config.hpp"
#include "qrf/qkd.hpp"
#include "qrf/waveform_io.hpp"

namespace fs = std::filesystem;
using namespace qrf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitThreshold = 4;

struct RunContext {
  ToolConfig cfg;
  std::string config_path;
  std::string command;
  fs::path out_dir;
  std::vector<std::string> artifacts;

  fs::path out(const std::string& name) {
    artifacts.push_back(name);
    return out_dir / name;
  }

  void write_manifest() {
    std::ofstream m(out_dir / "manifest.txt");
    m << "command = " << command << "\n";
    m << "config = " << config_path << "\n";
    m << "master_seed = " << cfg.scenario.master_seed << "\n";
    for (const auto& name : artifacts) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%016llx",
                    static_cast<unsigned long long>(file_checksum((out_dir / name).string())));
      m << "artifact " << name << " fnv1a64=" << buf << "\n";
    }
  }
};

RunContext make_context(const std::string& config_path, const std::string& out_dir,
                        const std::string& command) {
  RunContext ctx;
  ctx.cfg = load_config(config_path);
  ctx.config_path = config_path;
  ctx.command = command;
  ctx.out_dir = out_dir;
  if (const char* env = std::getenv("QRF_SEED")) {
    ctx.cfg.scenario.master_seed = std::stoull(env);
  }
  fs::create_directories(ctx.out_dir);
  save_config(ctx.cfg, (ctx.out_dir / "effective_config.txt").string());
  ctx.artifacts.push_back("effective_config.txt");
  return ctx;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

std::pair<ChannelFingerprint, ChannelFingerprint> scenario_fingerprints(const ScenarioConfig& sc) {
  ChannelFingerprint fp0 = generate_fingerprint(sc.fingerprint_seed, sc.fingerprint);
  ChannelFingerprint fp1 =
      derive_correlated_fingerprint(fp0, sc.rho, Rng::derive_seed(sc.master_seed, 0x51D));
  return {fp0, fp1};
}

int cmd_synth(RunContext& ctx, bool binary) {
  const ScenarioConfig& sc = ctx.cfg.scenario;
  auto [fp0, fp1] = scenario_fingerprints(sc);
  const NoiseSpec noise = sc.effective_noise();
  for (int d = 0; d < 2; ++d) {
    const ChannelFingerprint& fp = d == 0 ? fp0 : fp1;
    const double amp = sc.effective_amplitude(fp);
    for (int i = 0; i < sc.waveforms_per_detector; ++i) {
      WaveformRecord w = synthesize_waveform(
          fp, sc.pulse, noise, sc.raw_samples,
          Rng::derive_seed(Rng::derive_seed(sc.master_seed, 0xA0 + static_cast<std::uint64_t>(d)),
                           static_cast<std::uint64_t>(i)),
          amp);
      w.label = d;
      char name[64];
      std::snprintf(name, sizeof name, "spd%d_%03d.%s", d, i, binary ? "qrfw" : "txt");
      if (binary)
        save_waveform_binary(w, ctx.out(name).string());
      else
        save_waveform_text(w, ctx.out(name).string());
    }
  }
  ctx.write_manifest();
  return kExitOk;
}

int cmd_dsp(RunContext& ctx) {
  LearningResult learned = run_learning_phase(ctx.cfg.scenario);
  save_matrix_csv(learned.m_co, ctx.out("m_co.csv").string());
  save_matrix_csv(learned.m_cross, ctx.out("m_cross.csv").string());
  std::ostringstream rep;
  rep << "min_co = " << learned.separability.min_co << "\n"
      << "max_cross = " << learned.separability.max_cross << "\n"
      << "margin = " << learned.separability.margin << "\n"
      << "threshold = " << learned.separability.threshold << "\n"
      << "separable = " << (learned.separability.separable ? 1 : 0) << "\n";
  write_text(ctx.out("separability.txt"), rep.str());
  ctx.write_manifest();
  std::cout << "separability margin: " << learned.separability.margin << "\n";
  return kExitOk;
}

void save_learning_artifacts(RunContext& ctx, const LearningResult& learned) {
  save_model(learned.model, ctx.out("model.txt").string());
  save_waveform_text(learned.templates.average0, ctx.out("template0.txt").string());
  save_waveform_text(learned.templates.average1, ctx.out("template1.txt").string());
  save_matrix_csv(learned.m_co, ctx.out("m_co.csv").string());
  save_matrix_csv(learned.m_cross, ctx.out("m_cross.csv").string());
  std::ostringstream rep;
  rep << "[learning-report]\n"
      << "test_accuracy = " << learned.test_report.accuracy << "\n"
      << "separability_margin = " << learned.separability.margin << "\n"
      << "separable = " << (learned.separability.separable ? 1 : 0) << "\n"
      << "inseparable_configuration = " << (learned.inseparable ? 1 : 0) << "\n"
      << "phase_detectable = " << (learned.phase_detectable ? 1 : 0) << "\n";
  write_text(ctx.out("learning_report.txt"), rep.str());
}

int cmd_train(RunContext& ctx) {
  LearningResult learned = run_learning_phase(ctx.cfg.scenario);
  save_learning_artifacts(ctx, learned);
  ctx.write_manifest();
  std::cout << "test accuracy: " << learned.test_report.accuracy << "\n";
  return kExitOk;
}

LearningResult reload_learning(const ScenarioConfig& sc, const fs::path& model_dir) {
  if (!fs::exists(model_dir / "model.txt"))
    throw ValidationError("no trained model at " + (model_dir / "model.txt").string() +
                          "; run `qrf attack learn` first");
  LearningResult learned;
  learned.model = load_model((model_dir / "model.txt").string());
  learned.templates.average0 = load_waveform_text((model_dir / "template0.txt").string());
  learned.templates.average1 = load_waveform_text((model_dir / "template1.txt").string());
  auto peak_index = [](const WaveformRecord& w) {
    int at = 0;
    double peak = -1.0;
    for (std::size_t i = 0; i < w.samples.size(); ++i) {
      if (std::abs(w.samples[i]) > peak) {
        peak = std::abs(w.samples[i]);
        at = static_cast<int>(i);
      }
    }
    return at;
  };
  learned.templates.peak_offset0 = peak_index(learned.templates.average0);
  learned.templates.peak_offset1 = peak_index(learned.templates.average1);
  auto [fp0, fp1] = scenario_fingerprints(sc);
  learned.fp0 = std::move(fp0);
  learned.fp1 = std::move(fp1);
  return learned;
}

int cmd_intercept(RunContext& ctx, const std::string& model_dir) {
  const ScenarioConfig& sc = ctx.cfg.scenario;
  LearningResult learned = reload_learning(sc, model_dir);
  SessionTranscript session =
      run_bb84(sc.session_length, Rng::derive_seed(sc.master_seed, 0xBB84), sc.detector_efficiency);
  InterceptResult result = run_intercept_phase(sc, learned, session);
  save_transcript(session, ctx.out("session_transcript.txt").string());
  write_text(ctx.out("attack_report.txt"), result.report.to_string());
  ctx.write_manifest();
  std::cout << "key clone fidelity: " << result.report.key_clone_fidelity
            << " (coverage " << result.report.coverage << ")\n";
  return kExitOk;
}

int cmd_sweep(RunContext& ctx) {
  if (ctx.cfg.sweep_values.empty())
    throw ConfigError("config: sweep.values is required for the sweep command");
  SweepTable table = countermeasure_sweep(ctx.cfg.scenario, ctx.cfg.sweep_parameter,
                                          ctx.cfg.sweep_values, ctx.cfg.sweep_trials,
                                          ctx.cfg.sweep_intercept);
  write_text(ctx.out("sweep.csv"), sweep_to_string(table));
  ctx.write_manifest();
  return kExitOk;
}

int cmd_bell(RunContext& ctx) {
  BellCounts counts = sample_singlet(ctx.cfg.bell_settings_deg, ctx.cfg.bell_pairs,
                                     Rng::derive_seed(ctx.cfg.scenario.master_seed, 0xBE11));
  const double s = chsh_S(counts);
  std::ostringstream rep;
  rep << "[bell]\n";
  rep << "settings_deg = " << counts.settings_deg[0] << "," << counts.settings_deg[1] << ","
      << counts.settings_deg[2] << "," << counts.settings_deg[3] << "\n";
  rep << "pairs_per_setting = " << ctx.cfg.bell_pairs << "\n";
  static const char* pair_names[4] = {"a_b", "a_bp", "ap_b", "ap_bp"};
  for (int p = 0; p < 4; ++p) {
    const auto& c = counts.counts[static_cast<std::size_t>(p)];
    rep << "counts_" << pair_names[p] << " = " << c[0] << "," << c[1] << "," << c[2] << ","
        << c[3] << "\n";
  }
  rep << "S = " << s << "\n";
  write_text(ctx.out("bell.txt"), rep.str());
  ctx.write_manifest();
  std::cout << "S = " << s << "\n";
  return kExitOk;
}

int cmd_demo(RunContext& ctx) {
  const ScenarioConfig& sc = ctx.cfg.scenario;
  LearningResult learned = run_learning_phase(sc);
  save_learning_artifacts(ctx, learned);

  SessionTranscript session =
      run_bb84(sc.session_length, Rng::derive_seed(sc.master_seed, 0xBB84), sc.detector_efficiency);
  InterceptResult result = run_intercept_phase(sc, learned, session);
  save_transcript(session, ctx.out("session_transcript.txt").string());
  write_text(ctx.out("attack_report.txt"), result.report.to_string());

  BellCounts counts = sample_singlet(ctx.cfg.bell_settings_deg, ctx.cfg.bell_pairs,
                                     Rng::derive_seed(sc.master_seed, 0xBE11));
  std::ostringstream bell;
  bell << "S = " << chsh_S(counts) << "\n";
  write_text(ctx.out("bell.txt"), bell.str());
  ctx.write_manifest();

  std::cout << "test accuracy:      " << learned.test_report.accuracy << "\n"
            << "separability:       " << learned.separability.margin << "\n"
            << "clone fidelity:     " << result.report.key_clone_fidelity << "\n"
            << "coverage:           " << result.report.coverage << "\n"
            << "CHSH S:             " << chsh_S(counts) << "\n";
  if (learned.test_report.accuracy < 0.99 || result.report.key_clone_fidelity < 0.99) {
    std::cerr << "[error] demo: reference-scenario thresholds not met\n";
    return kExitThreshold;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RF side-channel simulator for single-photon-detector QKD receivers"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "qrf_out", model_dir;
  bool binary = false;
  app.add_option("-c,--config", config_path, "configuration file (key = value)")->required();
  app.add_option("-o,--out", out_dir, "output directory");

  auto* synth = app.add_subcommand("synth", "generate labeled waveform files");
  synth->add_flag("--binary", binary, "write QRFW binary instead of text");
  auto* dsp_cmd = app.add_subcommand("dsp", "run the processing chain and emit correlation matrices");
  auto* train_cmd = app.add_subcommand("train", "train the classifier on synthesized captures");
  auto* attack_cmd = app.add_subcommand("attack", "two-phase eavesdropping");
  auto* learn = attack_cmd->add_subcommand("learn", "phase I: triggered acquisition and training");
  auto* intercept = attack_cmd->add_subcommand("intercept", "phase II: free-running key capture");
  intercept->add_option("--model-dir", model_dir, "directory produced by `attack learn`");
  auto* sweep_cmd = app.add_subcommand("sweep", "countermeasure parameter sweep");
  auto* bell_cmd = app.add_subcommand("bell", "CHSH statistic from sampled singlet pairs");
  auto* demo_cmd = app.add_subcommand("demo", "end-to-end reference scenario");

  CLI11_PARSE(app, argc, argv);

  try {
    RunContext ctx = make_context(
        config_path, out_dir,
        app.get_subcommands().front()->get_name() +
            (attack_cmd->parsed() ? (learn->parsed() ? " learn" : " intercept") : ""));
    if (synth->parsed()) return cmd_synth(ctx, binary);
    if (dsp_cmd->parsed()) return cmd_dsp(ctx);
    if (train_cmd->parsed()) return cmd_train(ctx);
    if (attack_cmd->parsed() && learn->parsed()) return cmd_train(ctx);
    if (attack_cmd->parsed() && intercept->parsed())
      return cmd_intercept(ctx, model_dir.empty() ? out_dir : model_dir);
    if (sweep_cmd->parsed()) return cmd_sweep(ctx);
    if (bell_cmd->parsed()) return cmd_bell(ctx);
    if (demo_cmd->parsed()) return cmd_demo(ctx);
    std::cerr << "[error] no subcommand\n";
    return kExitRuntime;
  } catch (const ConfigError& e) {
    std::cerr << "[error] config: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ValidationError& e) {
    std::cerr << "[error] runtime: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "[error] runtime: " << e.what() << "\n";
    return kExitRuntime;
  }
}
