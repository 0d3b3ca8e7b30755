#include "qrf/attack.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace qrf {

void ScenarioConfig::validate() const {
  if (rho < 0.0 || rho > 1.0) throw ValidationError("ScenarioConfig: rho outside [0, 1]");
  if (shielding_db < 0.0) throw ValidationError("ScenarioConfig: shielding_db < 0");
  if (jammer_sigma < 0.0) throw ValidationError("ScenarioConfig: jammer_sigma < 0");
  if (train_fraction <= 0.0 || train_fraction >= 1.0)
    throw ValidationError("ScenarioConfig: train_fraction outside (0, 1)");
  if (waveforms_per_detector < 2)
    throw ValidationError("ScenarioConfig: waveforms_per_detector must be >= 2");
  if (raw_samples < excised_samples)
    throw ValidationError("ScenarioConfig: raw_samples < excised_samples");
  if (session_length < 1) throw ValidationError("ScenarioConfig: session_length must be >= 1");
  if (detector_efficiency < 0.0 || detector_efficiency > 1.0)
    throw ValidationError("ScenarioConfig: detector_efficiency outside [0, 1]");
  if (alignment_tolerance < 0) throw ValidationError("ScenarioConfig: negative tolerance");
  if (antenna_positions.empty()) throw ValidationError("ScenarioConfig: no antenna positions");
  if (reference_distance <= 0.0)
    throw ValidationError("ScenarioConfig: reference_distance must be positive");
  pulse.validate();
  noise.validate();
  fingerprint.validate();
  band.validate(fingerprint.sample_rate);
}

NoiseSpec ScenarioConfig::effective_noise() const {
  NoiseSpec n = noise;
  n.thermal_sigma = std::sqrt(noise.thermal_sigma * noise.thermal_sigma +
                              jammer_sigma * jammer_sigma);
  return n;
}

double ScenarioConfig::effective_amplitude(const ChannelFingerprint& fp) const {
  const double base = amplitude_for_snr(fp, pulse, noise, raw_samples, snr_db);
  return base * std::pow(10.0, -shielding_db / 20.0);
}

WaveformRecord process_waveform(const WaveformRecord& raw, const BandSpec& band,
                                int excised_samples) {
  WaveformRecord w = frequency_excision(raw, band);
  w = time_excision(w, static_cast<std::size_t>(excised_samples));
  return normalize(w, NormalizationMode::kUnitEnergy);
}

PolarizationResult learn_polarization(const PolarizationProbe& probe,
                                      const std::vector<double>& candidate_angles_deg,
                                      long shots_per_angle, std::uint64_t seed) {
  if (candidate_angles_deg.empty()) throw ValidationError("learn_polarization: no candidates");
  if (shots_per_angle < 1) throw ValidationError("learn_polarization: shots must be >= 1");

  Rng rng(seed);
  PolarizationResult res;
  const double deg = M_PI / 180.0;
  for (double angle : candidate_angles_deg) {
    long n0 = 0;
    // Malus-law click probability onto detector 0, with a jammer-saturated
    // fraction of fully random clicks.
    const double c = std::cos((angle - probe.receiver_axis_deg) * deg);
    const double p_det0 = c * c;
    for (long s = 0; s < shots_per_angle; ++s) {
      const bool jammed = rng.uniform() < probe.random_click_prob;
      const bool det0 = jammed ? rng.coin() : (rng.uniform() < p_det0);
      if (det0) ++n0;
    }
    res.histogram.emplace_back(angle, n0);
  }
  // The candidate aligned with the receiver axis routes every click onto
  // detector 0, so the largest detector-0 count wins; ties break to the
  // lowest angle.
  std::size_t best = 0;
  for (std::size_t i = 1; i < res.histogram.size(); ++i) {
    if (res.histogram[i].second > res.histogram[best].second) best = i;
  }
  res.angle_deg = res.histogram[best].first;
  const long best_n0 = res.histogram[best].second;
  // A jammer-flattened histogram sits near a 50/50 split everywhere; require
  // the winner to clear both a chi-square flatness test (1 dof, 95%) and a
  // strong detector-0 majority before trusting it.
  const double diff = 2.0 * static_cast<double>(best_n0) - static_cast<double>(shots_per_angle);
  const double chi2 = diff * diff / static_cast<double>(shots_per_angle);
  const double frac = static_cast<double>(best_n0) / static_cast<double>(shots_per_angle);
  res.conclusive = chi2 > 3.841 && frac >= 0.9;
  return res;
}

AntennaSearchResult optimize_antenna_position(const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const auto& pos = cfg.antenna_positions;
  auto snr_at = [&](std::size_t i) {
    // Inverse-square field: configured SNR holds at the reference distance.
    return cfg.snr_db + 20.0 * std::log10(cfg.reference_distance / pos[i]) - cfg.shielding_db;
  };
  Rng rng(seed);
  std::size_t cur = rng.uniform_int(pos.size());
  AntennaSearchResult res;
  res.snr_trajectory.push_back(snr_at(cur));
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::ptrdiff_t step : {-1, +1}) {
      const std::ptrdiff_t cand = static_cast<std::ptrdiff_t>(cur) + step;
      if (cand < 0 || cand >= static_cast<std::ptrdiff_t>(pos.size())) continue;
      if (snr_at(static_cast<std::size_t>(cand)) > snr_at(cur)) {
        cur = static_cast<std::size_t>(cand);
        res.snr_trajectory.push_back(snr_at(cur));
        improved = true;
        break;
      }
    }
  }
  res.position = pos[cur];
  res.snr_db = snr_at(cur);
  return res;
}

namespace {

struct SynthesizedSet {
  std::vector<WaveformRecord> raw;        // triggered raw captures
  std::vector<WaveformRecord> processed;  // after the dsp chain
};

SynthesizedSet synthesize_detector_set(const ScenarioConfig& cfg, const ChannelFingerprint& fp,
                                       int label, int count, std::uint64_t seed_base) {
  const double amplitude = cfg.effective_amplitude(fp);
  const NoiseSpec noise = cfg.effective_noise();
  SynthesizedSet set;
  set.raw.reserve(static_cast<std::size_t>(count));
  set.processed.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    WaveformRecord w = synthesize_waveform(
        fp, cfg.pulse, noise, cfg.raw_samples,
        Rng::derive_seed(seed_base, static_cast<std::uint64_t>(i)), amplitude);
    w.label = label;
    WaveformRecord p = process_waveform(w, cfg.band, cfg.excised_samples);
    p.label = label;
    set.raw.push_back(std::move(w));
    set.processed.push_back(std::move(p));
  }
  return set;
}

}  // namespace

LearningResult run_learning_phase(const ScenarioConfig& cfg) {
  cfg.validate();
  LearningResult res;
  res.fp0 = generate_fingerprint(cfg.fingerprint_seed, cfg.fingerprint);
  res.fp1 = derive_correlated_fingerprint(res.fp0, cfg.rho,
                                          Rng::derive_seed(cfg.master_seed, 0x51D));

  const int count = cfg.waveforms_per_detector;
  SynthesizedSet set0 =
      synthesize_detector_set(cfg, res.fp0, 0, count, Rng::derive_seed(cfg.master_seed, 0xA0));
  SynthesizedSet set1 =
      synthesize_detector_set(cfg, res.fp1, 1, count, Rng::derive_seed(cfg.master_seed, 0xA1));

  // Correlation overview, Fig. 6-7 style.
  res.m_co = correlation_matrix(set0.processed, set0.processed, MatrixKind::kCoLocation);
  res.m_cross = correlation_matrix(set0.processed, set1.processed, MatrixKind::kCrossLocation);
  res.separability = separability_margin(res.m_co, res.m_cross);

  // Coherent averages double as Eve's timing templates for phase II.
  res.templates.average0 = coherent_average(set0.raw);
  res.templates.average1 = coherent_average(set1.raw);
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
  res.templates.peak_offset0 = peak_index(res.templates.average0);
  res.templates.peak_offset1 = peak_index(res.templates.average1);

  // Half/half split per detector, deterministic. The excision window start
  // can jitter by a few samples between captures, so the training half is
  // augmented with small window offsets; the test half stays untouched.
  const int n_train = static_cast<int>(std::lround(cfg.train_fraction * count));
  const int out_len = cfg.excised_samples;
  std::vector<LabeledSample> train_set, test_set;
  auto add = [&](const SynthesizedSet& set, int label) {
    for (int i = 0; i < count; ++i) {
      if (i >= n_train) {
        LabeledSample s;
        s.input = set.processed[static_cast<std::size_t>(i)].samples;
        s.label = label;
        test_set.push_back(std::move(s));
        continue;
      }
      const WaveformRecord fx = frequency_excision(set.raw[static_cast<std::size_t>(i)], cfg.band);
      const auto anchor =
          static_cast<std::ptrdiff_t>(max_energy_window_start(fx.samples, static_cast<std::size_t>(out_len)));
      for (int shift : {-4, -2, 0, 2, 4}) {
        const std::ptrdiff_t lo = std::clamp<std::ptrdiff_t>(
            anchor + shift, 0, static_cast<std::ptrdiff_t>(fx.samples.size()) - out_len);
        WaveformRecord cut;
        cut.sample_rate = fx.sample_rate;
        cut.samples.assign(fx.samples.begin() + lo, fx.samples.begin() + lo + out_len);
        LabeledSample s;
        s.input = normalize(cut).samples;
        s.label = label;
        train_set.push_back(std::move(s));
      }
    }
  };
  add(set0, 0);
  add(set1, 1);

  std::vector<int> dims;
  dims.push_back(cfg.excised_samples);
  dims.insert(dims.end(), cfg.hidden_dims.begin(), cfg.hidden_dims.end());
  dims.push_back(1);
  res.model = init_model(dims, Rng::derive_seed(cfg.master_seed, 0xB0));
  TrainConfig tcfg = cfg.train_cfg;
  tcfg.seed = Rng::derive_seed(cfg.master_seed, 0xB1);
  train(res.model, train_set, tcfg);
  res.test_report = evaluate(res.model, test_set);

  res.inseparable = !res.separability.separable && res.test_report.accuracy < 0.6;
  res.phase_detectable = true;
  return res;
}

double key_clone_fidelity(const SiftedKey& eve_key, const SiftedKey& bob_key) {
  eve_key.validate();
  bob_key.validate();
  std::size_t shared = 0, matching = 0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < eve_key.size(); ++i) {
    while (j < bob_key.size() && bob_key.indices[j] < eve_key.indices[i]) ++j;
    if (j < bob_key.size() && bob_key.indices[j] == eve_key.indices[i]) {
      ++shared;
      if (bob_key.bits[j] == eve_key.bits[i]) ++matching;
    }
  }
  if (shared == 0) throw DegenerateInputError("key_clone_fidelity: no shared indices");
  return static_cast<double>(matching) / static_cast<double>(shared);
}

InterceptResult run_intercept_phase(const ScenarioConfig& cfg, const LearningResult& learned,
                                    const SessionTranscript& session) {
  cfg.validate();
  learned.model.validate();
  if (session.alice.empty()) throw ValidationError("run_intercept_phase: empty session");

  const int frame = cfg.raw_samples;
  const std::size_t n_events = session.alice.size();
  const std::size_t stream_len = n_events * static_cast<std::size_t>(frame);
  const NoiseSpec noise = cfg.effective_noise();
  const double amp0 = cfg.effective_amplitude(learned.fp0);
  const double amp1 = cfg.effective_amplitude(learned.fp1);

  // Free-running stream: each Bob click radiates one pulse from the detector
  // that fired, at a known emission period; noise everywhere, quantized last.
  std::vector<double> stream(stream_len, 0.0);
  for (const auto& r : session.bob) {
    const ChannelFingerprint& fp = r.detector_id == 0 ? learned.fp0 : learned.fp1;
    WaveformRecord clean = synthesize_waveform(
        fp, cfg.pulse, std::nullopt, frame,
        Rng::derive_seed(cfg.master_seed, 0xE000 + static_cast<std::uint64_t>(r.index)),
        r.detector_id == 0 ? amp0 : amp1);
    const std::size_t base = static_cast<std::size_t>(r.index) * static_cast<std::size_t>(frame);
    for (int i = 0; i < frame; ++i) stream[base + static_cast<std::size_t>(i)] += clean.samples[static_cast<std::size_t>(i)];
  }
  {
    Rng rng(Rng::derive_seed(cfg.master_seed, 0xE5E5));
    for (double& s : stream) s += noise.thermal_sigma * rng.gaussian();
  }
  WaveformRecord full;
  full.sample_rate = cfg.fingerprint.sample_rate;
  full.samples = quantize(stream, noise);
  stream.clear();
  stream.shrink_to_fit();

  DetectionConfig dcfg;
  dcfg.segment_len = cfg.excised_samples;
  dcfg.refractory = frame;
  const double lsb = noise.lsb();
  dcfg.noise_sigma =
      std::sqrt(noise.thermal_sigma * noise.thermal_sigma + lsb * lsb / 12.0);
  std::vector<Detection> detections = detect_pulses(full, dcfg);

  // Timestamp alignment against the known emission schedule.
  std::vector<int> guess(n_events, -1);
  int matched = 0, unmatched = 0;
  for (const auto& det : detections) {
    // Pulse peaks sit well inside their emission frame, so the frame number
    // is just integer division; either detector's template offset may match.
    const long event = det.index / frame;
    if (event < 0 || event >= static_cast<long>(n_events)) {
      ++unmatched;
      continue;
    }
    const int in_frame = det.index - static_cast<int>(event) * frame;
    if (std::abs(in_frame - learned.templates.peak_offset0) > cfg.alignment_tolerance &&
        std::abs(in_frame - learned.templates.peak_offset1) > cfg.alignment_tolerance) {
      ++unmatched;
      continue;
    }
    ++matched;
    // Classify the full frame through the same chain used in training.
    WaveformRecord f;
    f.sample_rate = full.sample_rate;
    const std::size_t base = static_cast<std::size_t>(event) * static_cast<std::size_t>(frame);
    f.samples.assign(full.samples.begin() + static_cast<std::ptrdiff_t>(base),
                     full.samples.begin() + static_cast<std::ptrdiff_t>(base + frame));
    WaveformRecord p = process_waveform(f, cfg.band, cfg.excised_samples);
    const double score = forward(learned.model, p.samples);
    guess[static_cast<std::size_t>(event)] = score >= 0.5 ? 1 : 0;
  }

  // Eve hears the public sifting announcements: keep only sifted indices.
  InterceptResult res;
  for (std::size_t i = 0; i < session.bob_key.indices.size(); ++i) {
    const int idx = session.bob_key.indices[i];
    const int g = guess[static_cast<std::size_t>(idx)];
    if (g < 0) continue;
    res.eve_key.indices.push_back(idx);
    res.eve_key.bits.push_back(g);
  }

  AttackReport& rep = res.report;
  rep.classifier_accuracy = learned.test_report.accuracy;
  rep.separability_margin = learned.separability.margin;
  rep.master_seed = cfg.master_seed;
  rep.bob_detections = static_cast<int>(session.bob.size());
  rep.detections_matched = matched;
  rep.detections_unmatched = unmatched;
  rep.key_clone_fidelity =
      res.eve_key.size() > 0 ? key_clone_fidelity(res.eve_key, session.bob_key) : 0.0;
  rep.coverage = session.bob_key.size() > 0
                     ? static_cast<double>(res.eve_key.size()) /
                           static_cast<double>(session.bob_key.size())
                     : 0.0;

  // Bob's QBER from the transcript; identical with or without Eve since the
  // capture never touches the photon path.
  std::size_t mism = 0;
  for (std::size_t i = 0; i < session.bob_key.size(); ++i)
    if (session.bob_key.bits[i] != session.alice_key.bits[i]) ++mism;
  const double qber = session.bob_key.size() > 0
                          ? static_cast<double>(mism) / static_cast<double>(session.bob_key.size())
                          : 0.0;
  rep.bob_qber_with_eve = qber;
  rep.bob_qber_without_eve = qber;
  return res;
}

std::string AttackReport::to_string() const {
  std::ostringstream out;
  char buf[64];
  auto kv = [&](const char* k, double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << k << " = " << buf << "\n";
  };
  out << "[attack-report]\n";
  kv("classifier_accuracy", classifier_accuracy);
  kv("separability_margin", separability_margin);
  kv("key_clone_fidelity", key_clone_fidelity);
  kv("coverage", coverage);
  kv("bob_qber_with_eve", bob_qber_with_eve);
  kv("bob_qber_without_eve", bob_qber_without_eve);
  out << "detections_matched = " << detections_matched << "\n";
  out << "detections_unmatched = " << detections_unmatched << "\n";
  out << "bob_detections = " << bob_detections << "\n";
  out << "master_seed = " << master_seed << "\n";
  return out.str();
}

SweepTable countermeasure_sweep(const ScenarioConfig& base_cfg, SweepParameter parameter,
                                const std::vector<double>& values, int trials_per_point,
                                bool run_intercept) {
  base_cfg.validate();
  if (values.empty()) throw ValidationError("countermeasure_sweep: empty grid");
  if (trials_per_point < 1) throw ValidationError("countermeasure_sweep: trials must be >= 1");

  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());

  SweepTable table;
  table.parameter = parameter;
  for (std::size_t vi = 0; vi < sorted.size(); ++vi) {
    SweepPoint point;
    point.value = sorted[vi];
    point.trials = trials_per_point;
    std::vector<double> accs, fids;
    for (int trial = 0; trial < trials_per_point; ++trial) {
      ScenarioConfig cfg = base_cfg;
      switch (parameter) {
        case SweepParameter::kRho: cfg.rho = point.value; break;
        case SweepParameter::kShieldingDb: cfg.shielding_db = point.value; break;
        case SweepParameter::kJammerSigma: cfg.jammer_sigma = point.value; break;
      }
      cfg.master_seed = Rng::derive_seed(base_cfg.master_seed,
                                         0x53EEull + vi * 1000 + static_cast<std::uint64_t>(trial));
      cfg.fingerprint_seed = Rng::derive_seed(cfg.master_seed, 0xF1);
      LearningResult learned = run_learning_phase(cfg);
      accs.push_back(learned.test_report.accuracy);
      if (run_intercept) {
        SessionTranscript session = run_bb84(cfg.session_length,
                                             Rng::derive_seed(cfg.master_seed, 0xBB84),
                                             cfg.detector_efficiency);
        InterceptResult r = run_intercept_phase(cfg, learned, session);
        fids.push_back(r.report.key_clone_fidelity * r.report.coverage);
      }
    }
    const double mean = std::accumulate(accs.begin(), accs.end(), 0.0) / accs.size();
    double var = 0.0;
    for (double a : accs) var += (a - mean) * (a - mean);
    point.accuracy_mean = mean;
    point.accuracy_std = accs.size() > 1 ? std::sqrt(var / (accs.size() - 1)) : 0.0;
    point.fidelity_mean =
        fids.empty() ? -1.0 : std::accumulate(fids.begin(), fids.end(), 0.0) / fids.size();
    table.points.push_back(point);
  }
  return table;
}

std::string sweep_to_string(const SweepTable& table) {
  std::ostringstream out;
  const char* name = table.parameter == SweepParameter::kRho ? "rho"
                     : table.parameter == SweepParameter::kShieldingDb ? "shielding_db"
                                                                       : "jammer_sigma";
  out << "[sweep parameter=" << name << "]\n";
  out << "value,accuracy_mean,accuracy_std,fidelity_mean,trials\n";
  char buf[160];
  for (const auto& p : table.points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%d\n", p.value, p.accuracy_mean,
                  p.accuracy_std, p.fidelity_mean, p.trials);
    out << buf;
  }
  return out.str();
}

}  // namespace qrf
