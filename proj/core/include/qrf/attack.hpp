#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qrf/classifier.hpp"
#include "qrf/common.hpp"
#include "qrf/dsp.hpp"
#include "qrf/emission.hpp"
#include "qrf/qkd.hpp"

namespace qrf {

// Everything a scenario run needs: detector physics, channel fingerprints,
// receiver impairments, countermeasure knobs, protocol session shape.
struct ScenarioConfig {
  std::uint64_t master_seed = 1;

  // Channel / countermeasures.
  std::uint64_t fingerprint_seed = 7;
  double rho = 0.3;             // detector decorrelation (1 = co-located)
  double snr_db = 20.0;         // peak signal over thermal noise, at the antenna
  double shielding_db = 0.0;    // extra amplitude attenuation
  double jammer_sigma = 0.0;    // V, in-band jamming noise at Eve's antenna

  // Short pre-trigger slack plus a long reverberant fingerprint keeps the
  // excised 256-sample window anchored to the pulse front.
  AvalanchePulseSpec pulse{10e-3, 2.5e-9, 0.2e-9, 0.0, 100e-9, 20e-9};
  NoiseSpec noise;
  FingerprintSpec fingerprint{256, 1e9, {{60e6, 0.001}, {120e6, 0.0011}, {190e6, 0.0012}}};
  BandSpec band;

  // Record geometry.
  int raw_samples = 1200;
  int excised_samples = 256;

  // Learning phase.
  int waveforms_per_detector = 64;
  double train_fraction = 0.5;
  std::vector<int> hidden_dims{128, 64, 32, 16, 8};
  // The augmented training set converges fast; 20 epochs keeps a ten-seed
  // learning run well under a minute.
  TrainConfig train_cfg{1e-3, 20, 8, 0, Optimizer::kAdaptiveMoment, 0};

  // Protocol session.
  int session_length = 10000;
  double detector_efficiency = 1.0;

  // Eve's free-running alignment tolerance, samples. Noise can move the
  // detected peak to any oscillation of the slowly decaying ringdown, so a
  // detection counts as aligned when it falls anywhere inside the
  // template-predicted emission window of the frame.
  int alignment_tolerance = 280;

  // Antenna geometry (metres); reference distance carries the configured SNR.
  std::vector<double> antenna_positions{0.5, 1.0, 1.5, 2.0, 3.0, 4.0};
  double reference_distance = 2.0;

  void validate() const;

  // Noise seen by Eve: thermal plus jammer power.
  NoiseSpec effective_noise() const;

  // Received direct-path peak voltage after shielding.
  double effective_amplitude(const ChannelFingerprint& fp) const;
};

struct DetectorTemplates {
  WaveformRecord average0;  // coherent average of SPD1 captures
  WaveformRecord average1;
  int peak_offset0 = 0;     // peak-|sample| index within a raw frame, per detector
  int peak_offset1 = 0;
};

struct LearningResult {
  MlpModel model;
  DetectorTemplates templates;
  EvalReport test_report;
  SeparabilityReport separability;
  CorrelationMatrix m_co;
  CorrelationMatrix m_cross;
  ChannelFingerprint fp0;
  ChannelFingerprint fp1;
  bool inseparable = false;   // reported, not fatal
  bool phase_detectable = true;  // Eve's test laser displaces the source;
                                 // the legitimate session aborts
};

struct AttackReport {
  double classifier_accuracy = 0.0;
  double separability_margin = 0.0;
  double key_clone_fidelity = 0.0;
  double coverage = 0.0;             // fraction of Bob's sifted bits Eve cloned
  double bob_qber_with_eve = 0.0;
  double bob_qber_without_eve = 0.0;
  int detections_matched = 0;
  int detections_unmatched = 0;
  int bob_detections = 0;
  std::uint64_t master_seed = 0;

  std::string to_string() const;
};

struct InterceptResult {
  SiftedKey eve_key;
  AttackReport report;
};

struct PolarizationResult {
  double angle_deg = 0.0;
  bool conclusive = false;
  std::vector<std::pair<double, long>> histogram;  // candidate -> detector-0 clicks
};

// Receiver model for the polarization-learning probe.
struct PolarizationProbe {
  double receiver_axis_deg = 0.0;   // orientation of the '+' basis
  double random_click_prob = 0.0;   // jammer-saturated fraction of clicks
};

struct AntennaSearchResult {
  double position = 0.0;
  double snr_db = 0.0;
  std::vector<double> snr_trajectory;  // non-decreasing by construction
};

enum class SweepParameter { kRho, kShieldingDb, kJammerSigma };

struct SweepPoint {
  double value = 0.0;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
  double fidelity_mean = 0.0;  // -1 when intercept not run
  int trials = 0;
};

struct SweepTable {
  SweepParameter parameter = SweepParameter::kRho;
  std::vector<SweepPoint> points;  // ordered by value
};

// Eve fires `shots` test photons per candidate polarization and histograms
// the observed detector clicks; the most consistent candidate wins, ties
// broken by lowest angle. A chi-square check flags jammer-flattened
// histograms as inconclusive.
PolarizationResult learn_polarization(const PolarizationProbe& probe,
                                      const std::vector<double>& candidate_angles_deg,
                                      long shots_per_angle, std::uint64_t seed);

// Hill-climb over the candidate positions, accepting strictly improving SNR
// moves from a random start.
AntennaSearchResult optimize_antenna_position(const ScenarioConfig& cfg, std::uint64_t seed);

// Triggered acquisition + dsp chain + training; reports test accuracy and
// correlation separability.
LearningResult run_learning_phase(const ScenarioConfig& cfg);

// Free-running capture of a finished BB84 session: detect, align by
// timestamp, classify, keep publicly announced sifted indices. Never touches
// protocol state.
InterceptResult run_intercept_phase(const ScenarioConfig& cfg, const LearningResult& learned,
                                    const SessionTranscript& session);

// Fraction of matching bits over shared indices.
double key_clone_fidelity(const SiftedKey& eve_key, const SiftedKey& bob_key);

// Learning (+ optional intercept when session_length > 0) per grid value,
// fresh derived seeds per trial.
SweepTable countermeasure_sweep(const ScenarioConfig& base_cfg, SweepParameter parameter,
                                const std::vector<double>& values, int trials_per_point,
                                bool run_intercept = false);

std::string sweep_to_string(const SweepTable& table);

// The per-record processing chain shared by learning and intercept:
// frequency excision -> time excision -> unit-energy normalization.
WaveformRecord process_waveform(const WaveformRecord& raw, const BandSpec& band,
                                int excised_samples);

}  // namespace qrf
