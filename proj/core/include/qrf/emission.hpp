#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qrf/common.hpp"

namespace qrf {

enum class PulseShape {
  kSmoothedExponential,  // causal exponential decay convolved with a Gaussian
  kRectangular,          // constant current over [onset, onset + decay_tau]
};

// Avalanche discharge current I_D(t) of a Geiger-mode APD.
struct AvalanchePulseSpec {
  double peak_current = 10e-3;   // A
  double decay_tau = 2.5e-9;     // s, exponential decay constant
  double gauss_sigma = 0.2e-9;   // s, Gaussian smoothing width
  double t_rise = 0.0;           // s, integration start
  double t_fall = 300e-9;        // s, integration end
  double onset = 100e-9;         // s
  PulseShape shape = PulseShape::kSmoothedExponential;

  void validate() const;
};

// Point-charge description of the avalanche for the radiated-power formula.
struct PointChargeKinematics {
  double charge = 0.0;        // statcoulombs in the Gaussian-unit convention
  double acceleration = 0.0;  // cm/s^2 in the Gaussian-unit convention
  double speed_ratio = 0.0;   // v/c, must stay well below 1

  void validate() const;
};

// Speed of light in Gaussian units (cm/s); the power formula is evaluated
// literally in that convention.
inline constexpr double kSpeedOfLightCgs = 2.99792458e10;

struct Resonance {
  double frequency_hz = 0.0;
  double damping = 0.02;  // amplitude decay per sample of the damped sinusoid
};

struct FingerprintSpec {
  int length = 128;
  double sample_rate = 1e9;
  std::vector<Resonance> resonances;

  void validate() const;
};

// FIR tap vector plus arrival delay modeling the SPD-to-antenna path.
// Unique per detector placement; the core of the side channel.
struct ChannelFingerprint {
  std::vector<double> taps;
  int delay_samples = 0;
  FingerprintSpec spec;
  std::uint64_t seed = 0;

  double tap_energy() const {
    double e = 0.0;
    for (double t : taps) e += t * t;
    return e;
  }

  void validate() const;
};

// Receiving-system impairments: thermal noise plus digitizer quantization.
struct NoiseSpec {
  double thermal_sigma = 1e-3;  // V
  int digitizer_bits = 12;
  double full_scale = 0.5;      // V, total digitizer range

  double lsb() const { return full_scale / static_cast<double>(1ll << digitizer_bits); }
  void validate() const;
};

// I_D(t) in amperes. The smoothed-exponential shape is the analytic
// convolution of a causal exponential with a unit-area Gaussian, rescaled so
// its maximum equals peak_current.
double avalanche_current(double t, const AvalanchePulseSpec& spec);

// Q_D: numeric quadrature of I_D over [t_rise, t_fall].
double discharge_charge(const AvalanchePulseSpec& spec);

// Larmor power of the accelerating point charge, evaluated literally in
// Gaussian units. Diagnostic only; waveform synthesis uses a configured
// amplitude scale instead (no antenna model is assumed).
double radiated_power(const PointChargeKinematics& k, double speed_of_light = kSpeedOfLightCgs);

// Deterministic-by-seed unit-energy tap vector: sparse random multipath plus
// damped sinusoids at the configured resonance frequencies.
ChannelFingerprint generate_fingerprint(std::uint64_t seed, const FingerprintSpec& spec,
                                        int delay_samples = 0);

// h2 = rho*h1 + sqrt(1-rho^2)*h_indep with h_indep orthogonalized against h1,
// renormalized to unit energy. rho parameterizes detector spacing (1 =
// co-located, 0 = far apart).
ChannelFingerprint derive_correlated_fingerprint(const ChannelFingerprint& base, double rho,
                                                 std::uint64_t seed);

// Uniform mid-tread quantization clamped to +/- full_scale/2.
std::vector<double> quantize(const std::vector<double>& samples, const NoiseSpec& noise);

// Antenna-received waveform: sampled avalanche impulse, scaled by amplitude,
// convolved with the fingerprint taps, shifted by the arrival delay, plus
// white Gaussian thermal noise, then quantized. Pass nullopt to disable the
// receiver impairments entirely (noiseless diagnostics).
WaveformRecord synthesize_waveform(const ChannelFingerprint& fp, const AvalanchePulseSpec& pulse,
                                   const std::optional<NoiseSpec>& noise, int n_samples,
                                   std::uint64_t seed, double amplitude);

// Amplitude that puts the noiseless waveform peak at thermal_sigma *
// 10^(snr_db/20); the project-wide SNR convention.
double amplitude_for_snr(const ChannelFingerprint& fp, const AvalanchePulseSpec& pulse,
                         const NoiseSpec& noise, int n_samples, double snr_db);

}  // namespace qrf
