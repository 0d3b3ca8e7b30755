#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qrf/common.hpp"

namespace qrf {

enum class Basis { kRectilinear, kDiagonal };  // '+' and 'x'

// Polarization angle in degrees for a (bit, basis) pair:
// (0,'+') -> 0, (1,'+') -> 90, (0,'x') -> 45, (1,'x') -> 135.
int polarization_angle(int bit, Basis basis);

struct PhotonEvent {
  int index = 0;
  int bit = 0;
  Basis basis = Basis::kRectilinear;
  int angle_deg = 0;
};

struct DetectionRecord {
  int index = 0;
  Basis bob_basis = Basis::kRectilinear;
  int detector_id = 0;  // SPD1 = 0, SPD2 = 1; equals the derived bit
};

struct SiftedKey {
  std::vector<int> indices;  // strictly increasing
  std::vector<int> bits;

  std::size_t size() const { return bits.size(); }
  void validate() const;
};

// CHSH coincidence counts N^{AB}_{a,b} for the four setting pairs
// (a,b) in {alpha, alpha'} x {beta, beta'}.
struct BellCounts {
  std::array<double, 4> settings_deg{};  // alpha, alpha', beta, beta'
  // outcome order per pair: up-up, up-down, down-up, down-down
  std::array<std::array<long, 4>, 4> counts{};  // [pair][outcome], pair = 2*a_idx + b_idx

  long pair_total(int pair) const {
    return counts[static_cast<std::size_t>(pair)][0] + counts[static_cast<std::size_t>(pair)][1] +
           counts[static_cast<std::size_t>(pair)][2] + counts[static_cast<std::size_t>(pair)][3];
  }
};

struct QberResult {
  double qber = 0.0;
  SiftedKey remaining_a;
  SiftedKey remaining_b;
  std::size_t disclosed = 0;
};

// Full BB84 session record; the attack module consumes this as ground truth.
struct SessionTranscript {
  std::vector<PhotonEvent> alice;
  std::vector<DetectionRecord> bob;
  SiftedKey alice_key;
  SiftedKey bob_key;
  double qber = -1.0;  // -1 until estimated
};

std::vector<PhotonEvent> alice_generate(int n, std::uint64_t seed);

// Ideal receiver: matched basis reproduces Alice's bit, mismatched basis is a
// fair coin; events are lost with probability 1 - efficiency.
std::vector<DetectionRecord> bob_measure(const std::vector<PhotonEvent>& events,
                                         std::uint64_t seed, double detector_efficiency = 1.0);

std::pair<SiftedKey, SiftedKey> sift(const std::vector<PhotonEvent>& alice_events,
                                     const std::vector<DetectionRecord>& bob_records);

// Publicly compares a random fraction of the key and removes it from both.
QberResult estimate_qber(const SiftedKey& key_a, const SiftedKey& key_b,
                         double disclose_fraction, std::uint64_t seed);

// Test adversary: measures each photon in a random basis and resends in that
// basis. Induces the 25% QBER landmark.
std::vector<PhotonEvent> intercept_resend(const std::vector<PhotonEvent>& events,
                                          std::uint64_t seed);

// Convenience driver: generate, (optionally attack), measure, sift.
SessionTranscript run_bb84(int n, std::uint64_t seed, double detector_efficiency = 1.0,
                           bool with_intercept_resend = false);

// Singlet-state sampling with correlator E(a,b) = -cos(a-b) and uniform
// marginals, n outcomes per setting pair.
BellCounts sample_singlet(const std::array<double, 4>& settings_deg, long n_per_pair,
                          std::uint64_t seed);

// S = |E(a,b) + E(a,b') + E(a',b) - E(a',b')| from the counts.
double chsh_S(const BellCounts& counts);

// Session transcript text format (shared with the attack module).
void save_transcript(const SessionTranscript& t, const std::string& path);
SessionTranscript load_transcript(const std::string& path);
std::string transcript_to_string(const SessionTranscript& t);

}  // namespace qrf
