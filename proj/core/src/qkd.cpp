#include "qrf/qkd.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qrf {

int polarization_angle(int bit, Basis basis) {
  if (bit != 0 && bit != 1) throw ValidationError("polarization_angle: bit must be 0 or 1");
  if (basis == Basis::kRectilinear) return bit == 0 ? 0 : 90;
  return bit == 0 ? 45 : 135;
}

void SiftedKey::validate() const {
  if (indices.size() != bits.size()) throw ValidationError("SiftedKey: length mismatch");
  for (std::size_t i = 1; i < indices.size(); ++i)
    if (indices[i] <= indices[i - 1])
      throw ValidationError("SiftedKey: indices not strictly increasing");
}

std::vector<PhotonEvent> alice_generate(int n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("alice_generate: n must be >= 1");
  Rng rng(seed);
  std::vector<PhotonEvent> events;
  events.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    PhotonEvent e;
    e.index = i;
    e.bit = rng.coin() ? 1 : 0;
    e.basis = rng.coin() ? Basis::kDiagonal : Basis::kRectilinear;
    e.angle_deg = polarization_angle(e.bit, e.basis);
    events.push_back(e);
  }
  return events;
}

std::vector<DetectionRecord> bob_measure(const std::vector<PhotonEvent>& events,
                                         std::uint64_t seed, double detector_efficiency) {
  if (detector_efficiency < 0.0 || detector_efficiency > 1.0)
    throw ValidationError("bob_measure: efficiency outside [0, 1]");
  Rng rng(seed);
  std::vector<DetectionRecord> records;
  records.reserve(events.size());
  for (const auto& e : events) {
    const Basis basis = rng.coin() ? Basis::kDiagonal : Basis::kRectilinear;
    const int bit = (basis == e.basis) ? e.bit : (rng.coin() ? 1 : 0);
    // Loss draw is consumed unconditionally so the stream layout does not
    // depend on efficiency.
    const bool detected = rng.uniform() < detector_efficiency;
    if (!detected) continue;
    DetectionRecord r;
    r.index = e.index;
    r.bob_basis = basis;
    r.detector_id = bit;
    records.push_back(r);
  }
  return records;
}

std::pair<SiftedKey, SiftedKey> sift(const std::vector<PhotonEvent>& alice_events,
                                     const std::vector<DetectionRecord>& bob_records) {
  SiftedKey a, b;
  for (const auto& r : bob_records) {
    if (r.index < 0 || static_cast<std::size_t>(r.index) >= alice_events.size())
      throw ValidationError("sift: detection references unknown index");
    const auto& e = alice_events[static_cast<std::size_t>(r.index)];
    if (e.basis != r.bob_basis) continue;
    a.indices.push_back(r.index);
    a.bits.push_back(e.bit);
    b.indices.push_back(r.index);
    b.bits.push_back(r.detector_id);
  }
  return {a, b};
}

QberResult estimate_qber(const SiftedKey& key_a, const SiftedKey& key_b,
                         double disclose_fraction, std::uint64_t seed) {
  key_a.validate();
  key_b.validate();
  if (key_a.size() == 0 || key_b.size() == 0)
    throw DegenerateInputError("estimate_qber: empty key");
  if (key_a.indices != key_b.indices)
    throw ValidationError("estimate_qber: keys are not aligned");
  if (disclose_fraction <= 0.0 || disclose_fraction >= 1.0)
    throw ValidationError("estimate_qber: disclose_fraction outside (0, 1)");

  const std::size_t n = key_a.size();
  std::size_t n_disclose = static_cast<std::size_t>(std::lround(disclose_fraction * n));
  n_disclose = std::clamp<std::size_t>(n_disclose, 1, n);

  // Partial Fisher-Yates picks the disclosed subset.
  Rng rng(seed);
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = 0; i < n_disclose; ++i) {
    const std::size_t j = i + rng.uniform_int(n - i);
    std::swap(perm[i], perm[j]);
  }
  std::vector<bool> disclosed(n, false);
  for (std::size_t i = 0; i < n_disclose; ++i) disclosed[perm[i]] = true;

  QberResult res;
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (disclosed[i]) {
      if (key_a.bits[i] != key_b.bits[i]) ++mismatches;
    } else {
      res.remaining_a.indices.push_back(key_a.indices[i]);
      res.remaining_a.bits.push_back(key_a.bits[i]);
      res.remaining_b.indices.push_back(key_b.indices[i]);
      res.remaining_b.bits.push_back(key_b.bits[i]);
    }
  }
  res.disclosed = n_disclose;
  res.qber = static_cast<double>(mismatches) / static_cast<double>(n_disclose);
  return res;
}

std::vector<PhotonEvent> intercept_resend(const std::vector<PhotonEvent>& events,
                                          std::uint64_t seed) {
  Rng rng(seed);
  std::vector<PhotonEvent> out;
  out.reserve(events.size());
  for (const auto& e : events) {
    const Basis basis = rng.coin() ? Basis::kDiagonal : Basis::kRectilinear;
    const int bit = (basis == e.basis) ? e.bit : (rng.coin() ? 1 : 0);
    PhotonEvent resent;
    resent.index = e.index;
    resent.bit = bit;
    resent.basis = basis;
    resent.angle_deg = polarization_angle(bit, basis);
    out.push_back(resent);
  }
  return out;
}

SessionTranscript run_bb84(int n, std::uint64_t seed, double detector_efficiency,
                           bool with_intercept_resend) {
  SessionTranscript t;
  t.alice = alice_generate(n, Rng::derive_seed(seed, 1));
  const auto& channel_in =
      with_intercept_resend ? intercept_resend(t.alice, Rng::derive_seed(seed, 2)) : t.alice;
  t.bob = bob_measure(channel_in, Rng::derive_seed(seed, 3), detector_efficiency);
  // Sifting compares Alice's announced bases against Bob's; Alice's truth is
  // her original events even when an adversary resent the photons.
  SiftedKey a, b;
  for (const auto& r : t.bob) {
    const auto& e = t.alice[static_cast<std::size_t>(r.index)];
    if (e.basis != r.bob_basis) continue;
    a.indices.push_back(r.index);
    a.bits.push_back(e.bit);
    b.indices.push_back(r.index);
    b.bits.push_back(r.detector_id);
  }
  t.alice_key = std::move(a);
  t.bob_key = std::move(b);
  return t;
}

BellCounts sample_singlet(const std::array<double, 4>& settings_deg, long n_per_pair,
                          std::uint64_t seed) {
  if (n_per_pair < 1) throw ValidationError("sample_singlet: n_per_pair must be >= 1");
  BellCounts bc;
  bc.settings_deg = settings_deg;
  Rng rng(seed);
  const double deg = M_PI / 180.0;
  for (int ai = 0; ai < 2; ++ai) {
    for (int bi = 0; bi < 2; ++bi) {
      const double a = settings_deg[static_cast<std::size_t>(ai)] * deg;
      const double b = settings_deg[static_cast<std::size_t>(2 + bi)] * deg;
      const double corr = -std::cos(a - b);
      // Uniform marginals: P(equal) = (1+E)/4 each, P(unequal) = (1-E)/4 each.
      const double p_uu = (1.0 + corr) / 4.0;
      const double p_ud = (1.0 - corr) / 4.0;
      const int pair = 2 * ai + bi;
      for (long k = 0; k < n_per_pair; ++k) {
        const double u = rng.uniform();
        int outcome;
        if (u < p_uu)
          outcome = 0;  // up-up
        else if (u < p_uu + p_ud)
          outcome = 1;  // up-down
        else if (u < p_uu + 2.0 * p_ud)
          outcome = 2;  // down-up
        else
          outcome = 3;  // down-down
        bc.counts[static_cast<std::size_t>(pair)][static_cast<std::size_t>(outcome)]++;
      }
    }
  }
  return bc;
}

double chsh_S(const BellCounts& counts) {
  double e[4];
  for (int pair = 0; pair < 4; ++pair) {
    const auto& c = counts.counts[static_cast<std::size_t>(pair)];
    const long total = counts.pair_total(pair);
    if (total <= 0) throw ValidationError("chsh_S: zero total count for a setting pair");
    e[pair] = static_cast<double>(c[0] + c[3] - c[1] - c[2]) / static_cast<double>(total);
  }
  // pairs: 0 = (a,b), 1 = (a,b'), 2 = (a',b), 3 = (a',b')
  return std::abs(e[0] + e[1] + e[2] - e[3]);
}

std::string transcript_to_string(const SessionTranscript& t) {
  std::ostringstream out;
  out << "qrf-session 1\n";
  out << "events " << t.alice.size() << "\n";
  std::vector<int> bob_by_index(t.alice.size(), -1);
  std::vector<Basis> basis_by_index(t.alice.size(), Basis::kRectilinear);
  for (const auto& r : t.bob) {
    bob_by_index[static_cast<std::size_t>(r.index)] = r.detector_id;
    basis_by_index[static_cast<std::size_t>(r.index)] = r.bob_basis;
  }
  std::vector<bool> sifted(t.alice.size(), false);
  for (int idx : t.bob_key.indices) sifted[static_cast<std::size_t>(idx)] = true;

  for (const auto& e : t.alice) {
    const int det = bob_by_index[static_cast<std::size_t>(e.index)];
    out << e.index << ' ' << e.bit << ' ' << (e.basis == Basis::kRectilinear ? '+' : 'x') << ' ';
    if (det < 0) {
      out << "- - 0\n";
    } else {
      out << (basis_by_index[static_cast<std::size_t>(e.index)] == Basis::kRectilinear ? '+' : 'x')
          << ' ' << det << ' ' << (sifted[static_cast<std::size_t>(e.index)] ? 1 : 0) << '\n';
    }
  }
  out << "sifted_length " << t.bob_key.size() << "\n";
  out << "qber " << t.qber << "\n";
  return out.str();
}

void save_transcript(const SessionTranscript& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("save_transcript: cannot open " + path);
  out << transcript_to_string(t);
}

SessionTranscript load_transcript(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("load_transcript: cannot open " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "qrf-session" || version != 1)
    throw ValidationError("load_transcript: not a qrf-session v1 file");
  std::string key;
  std::size_t n = 0;
  in >> key >> n;
  if (key != "events") throw ValidationError("load_transcript: expected events count");

  SessionTranscript t;
  for (std::size_t i = 0; i < n; ++i) {
    int idx, bit;
    char abasis;
    std::string bbasis, det;
    int sifted_flag;
    if (!(in >> idx >> bit >> abasis >> bbasis >> det >> sifted_flag))
      throw ValidationError("load_transcript: truncated event table");
    PhotonEvent e;
    e.index = idx;
    e.bit = bit;
    e.basis = abasis == '+' ? Basis::kRectilinear : Basis::kDiagonal;
    e.angle_deg = polarization_angle(bit, e.basis);
    t.alice.push_back(e);
    if (det != "-") {
      DetectionRecord r;
      r.index = idx;
      r.bob_basis = bbasis == "+" ? Basis::kRectilinear : Basis::kDiagonal;
      r.detector_id = std::stoi(det);
      t.bob.push_back(r);
      if (sifted_flag == 1) {
        t.alice_key.indices.push_back(idx);
        t.alice_key.bits.push_back(bit);
        t.bob_key.indices.push_back(idx);
        t.bob_key.bits.push_back(r.detector_id);
      }
    }
  }
  std::size_t sifted_len = 0;
  in >> key >> sifted_len;  // sifted_length
  in >> key >> t.qber;      // qber
  return t;
}

}  // namespace qrf
