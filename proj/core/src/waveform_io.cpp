#include "qrf/waveform_io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace qrf {

namespace {

constexpr char kMagic[4] = {'Q', 'R', 'F', 'W'};
constexpr std::uint32_t kBinaryVersion = 1;

void write_le(std::ofstream& out, const void* p, std::size_t n) {
  // Little-endian host assumed (x86-64 / aarch64); fields are written raw.
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void read_exact(std::ifstream& in, void* p, std::size_t n, const std::string& path) {
  in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw ValidationError("waveform binary: truncated file " + path);
}

}  // namespace

void save_waveform_text(const WaveformRecord& w, const std::string& path) {
  w.validate();
  std::ofstream out(path);
  if (!out) throw ValidationError("save_waveform_text: cannot open " + path);
  out << "# sample_rate_hz=" << static_cast<long long>(w.sample_rate)
      << " trigger_index=" << w.trigger_index << " label=" << w.label << "\n";
  char buf[64];
  for (double s : w.samples) {
    std::snprintf(buf, sizeof buf, "%.17g", s);
    out << buf << "\n";
  }
  if (!out) throw ValidationError("save_waveform_text: write failure on " + path);
}

WaveformRecord load_waveform_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("load_waveform_text: cannot open " + path);
  std::string header;
  std::getline(in, header);
  long long rate = 0;
  int trigger = -1, label = -1;
  if (std::sscanf(header.c_str(), "# sample_rate_hz=%lld trigger_index=%d label=%d", &rate,
                  &trigger, &label) != 3)
    throw ValidationError("load_waveform_text: bad header in " + path);
  WaveformRecord w;
  w.sample_rate = static_cast<double>(rate);
  w.trigger_index = trigger;
  w.label = label;
  double v;
  while (in >> v) w.samples.push_back(v);
  w.validate();
  return w;
}

void save_waveform_binary(const WaveformRecord& w, const std::string& path) {
  w.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("save_waveform_binary: cannot open " + path);
  const std::uint64_t count = w.samples.size();
  write_le(out, kMagic, 4);
  write_le(out, &kBinaryVersion, 4);
  write_le(out, &count, 8);
  // Metadata block: sample rate (f64), trigger index (i32), label (i32).
  write_le(out, &w.sample_rate, 8);
  const std::int32_t trig = w.trigger_index, label = w.label;
  write_le(out, &trig, 4);
  write_le(out, &label, 4);
  write_le(out, w.samples.data(), count * 8);
  if (!out) throw ValidationError("save_waveform_binary: write failure on " + path);
}

WaveformRecord load_waveform_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("load_waveform_binary: cannot open " + path);
  char magic[4];
  std::uint32_t version = 0;
  std::uint64_t count = 0;
  read_exact(in, magic, 4, path);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw ValidationError("load_waveform_binary: bad magic in " + path);
  read_exact(in, &version, 4, path);
  if (version != kBinaryVersion)
    throw ValidationError("load_waveform_binary: unsupported version in " + path);
  read_exact(in, &count, 8, path);
  WaveformRecord w;
  std::int32_t trig = -1, label = -1;
  read_exact(in, &w.sample_rate, 8, path);
  read_exact(in, &trig, 4, path);
  read_exact(in, &label, 4, path);
  w.trigger_index = trig;
  w.label = label;
  w.samples.resize(count);
  read_exact(in, w.samples.data(), count * 8, path);
  w.validate();
  return w;
}

void save_matrix_csv(const CorrelationMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("save_matrix_csv: cannot open " + path);
  out << "# kind=" << (m.kind == MatrixKind::kCoLocation ? "co" : "cross")
      << " n=" << m.n_rows() << "\n";
  char buf[64];
  for (const auto& row : m.values) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", row[j]);
      out << buf << (j + 1 == row.size() ? '\n' : ',');
    }
  }
  if (!out) throw ValidationError("save_matrix_csv: write failure on " + path);
}

CorrelationMatrix load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("load_matrix_csv: cannot open " + path);
  std::string header;
  std::getline(in, header);
  char kind[16];
  std::size_t n = 0;
  if (std::sscanf(header.c_str(), "# kind=%15s n=%zu", kind, &n) != 2)
    throw ValidationError("load_matrix_csv: bad header in " + path);
  CorrelationMatrix m;
  m.kind = std::string(kind) == "co" ? MatrixKind::kCoLocation : MatrixKind::kCrossLocation;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    m.values.push_back(std::move(row));
  }
  if (m.n_rows() != n) throw ValidationError("load_matrix_csv: row count mismatch in " + path);
  return m;
}

std::uint64_t file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("file_checksum: cannot open " + path);
  std::uint64_t hash = 0xcbf29ce484222325ull;
  char buf[65536];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001b3ull;
    }
    if (got < static_cast<std::streamsize>(sizeof buf)) break;
  }
  return hash;
}

}  // namespace qrf
