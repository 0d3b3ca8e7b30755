#pragma once

#include <string>
#include <vector>

#include "qrf/common.hpp"
#include "qrf/dsp.hpp"

namespace qrf {

// Text waveform file: header line
//   # sample_rate_hz=<int> trigger_index=<int|-1> label=<0|1|-1>
// followed by one decimal sample per line, 17 significant digits.
void save_waveform_text(const WaveformRecord& w, const std::string& path);
WaveformRecord load_waveform_text(const std::string& path);

// Binary variant: 16-byte header (magic "QRFW", u32 version, u64 sample
// count) + metadata block + little-endian 64-bit floats.
void save_waveform_binary(const WaveformRecord& w, const std::string& path);
WaveformRecord load_waveform_binary(const std::string& path);

// Correlation-matrix CSV, row-major, header line `# kind=<co|cross> n=<int>`.
void save_matrix_csv(const CorrelationMatrix& m, const std::string& path);
CorrelationMatrix load_matrix_csv(const std::string& path);

// FNV-1a 64-bit over a file's bytes; used for manifest checksums.
std::uint64_t file_checksum(const std::string& path);

}  // namespace qrf
