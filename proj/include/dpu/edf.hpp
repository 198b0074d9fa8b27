#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpu/recording.hpp"

// EDF (European Data Format) reader/writer and the CHB-MIT summary parser.
//
// Layout per the published EDF standard: 256-byte fixed ASCII header,
// 256 bytes of header per signal (field-major), then data records of
// 16-bit little-endian two's-complement samples scaled channel-wise by
//   physical = (digital - digital_min) * (phys_max - phys_min)
//              / (digital_max - digital_min) + phys_min.
//
// "EDF Annotations" signals (EDF+) are skipped; CHB-MIT stores seizure
// times in the plain-text summary files instead.

namespace dpu {

Recording parse_edf(const std::vector<std::uint8_t>& bytes);
Recording parse_edf_file(const std::string& path);

// Serializes to a conformant EDF with 16-bit quantization against the
// per-channel sample range (or ranges_uV when provided). Used for fixtures
// and round-trip checks.
std::vector<std::uint8_t> write_edf(
    const Recording& rec,
    const std::vector<std::pair<double, double>>* ranges_uV = nullptr);

struct SummaryEntry {
  std::string file_name;
  std::vector<std::pair<double, double>> seizure_intervals;  // seconds
};

// Parses a CHB-MIT chbXX-summary.txt ("File Name:", "Seizure Start Time:",
// "Seizure End Time:", with or without seizure ordinals).
std::vector<SummaryEntry> parse_chb_summary(const std::string& text);

}  // namespace dpu
