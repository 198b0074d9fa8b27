#pragma once

#include <cstdint>
#include <vector>

#include "dpu/recording.hpp"

namespace dpu {

// Desk-scale stand-in for clinical recordings: seeded 1/f background on
// every channel, plus a 3-5 Hz spike-wave burst on the active channels
// inside each seizure interval.
struct SynthConfig {
  int n_channels = 23;
  double sample_rate = 256.0;
  double duration_s = 60.0;
  std::vector<int> active_channels;
  std::vector<std::pair<double, double>> seizure_intervals;
  std::uint64_t seed = 0;
  double background_rms_uV = 20.0;
  double burst_amplitude_rms = 4.0;  // burst amplitude as a multiple of background RMS
};

Recording synth_recording(const SynthConfig& cfg);

}  // namespace dpu
