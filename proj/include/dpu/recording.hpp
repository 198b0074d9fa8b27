#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace dpu {

struct ChannelInfo {
  std::string label;
  std::string unit;  // physical dimension, typically "uV"
};

// Multi-channel sampled biosignal with labeled seizure intervals.
// Invariants (checked by validate()): equal sample counts per channel,
// sample_rate > 0, intervals sorted, non-overlapping and inside the record.
struct Recording {
  std::string id;
  std::vector<ChannelInfo> channels;
  Eigen::MatrixXd samples;  // channel x sample, physical units (uV)
  double sample_rate = 0.0;
  std::vector<std::pair<double, double>> seizure_intervals;  // (start_s, end_s)

  int n_channels() const { return static_cast<int>(samples.rows()); }
  std::int64_t n_samples() const { return samples.cols(); }
  double duration_s() const { return sample_rate > 0 ? n_samples() / sample_rate : 0.0; }

  void validate() const;  // throws std::invalid_argument on violation
};

struct Segment {
  std::string recording_id;
  double start_s = 0.0;
  double duration_s = 0.0;
  Eigen::MatrixXd data;  // channel x sample
  bool seizure = false;
};

struct DatasetSplit {
  std::vector<Segment> train;
  std::vector<Segment> test;
  std::uint64_t seed = 0;
};

// Slices [0, hop, 2*hop, ...] windows of length window_s; the trailing
// partial window is discarded. A window is labeled seizure when its
// midpoint falls inside a seizure interval (half-open [start, end)).
std::vector<Segment> window(const Recording& rec, double window_s, double hop_s);

// Seeded shuffle, then train = floor(S/2) seizure windows plus the same
// count of non-seizure windows; everything else goes to test.
DatasetSplit split(const std::vector<Segment>& segments, std::uint64_t seed);

// Variant that keeps all windows of one seizure event on the same side of
// the split. Non-seizure windows are still split per window.
DatasetSplit split_by_event(const std::vector<Segment>& segments,
                            const Recording& rec, std::uint64_t seed);

}  // namespace dpu
