#pragma once

#include "dpu/train.hpp"

namespace dpu::train {

struct AdaptResult {
  freespace::FreespaceModel model;  // layer 1 untouched, downstream retrained, c refit
  std::vector<TraceRow> trace;
};

// Adaptive recalibration against an emulated bench: first-layer outputs are
// produced through the aberration profile with H_1 frozen, the downstream
// parameters (H_2.., a, b) are retrained on them, and the region factor c
// is refit on the training readouts to maximize F_beta.
AdaptResult adaptive_retrain(const freespace::FreespaceModel& model,
                             const freespace::AberrationProfile& profile,
                             const FreespaceDataset& train_set, const TrainConfig& cfg,
                             double f_beta = 2.0);

}  // namespace dpu::train
