#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "dpu/adam.hpp"
#include "dpu/freespace.hpp"
#include "dpu/integrated.hpp"
#include "dpu/loss.hpp"
#include "dpu/metrics.hpp"

namespace dpu::train {

struct TrainConfig {
  double learning_rate = 0.01;
  int epochs = 1000;
  int batch_size = 32;  // <= 0 means full batch
  LossKind loss = LossKind::Mse;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  bool shuffle = true;
  integrated::BinarizeMode binarize_mode = integrated::BinarizeMode::Hard;

  AdamConfig adam() const { return {learning_rate, adam_beta1, adam_beta2, adam_epsilon}; }
};

struct TraceRow {
  int epoch = 0;  // 0 is the untouched initial model
  double loss = 0;
  double accuracy = 0;
};

struct FreespaceDataset {
  std::vector<Eigen::ArrayXXd> images;
  std::vector<bool> labels;  // true = seizure
};

struct VectorDataset {
  Eigen::MatrixXd X;          // samples x features, nonnegative
  std::vector<bool> labels;
};

struct FreespaceTrainResult {
  freespace::FreespaceModel model;  // best-on-train-loss checkpoint
  std::vector<TraceRow> trace;
};

struct IntegratedTrainResult {
  integrated::IntegratedModel model;
  std::vector<TraceRow> trace;
};

// Seeded per-epoch shuffling, serial gradient reduction, Adam updates,
// full-dataset loss/accuracy per epoch; returns the lowest-loss epoch's
// parameters. Layers below first_trained_layer stay frozen (adaptive
// retraining passes 2). A non-finite loss aborts with the failing epoch.
FreespaceTrainResult train_freespace(const freespace::FreespaceModel& init,
                                     const FreespaceDataset& data, const TrainConfig& cfg,
                                     const freespace::AberrationProfile* profile = nullptr,
                                     int first_trained_layer = 1);

IntegratedTrainResult train_integrated(const integrated::IntegratedModel& init,
                                       const VectorDataset& data, const TrainConfig& cfg,
                                       bool train_bias = true);

ConfusionStats evaluate_freespace(const freespace::FreespaceModel& model,
                                  const FreespaceDataset& data,
                                  const freespace::AberrationProfile* profile = nullptr);

// raw (i1, i2) detector pairs with c forced to 1, for fitting c
std::vector<ReadoutSample> collect_readouts(const freespace::FreespaceModel& model,
                                            const FreespaceDataset& data,
                                            const freespace::AberrationProfile* profile = nullptr);

ConfusionStats evaluate_integrated(const integrated::IntegratedModel& model,
                                   const VectorDataset& data,
                                   integrated::BinarizeMode mode = integrated::BinarizeMode::Hard);

}  // namespace dpu::train
