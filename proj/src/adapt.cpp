#include "dpu/adapt.hpp"

#include <stdexcept>

namespace dpu::train {

AdaptResult adaptive_retrain(const freespace::FreespaceModel& model,
                             const freespace::AberrationProfile& profile,
                             const FreespaceDataset& train_set, const TrainConfig& cfg,
                             double f_beta) {
  model.validate();
  if (model.n_layers() < 2)
    throw std::invalid_argument("adaptive_retrain: needs a multi-layer model");

  auto res = train_freespace(model, train_set, cfg, &profile, /*first_trained_layer=*/2);

  const auto readouts = collect_readouts(res.model, train_set, &profile);
  res.model.region_scale = calibrate_region_scale(readouts, f_beta);
  return {std::move(res.model), std::move(res.trace)};
}

}  // namespace dpu::train
