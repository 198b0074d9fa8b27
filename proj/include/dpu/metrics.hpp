#pragma once

#include <optional>
#include <vector>

namespace dpu {

// seizure = positive class
struct ConfusionStats {
  long tp = 0, fp = 0, tn = 0, fn = 0;

  void add(bool predicted_seizure, bool actual_seizure) {
    if (actual_seizure)
      (predicted_seizure ? tp : fn) += 1;
    else
      (predicted_seizure ? fp : tn) += 1;
  }
  long total() const { return tp + fp + tn + fn; }
};

// Ratios with zero denominators are reported absent, never silently zero.
struct MetricSet {
  std::optional<double> accuracy;
  std::optional<double> sensitivity;  // tp / (tp + fn)
  std::optional<double> specificity;  // tn / (tn + fp)
  std::optional<double> f_beta;
};

MetricSet metrics(const ConfusionStats& stats, double beta);

// Raw detector pairs with ground truth; used to fit the region-scale
// factor c on training data.
struct ReadoutSample {
  double i1 = 0;  // seizure-region intensity before c
  double i2 = 0;
  bool seizure = false;
};

// Grid search over 201 uniform points in [0.9, 1.1], maximizing F_beta of
// the rule (c * i1 > i2); ties resolve toward c closest to 1 (then lower c).
double calibrate_region_scale(const std::vector<ReadoutSample>& samples, double beta);

}  // namespace dpu
