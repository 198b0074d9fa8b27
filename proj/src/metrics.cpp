#include "dpu/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace dpu {

MetricSet metrics(const ConfusionStats& s, double beta) {
  if (s.total() <= 0) throw std::invalid_argument("metrics: all-zero confusion stats");
  if (s.tp < 0 || s.fp < 0 || s.tn < 0 || s.fn < 0)
    throw std::invalid_argument("metrics: negative counts");

  MetricSet m;
  m.accuracy = double(s.tp + s.tn) / double(s.total());
  if (s.tp + s.fn > 0) m.sensitivity = double(s.tp) / double(s.tp + s.fn);
  if (s.tn + s.fp > 0) m.specificity = double(s.tn) / double(s.tn + s.fp);

  // F_beta needs both precision and recall defined; the closed form
  // (1+b^2) tp / ((1+b^2) tp + b^2 fn + fp) then covers tp = 0.
  if (s.tp + s.fp > 0 && s.tp + s.fn > 0) {
    const double b2 = beta * beta;
    m.f_beta = (1.0 + b2) * s.tp / ((1.0 + b2) * s.tp + b2 * s.fn + s.fp);
  }
  return m;
}

double calibrate_region_scale(const std::vector<ReadoutSample>& samples, double beta) {
  if (samples.empty()) throw std::invalid_argument("calibrate_region_scale: no samples");

  double best_c = 1.0;
  double best_score = -1.0;
  for (int i = 0; i <= 200; ++i) {
    const double c = (900 + i) / 1000.0;
    ConfusionStats stats;
    for (const auto& s : samples) stats.add(c * s.i1 > s.i2, s.seizure);
    const MetricSet m = metrics(stats, beta);
    const double score = m.f_beta.value_or(-1.0);
    const bool better =
        score > best_score ||
        (score == best_score && (std::abs(c - 1.0) < std::abs(best_c - 1.0) ||
                                 (std::abs(c - 1.0) == std::abs(best_c - 1.0) && c < best_c)));
    if (better) {
      best_score = score;
      best_c = c;
    }
  }
  return best_c;
}

}  // namespace dpu
