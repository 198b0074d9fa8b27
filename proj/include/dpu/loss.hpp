#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace dpu {

enum class LossKind { Mse, CrossEntropy };

inline double mse(const Eigen::ArrayXXd& p, const Eigen::ArrayXXd& t) {
  if (p.rows() != t.rows() || p.cols() != t.cols())
    throw std::invalid_argument("mse: shape mismatch");
  return (p - t).square().mean();
}

inline Eigen::ArrayXXd mse_grad(const Eigen::ArrayXXd& p, const Eigen::ArrayXXd& t) {
  if (p.rows() != t.rows() || p.cols() != t.cols())
    throw std::invalid_argument("mse: shape mismatch");
  return 2.0 * (p - t) / double(p.size());
}

// two-way softmax cross-entropy; target = index of the true class
inline double cross_entropy2(double s0, double s1, int target) {
  const double mx = std::max(s0, s1);
  const double lse = mx + std::log(std::exp(s0 - mx) + std::exp(s1 - mx));
  return lse - (target == 0 ? s0 : s1);
}

inline std::pair<double, double> cross_entropy2_grad(double s0, double s1, int target) {
  const double mx = std::max(s0, s1);
  const double e0 = std::exp(s0 - mx), e1 = std::exp(s1 - mx);
  const double p0 = e0 / (e0 + e1), p1 = e1 / (e0 + e1);
  return {p0 - (target == 0 ? 1.0 : 0.0), p1 - (target == 1 ? 1.0 : 0.0)};
}

}  // namespace dpu
