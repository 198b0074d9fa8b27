#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace dpu {

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  Eigen::VectorXd m, v;
  long t = 0;
};

// standard Adam with bias-corrected moments
inline void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state,
                      const AdamConfig& cfg) {
  if (state.t == 0) {
    state.m = Eigen::VectorXd::Zero(params.size());
    state.v = Eigen::VectorXd::Zero(params.size());
  }
  state.t += 1;
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad;
  state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
  const double mc = 1.0 - std::pow(cfg.beta1, double(state.t));
  const double vc = 1.0 - std::pow(cfg.beta2, double(state.t));
  params -= cfg.learning_rate *
            (state.m / mc).cwiseQuotient(((state.v / vc).cwiseSqrt().array() + cfg.epsilon).matrix());
}

}  // namespace dpu
