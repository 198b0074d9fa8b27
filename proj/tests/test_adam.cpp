#include <doctest.h>

#include "dpu/adam.hpp"

using namespace dpu;

TEST_CASE("zero gradient leaves parameters unchanged") {
  Eigen::VectorXd p(3);
  p << 1.0, -2.0, 0.5;
  const Eigen::VectorXd before = p;
  AdamState st;
  adam_step(p, Eigen::VectorXd::Zero(3), st, {});
  CHECK((p - before).cwiseAbs().maxCoeff() == 0.0);
  CHECK(st.t == 1);
}

TEST_CASE("first step with unit gradient moves by about -lr") {
  // hand evaluation at t=1: m_hat = g, v_hat = g^2,
  // step = lr * g / (|g| + eps) = 0.01 / (1 + 1e-8)
  Eigen::VectorXd p = Eigen::VectorXd::Zero(1);
  AdamState st;
  adam_step(p, Eigen::VectorXd::Ones(1), st, {});
  CHECK(p(0) == doctest::Approx(-0.01).epsilon(1e-6));
}

TEST_CASE("independent parameters do not couple") {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(2);
  AdamState st;
  Eigen::VectorXd g(2);
  g << 1.0, 0.0;
  for (int t = 0; t < 5; ++t) adam_step(p, g, st, {});
  CHECK(p(0) < 0.0);
  CHECK(p(1) == 0.0);

  // same trajectory as a scalar run for the active coordinate
  Eigen::VectorXd q = Eigen::VectorXd::Zero(1);
  AdamState st1;
  for (int t = 0; t < 5; ++t) adam_step(q, Eigen::VectorXd::Ones(1), st1, {});
  CHECK(p(0) == doctest::Approx(q(0)).epsilon(1e-15));
}

TEST_CASE("constant gradient: steps stay bounded near lr") {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(1);
  AdamState st;
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  double prev = 0;
  for (int t = 1; t <= 50; ++t) {
    adam_step(p, Eigen::VectorXd::Constant(1, 2.5), st, cfg);
    const double step = p(0) - prev;
    prev = p(0);
    CHECK(std::abs(step) <= cfg.learning_rate * 1.2);
  }
  CHECK(p(0) < -3.0);  // made consistent downhill progress
}
