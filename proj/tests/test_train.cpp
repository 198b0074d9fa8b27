#include <doctest.h>

#include "dpu/adapt.hpp"
#include "dpu/train.hpp"
#include "fixtures.hpp"

using namespace dpu;
using namespace dpu::train;

namespace {

freespace::FreespaceModel small_fs_model(Eigen::Index n, std::uint64_t seed) {
  auto m = freespace::make_model(2, n, n, seed);
  m.z = 0.002;
  return m;
}

}  // namespace

TEST_CASE("lr = 0 leaves every parameter bitwise unchanged") {
  const auto m = small_fs_model(16, 1);
  const auto ds = fixtures::blob_images(16, 8, 2);
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.epochs = 3;
  cfg.batch_size = 4;
  const auto res = train_freespace(m, ds, cfg);
  for (int i = 0; i < 2; ++i) CHECK((res.model.layers[i] == m.layers[i]).all());
  CHECK(res.model.activations[0] == m.activations[0]);
}

TEST_CASE("same seed reproduces the training trace bitwise") {
  const auto m = small_fs_model(16, 3);
  const auto ds = fixtures::blob_images(16, 10, 4);
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.batch_size = 5;
  cfg.seed = 77;
  const auto a = train_freespace(m, ds, cfg);
  const auto b = train_freespace(m, ds, cfg);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].loss == b.trace[i].loss);
    CHECK(a.trace[i].accuracy == b.trace[i].accuracy);
  }
  for (int l = 0; l < 2; ++l) CHECK((a.model.layers[l] == b.model.layers[l]).all());

  TrainConfig other = cfg;
  other.seed = 78;
  const auto c = train_freespace(m, ds, other);
  bool same = true;
  for (int l = 0; l < 2; ++l) same = same && (a.model.layers[l] == c.model.layers[l]).all();
  CHECK_FALSE(same);
}

TEST_CASE("training reduces the loss on a small separable image task") {
  const auto m = small_fs_model(16, 5);
  const auto ds = fixtures::blob_images(16, 16, 6);
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.batch_size = 8;
  const auto res = train_freespace(m, ds, cfg);
  CHECK(res.trace.front().epoch == 0);
  CHECK(res.trace.back().loss < res.trace.front().loss);
  // best checkpoint rule: final model loss equals the minimum of the trace
  double best = res.trace.front().loss;
  for (const auto& row : res.trace) best = std::min(best, row.loss);
  freespace::Engine eng(res.model);
  double loss = 0;
  for (std::size_t i = 0; i < ds.images.size(); ++i) {
    auto t = eng.forward(res.model, ds.images[i]);
    const Eigen::ArrayXXd target = (ds.labels[i] ? res.model.regions.seizure
                                                 : res.model.regions.non_seizure)
                                       .select(Eigen::ArrayXXd::Ones(16, 16),
                                               Eigen::ArrayXXd::Zero(16, 16));
    loss += mse(t.y.back(), target);
  }
  loss /= double(ds.images.size());
  CHECK(loss == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("integrated training learns a trivially separable vector task") {
  const auto geom = integrated::toy_geometry(32, 8);
  const auto m = integrated::make_model(geom, 7);
  const auto ds = fixtures::half_energy_vectors(8, 40, 8);
  TrainConfig cfg;
  cfg.epochs = 60;
  cfg.batch_size = 10;
  cfg.loss = LossKind::CrossEntropy;
  const auto res = train_integrated(m, ds, cfg);
  const auto stats = evaluate_integrated(res.model, ds);
  const double acc = double(stats.tp + stats.tn) / double(stats.total());
  CHECK(acc >= 0.95);
}

TEST_CASE("integrated determinism and lr = 0 contract") {
  const auto geom = integrated::toy_geometry(16, 8);
  const auto m = integrated::make_model(geom, 9);
  const auto ds = fixtures::half_energy_vectors(8, 12, 10);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.learning_rate = 0.0;
  const auto res = train_integrated(m, ds, cfg);
  CHECK(res.model.logits == m.logits);

  cfg.learning_rate = 0.02;
  cfg.seed = 5;
  const auto a = train_integrated(m, ds, cfg);
  const auto b = train_integrated(m, ds, cfg);
  CHECK(a.model.logits == b.model.logits);
  CHECK(a.model.bias_raw[0] == b.model.bias_raw[0]);
}

TEST_CASE("divergence aborts with the failing epoch in the message") {
  const auto geom = integrated::toy_geometry(16, 8);
  auto m = integrated::make_model(geom, 11);
  const auto ds = fixtures::half_energy_vectors(8, 8, 12);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.learning_rate = 1e155;  // drives softplus(bias) to overflow
  CHECK_THROWS_WITH_AS(train_integrated(m, ds, cfg), doctest::Contains("diverged"),
                       std::runtime_error);
}

TEST_CASE("adaptive retraining: identity profile never worsens train loss") {
  const Eigen::Index n = 16;
  const auto ds = fixtures::blob_images(n, 12, 20);
  auto m = small_fs_model(n, 21);
  TrainConfig pre;
  pre.epochs = 15;
  pre.batch_size = 6;
  const auto trained = train_freespace(m, ds, pre);

  const auto profile = freespace::identity_profile(n, n);
  TrainConfig cfg;
  cfg.epochs = 8;
  cfg.batch_size = 6;
  const auto adapted = adaptive_retrain(trained.model, profile, ds, cfg);

  // trace row 0 is the incoming model; the returned best can only improve
  CHECK(adapted.trace.back().loss <= adapted.trace.front().loss + 1e-12);
  double best = adapted.trace.front().loss;
  for (const auto& row : adapted.trace) best = std::min(best, row.loss);
  CHECK(best <= adapted.trace.front().loss);
}

TEST_CASE("adaptive retraining freezes the first layer bitwise") {
  const Eigen::Index n = 16;
  const auto ds = fixtures::blob_images(n, 10, 30);
  const auto m = small_fs_model(n, 31);
  const auto profile = freespace::stress_profile(n, n, 32);
  TrainConfig cfg;
  cfg.epochs = 6;
  cfg.batch_size = 5;
  const auto adapted = adaptive_retrain(m, profile, ds, cfg);
  CHECK((adapted.model.layers[0] == m.layers[0]).all());
  CHECK_FALSE((adapted.model.layers[1] == m.layers[1]).all());
  CHECK(adapted.model.region_scale >= 0.9);
  CHECK(adapted.model.region_scale <= 1.1);
}

TEST_CASE("adaptive retraining needs at least two layers") {
  const auto ds = fixtures::blob_images(16, 4, 40);
  auto m = freespace::make_model(1, 16, 16, 41);
  m.z = 0.002;
  const auto profile = freespace::identity_profile(16, 16);
  CHECK_THROWS(adaptive_retrain(m, profile, ds, TrainConfig{}));
}

TEST_CASE("evaluate_freespace counts match manual forward passes") {
  const Eigen::Index n = 16;
  const auto ds = fixtures::blob_images(n, 10, 50);
  const auto m = small_fs_model(n, 51);
  const auto stats = evaluate_freespace(m, ds);
  CHECK(stats.total() == 10);
  freespace::Engine eng(m);
  ConfusionStats manual;
  for (std::size_t i = 0; i < ds.images.size(); ++i)
    manual.add(eng.forward(m, ds.images[i]).out.seizure, ds.labels[i]);
  CHECK(manual.tp == stats.tp);
  CHECK(manual.fp == stats.fp);
  CHECK(manual.tn == stats.tn);
  CHECK(manual.fn == stats.fn);
}

TEST_CASE("loss primitives match their closed forms") {
  Eigen::ArrayXXd p(1, 1), t(1, 1);
  p(0, 0) = 1.0;
  t(0, 0) = 0.0;
  CHECK(mse(p, p) == 0.0);
  CHECK(mse(p, t) == 1.0);
  CHECK_THROWS(mse(p, Eigen::ArrayXXd::Zero(2, 2)));
  CHECK(cross_entropy2(0.0, 0.0, 0) == doctest::Approx(std::log(2.0)));
  CHECK(cross_entropy2(5.0, 5.0, 1) == doctest::Approx(std::log(2.0)));
  const auto [g0, g1] = cross_entropy2_grad(0.0, 0.0, 0);
  CHECK(g0 == doctest::Approx(-0.5));
  CHECK(g1 == doctest::Approx(0.5));
}
