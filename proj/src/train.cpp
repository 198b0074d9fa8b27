#include "dpu/train.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dpu/rng.hpp"

namespace dpu::train {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// -------- free-space parameter packing --------

struct FsLayout {
  int n_layers = 0;
  int first = 1;  // first trained layer (1-based)
  Eigen::Index map_size = 0;

  Eigen::Index total() const {
    const int maps = n_layers - (first - 1);
    const int abs_count = n_layers - std::max(first - 1, 1);
    return maps * map_size + 2 * std::max(abs_count, 0);
  }
  int first_ab() const { return std::max(first - 2, 0); }  // trained activation index
};

Eigen::VectorXd pack_freespace(const freespace::FreespaceModel& m, const FsLayout& lay) {
  Eigen::VectorXd p(lay.total());
  Eigen::Index at = 0;
  for (int i = lay.first - 1; i < lay.n_layers; ++i) {
    p.segment(at, lay.map_size) =
        Eigen::Map<const Eigen::VectorXd>(m.layers[i].data(), lay.map_size);
    at += lay.map_size;
  }
  for (int j = lay.first_ab(); j + 1 < lay.n_layers; ++j) {
    p(at++) = m.activations[j].first;
    p(at++) = m.activations[j].second;
  }
  return p;
}

void unpack_freespace(const Eigen::VectorXd& p, const FsLayout& lay,
                      freespace::FreespaceModel& m) {
  Eigen::Index at = 0;
  for (int i = lay.first - 1; i < lay.n_layers; ++i) {
    Eigen::Map<Eigen::VectorXd>(m.layers[i].data(), lay.map_size) = p.segment(at, lay.map_size);
    // phase maps live in [0, 2pi)
    m.layers[i] -= kTwoPi * (m.layers[i] / kTwoPi).floor();
    at += lay.map_size;
  }
  for (int j = lay.first_ab(); j + 1 < lay.n_layers; ++j) {
    m.activations[j].first = p(at++);
    m.activations[j].second = p(at++);
  }
}

Eigen::VectorXd pack_freespace_grad(const freespace::Engine::Gradients& g, const FsLayout& lay) {
  Eigen::VectorXd p(lay.total());
  Eigen::Index at = 0;
  for (int i = lay.first - 1; i < lay.n_layers; ++i) {
    p.segment(at, lay.map_size) = Eigen::Map<const Eigen::VectorXd>(g.dH[i].data(), lay.map_size);
    at += lay.map_size;
  }
  for (int j = lay.first_ab(); j + 1 < lay.n_layers; ++j) {
    p(at++) = g.dab[j].first;
    p(at++) = g.dab[j].second;
  }
  return p;
}

Eigen::ArrayXXd target_map(const freespace::FreespaceModel& m, bool seizure) {
  const auto& mask = seizure ? m.regions.seizure : m.regions.non_seizure;
  return mask.select(Eigen::ArrayXXd::Ones(mask.rows(), mask.cols()),
                     Eigen::ArrayXXd::Zero(mask.rows(), mask.cols()));
}

struct RegionMeans {
  double i1 = 0, i2 = 0;  // detector-gain applied, c not applied
};

RegionMeans region_means(const freespace::FreespaceModel& m, const Eigen::ArrayXXd& yn,
                         const freespace::AberrationProfile* profile) {
  RegionMeans r;
  r.i1 = m.regions.seizure.select(yn, 0.0).sum() / double(m.regions.seizure.count());
  r.i2 = m.regions.non_seizure.select(yn, 0.0).sum() / double(m.regions.non_seizure.count());
  if (profile) {
    r.i1 *= profile->detector_gain[0];
    r.i2 *= profile->detector_gain[1];
  }
  return r;
}

// per-sample loss and dL/dyN for the configured loss
double freespace_loss_grad(const freespace::FreespaceModel& m, const Eigen::ArrayXXd& yn,
                           bool label, LossKind kind,
                           const freespace::AberrationProfile* profile,
                           Eigen::ArrayXXd* g_yn) {
  if (kind == LossKind::Mse) {
    const Eigen::ArrayXXd t = target_map(m, label);
    if (g_yn) *g_yn = mse_grad(yn, t);
    return mse(yn, t);
  }
  const RegionMeans r = region_means(m, yn, profile);
  const int target = label ? 0 : 1;  // output 0 is the seizure side
  if (g_yn) {
    const auto [g1, g2] = cross_entropy2_grad(r.i1, r.i2, target);
    const double gain1 = profile ? profile->detector_gain[0] : 1.0;
    const double gain2 = profile ? profile->detector_gain[1] : 1.0;
    *g_yn = Eigen::ArrayXXd::Zero(yn.rows(), yn.cols());
    *g_yn += m.regions.seizure.select(
        Eigen::ArrayXXd::Constant(yn.rows(), yn.cols(),
                                  g1 * gain1 / double(m.regions.seizure.count())),
        Eigen::ArrayXXd::Zero(yn.rows(), yn.cols()));
    *g_yn += m.regions.non_seizure.select(
        Eigen::ArrayXXd::Constant(yn.rows(), yn.cols(),
                                  g2 * gain2 / double(m.regions.non_seizure.count())),
        Eigen::ArrayXXd::Zero(yn.rows(), yn.cols()));
  }
  return cross_entropy2(r.i1, r.i2, target);
}

}  // namespace

FreespaceTrainResult train_freespace(const freespace::FreespaceModel& init,
                                     const FreespaceDataset& data, const TrainConfig& cfg,
                                     const freespace::AberrationProfile* profile,
                                     int first_trained_layer) {
  init.validate();
  if (data.images.empty() || data.images.size() != data.labels.size())
    throw std::invalid_argument("train_freespace: empty or inconsistent dataset");
  if (cfg.epochs < 0 || cfg.learning_rate < 0)
    throw std::invalid_argument("train_freespace: bad config");
  if (first_trained_layer < 1 || first_trained_layer > init.n_layers())
    throw std::invalid_argument("train_freespace: first_trained_layer out of range");

  freespace::FreespaceModel model = init;
  freespace::Engine eng(model);
  FsLayout lay{model.n_layers(), first_trained_layer, model.rows() * model.cols()};

  const int n = static_cast<int>(data.images.size());
  const int batch = cfg.batch_size <= 0 ? n : std::min(cfg.batch_size, n);

  auto full_eval = [&](freespace::FreespaceModel& m) {
    double loss_sum = 0;
    int correct = 0;
    for (int s = 0; s < n; ++s) {
      auto t = eng.forward(m, data.images[s], profile);
      loss_sum +=
          freespace_loss_grad(m, t.y.back(), data.labels[s], cfg.loss, profile, nullptr);
      if (t.out.seizure == data.labels[s]) ++correct;
    }
    return std::pair<double, double>{loss_sum / n, double(correct) / n};
  };

  FreespaceTrainResult res;
  auto [loss0, acc0] = full_eval(model);
  res.trace.push_back({0, loss0, acc0});
  Eigen::VectorXd best_params = pack_freespace(model, lay);
  double best_loss = loss0;

  Eigen::VectorXd params = best_params;
  AdamState adam;
  Rng shuffler(derive_seed(cfg.seed, "train.shuffle"));
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.shuffle) shuffler.shuffle(order);
    for (int b0 = 0; b0 < n; b0 += batch) {
      const int bn = std::min(batch, n - b0);
      Eigen::VectorXd grad = Eigen::VectorXd::Zero(lay.total());
      for (int k = 0; k < bn; ++k) {
        const int s = order[b0 + k];
        auto t = eng.forward(model, data.images[s], profile);
        Eigen::ArrayXXd g_yn;
        freespace_loss_grad(model, t.y.back(), data.labels[s], cfg.loss, profile, &g_yn);
        auto g = eng.backward(model, t, g_yn, profile, first_trained_layer);
        grad += pack_freespace_grad(g, lay);
      }
      grad /= double(bn);
      adam_step(params, grad, adam, cfg.adam());
      unpack_freespace(params, lay, model);
      params = pack_freespace(model, lay);  // keep optimizer view wrapped too
    }

    auto [loss, acc] = full_eval(model);
    if (!std::isfinite(loss))
      throw std::runtime_error("train_freespace: diverged (non-finite loss) at epoch " +
                               std::to_string(epoch));
    res.trace.push_back({epoch, loss, acc});
    if (loss < best_loss) {
      best_loss = loss;
      best_params = params;
    }
  }

  unpack_freespace(best_params, lay, model);
  res.model = std::move(model);
  return res;
}

IntegratedTrainResult train_integrated(const integrated::IntegratedModel& init,
                                       const VectorDataset& data, const TrainConfig& cfg,
                                       bool train_bias) {
  init.validate();
  const int n = static_cast<int>(data.X.rows());
  if (n == 0 || data.labels.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("train_integrated: empty or inconsistent dataset");
  if (data.X.cols() != init.geometry.n_inputs)
    throw std::invalid_argument("train_integrated: feature width != n_inputs");

  integrated::IntegratedModel model = init;
  integrated::Engine eng(model.geometry);
  const int nl = model.geometry.n_neurons;
  const bool with_bias = train_bias && model.bias_enabled;
  const Eigen::Index dim = nl + (with_bias ? 2 : 0);

  auto pack = [&](const integrated::IntegratedModel& m) {
    Eigen::VectorXd p(dim);
    p.head(nl) = m.logits;
    if (with_bias) {
      p(nl) = m.bias_raw[0];
      p(nl + 1) = m.bias_raw[1];
    }
    return p;
  };
  auto unpack = [&](const Eigen::VectorXd& p, integrated::IntegratedModel& m) {
    m.logits = p.head(nl);
    if (with_bias) {
      m.bias_raw[0] = p(nl);
      m.bias_raw[1] = p(nl + 1);
    }
  };

  auto sample_loss = [&](integrated::IntegratedModel& m, int s, integrated::BinarizeMode mode,
                         double* gs1, double* gs2) {
    const auto t = eng.forward(m, data.X.row(s).transpose(), mode);
    const int target = data.labels[s] ? 0 : 1;
    double loss;
    if (cfg.loss == LossKind::CrossEntropy) {
      loss = cross_entropy2(t.out.s1, t.out.s2, target);
      if (gs1) std::tie(*gs1, *gs2) = cross_entropy2_grad(t.out.s1, t.out.s2, target);
    } else {
      const double t1 = target == 0 ? 1.0 : 0.0, t2 = 1.0 - t1;
      loss = 0.5 * ((t.out.s1 - t1) * (t.out.s1 - t1) + (t.out.s2 - t2) * (t.out.s2 - t2));
      if (gs1) {
        *gs1 = t.out.s1 - t1;
        *gs2 = t.out.s2 - t2;
      }
    }
    return std::pair{loss, t};
  };

  auto full_eval = [&](integrated::IntegratedModel& m) {
    double loss_sum = 0;
    int correct = 0;
    for (int s = 0; s < n; ++s) {
      auto [l, t] = sample_loss(m, s, cfg.binarize_mode, nullptr, nullptr);
      loss_sum += l;
      if (t.out.seizure == data.labels[s]) ++correct;
    }
    return std::pair<double, double>{loss_sum / n, double(correct) / n};
  };

  IntegratedTrainResult res;
  auto [loss0, acc0] = full_eval(model);
  res.trace.push_back({0, loss0, acc0});
  Eigen::VectorXd params = pack(model);
  Eigen::VectorXd best_params = params;
  double best_loss = loss0;

  AdamState adam;
  Rng shuffler(derive_seed(cfg.seed, "train.shuffle"));
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  const int batch = cfg.batch_size <= 0 ? n : std::min(cfg.batch_size, n);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.shuffle) shuffler.shuffle(order);
    for (int b0 = 0; b0 < n; b0 += batch) {
      const int bn = std::min(batch, n - b0);
      Eigen::VectorXd grad = Eigen::VectorXd::Zero(dim);
      for (int k = 0; k < bn; ++k) {
        const int s = order[b0 + k];
        double gs1 = 0, gs2 = 0;
        auto [l, t] = sample_loss(model, s, cfg.binarize_mode, &gs1, &gs2);
        auto g = eng.backward(model, t, gs1, gs2);
        grad.head(nl) += g.dlogits;
        if (with_bias) {
          grad(nl) += g.dbias_raw[0];
          grad(nl + 1) += g.dbias_raw[1];
        }
      }
      grad /= double(bn);
      adam_step(params, grad, adam, cfg.adam());
      unpack(params, model);
    }

    auto [loss, acc] = full_eval(model);
    if (!std::isfinite(loss))
      throw std::runtime_error("train_integrated: diverged (non-finite loss) at epoch " +
                               std::to_string(epoch));
    res.trace.push_back({epoch, loss, acc});
    if (loss < best_loss) {
      best_loss = loss;
      best_params = params;
    }
  }

  unpack(best_params, model);
  res.model = std::move(model);
  return res;
}

ConfusionStats evaluate_freespace(const freespace::FreespaceModel& model,
                                  const FreespaceDataset& data,
                                  const freespace::AberrationProfile* profile) {
  model.validate();
  freespace::Engine eng(model);
  ConfusionStats stats;
  for (std::size_t s = 0; s < data.images.size(); ++s) {
    const auto t = eng.forward(model, data.images[s], profile);
    stats.add(t.out.seizure, data.labels[s]);
  }
  return stats;
}

std::vector<ReadoutSample> collect_readouts(const freespace::FreespaceModel& model,
                                            const FreespaceDataset& data,
                                            const freespace::AberrationProfile* profile) {
  freespace::FreespaceModel raw = model;
  raw.region_scale = 1.0;
  freespace::Engine eng(raw);
  std::vector<ReadoutSample> out;
  out.reserve(data.images.size());
  for (std::size_t s = 0; s < data.images.size(); ++s) {
    const auto t = eng.forward(raw, data.images[s], profile);
    out.push_back({t.out.i1, t.out.i2, bool(data.labels[s])});
  }
  return out;
}

ConfusionStats evaluate_integrated(const integrated::IntegratedModel& model,
                                   const VectorDataset& data, integrated::BinarizeMode mode) {
  model.validate();
  integrated::Engine eng(model.geometry);
  ConfusionStats stats;
  for (Eigen::Index s = 0; s < data.X.rows(); ++s) {
    const auto t = eng.forward(model, data.X.row(s).transpose(), mode);
    stats.add(t.out.seizure, data.labels[static_cast<std::size_t>(s)]);
  }
  return stats;
}

}  // namespace dpu::train
