#pragma once

// Synthetic end-to-end datasets shared by the training tests and the
// acceptance suite.

#include <Eigen/Dense>
#include <cstdint>

#include "dpu/rng.hpp"
#include "dpu/train.hpp"

namespace fixtures {

// Two-class images: a soft blob whose quadrant encodes the class, plus
// light background noise. Pixel range stays below ~0.75 so the phase
// encoding never wraps 0 onto 2 pi.
inline dpu::train::FreespaceDataset blob_images(Eigen::Index n, int count,
                                                std::uint64_t seed) {
  dpu::Rng rng(dpu::derive_seed(seed, "fixture.blob"));
  dpu::train::FreespaceDataset ds;
  for (int s = 0; s < count; ++s) {
    const bool seizure = s % 2 == 0;
    const double cr = (seizure ? n / 3.0 : 2.0 * n / 3.0) + rng.uniform(-n / 10.0, n / 10.0);
    const double cc = (seizure ? n / 3.0 : 2.0 * n / 3.0) + rng.uniform(-n / 10.0, n / 10.0);
    const double sigma = n / 7.0;
    Eigen::ArrayXXd img(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < n; ++c) {
        const double d2 = (r - cr) * (r - cr) + (c - cc) * (c - cc);
        img(r, c) = 0.6 * std::exp(-d2 / (2.0 * sigma * sigma)) + 0.08 * rng.uniform();
      }
    ds.images.push_back(img);
    ds.labels.push_back(seizure);
  }
  return ds;
}

// Two-class nonnegative 16-dim vectors: class decides which half of the
// inputs carries the energy.
inline dpu::train::VectorDataset half_energy_vectors(int dims, int count,
                                                     std::uint64_t seed) {
  dpu::Rng rng(dpu::derive_seed(seed, "fixture.vec"));
  dpu::train::VectorDataset ds;
  ds.X.resize(count, dims);
  for (int s = 0; s < count; ++s) {
    const bool seizure = s % 2 == 0;
    for (int k = 0; k < dims; ++k) {
      const bool hot = seizure ? k < dims / 2 : k >= dims / 2;
      ds.X(s, k) = hot ? rng.uniform(0.6, 1.0) : rng.uniform(0.0, 0.15);
    }
    ds.labels.push_back(seizure);
  }
  return ds;
}

// Imbalanced (about 1 seizure per 10 non-seizure) features where the class
// signal is mostly overall magnitude: the bias-free coherent readout is
// scale-invariant, so the bias block is what makes the magnitude usable.
// Seizures also lean weakly toward the first inputs (the seizure output's
// side of the axis), which keeps the learning direction consistent.
inline dpu::train::VectorDataset imbalanced_vectors(int dims, int count,
                                                    std::uint64_t seed) {
  dpu::Rng rng(dpu::derive_seed(seed, "fixture.imb"));
  dpu::train::VectorDataset ds;
  ds.X.resize(count, dims);
  for (int s = 0; s < count; ++s) {
    const bool seizure = s % 11 == 0;
    const double mag = seizure ? rng.uniform(3.0, 4.0) : rng.uniform(1.2, 2.4);
    for (int k = 0; k < dims; ++k) {
      double v = mag * (0.55 + 0.45 * rng.uniform());
      if (seizure && k < dims / 2) v *= 1.3;
      ds.X(s, k) = v;
    }
    ds.labels.push_back(seizure);
  }
  return ds;
}

inline dpu::train::FreespaceDataset slice(const dpu::train::FreespaceDataset& ds, int from,
                                          int to) {
  dpu::train::FreespaceDataset out;
  for (int i = from; i < to; ++i) {
    out.images.push_back(ds.images[static_cast<std::size_t>(i)]);
    out.labels.push_back(ds.labels[static_cast<std::size_t>(i)]);
  }
  return out;
}

inline dpu::train::VectorDataset slice(const dpu::train::VectorDataset& ds, int from, int to) {
  dpu::train::VectorDataset out;
  out.X = ds.X.middleRows(from, to - from);
  for (int i = from; i < to; ++i) out.labels.push_back(ds.labels[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace fixtures
