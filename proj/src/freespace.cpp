#include "dpu/freespace.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "dpu/binio.hpp"
#include "dpu/rng.hpp"

namespace dpu::freespace {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::ArrayXXd wrap_phase(const Eigen::ArrayXXd& h) {
  return h - kTwoPi * (h / kTwoPi).floor();
}

// displace by whole pixels with zero fill
Eigen::ArrayXXd shift_map(const Eigen::ArrayXXd& m, int dr, int dc) {
  const Eigen::Index rows = m.rows(), cols = m.cols();
  if (std::abs(dr) >= rows || std::abs(dc) >= cols)
    throw std::invalid_argument("emulate: shift larger than grid");
  Eigen::ArrayXXd out = Eigen::ArrayXXd::Zero(rows, cols);
  const Eigen::Index r0 = std::max(0, dr), c0 = std::max(0, dc);
  const Eigen::Index sr = std::max(0, -dr), sc = std::max(0, -dc);
  const Eigen::Index nr = rows - std::abs(dr), nc = cols - std::abs(dc);
  out.block(r0, c0, nr, nc) = m.block(sr, sc, nr, nc);
  return out;
}

}  // namespace

void DetectorRegions::validate() const {
  if (!seizure.any() || !non_seizure.any())
    throw std::invalid_argument("detector regions: empty mask");
  if (seizure.rows() != non_seizure.rows() || seizure.cols() != non_seizure.cols())
    throw std::invalid_argument("detector regions: mask shapes differ");
  if ((seizure && non_seizure).any())
    throw std::invalid_argument("detector regions: masks overlap");
}

DetectorRegions default_regions(Eigen::Index rows, Eigen::Index cols) {
  const Eigen::Index side = std::max<Eigen::Index>(1, rows / 8);
  DetectorRegions reg;
  reg.seizure = BoolMask::Constant(rows, cols, false);
  reg.non_seizure = BoolMask::Constant(rows, cols, false);
  auto place = [&](BoolMask& m, Eigen::Index cr, Eigen::Index cc) {
    const Eigen::Index r0 = std::max<Eigen::Index>(0, cr - side / 2);
    const Eigen::Index c0 = std::max<Eigen::Index>(0, cc - side / 2);
    m.block(r0, c0, std::min(side, rows - r0), std::min(side, cols - c0)) = true;
  };
  place(reg.seizure, rows / 2, cols / 4);
  place(reg.non_seizure, rows / 2, 3 * cols / 4);
  reg.validate();
  return reg;
}

void FreespaceModel::validate() const {
  if (layers.empty()) throw std::invalid_argument("freespace model: needs at least one layer");
  if (activations.size() + 1 != layers.size())
    throw std::invalid_argument("freespace model: activation count must be n_layers - 1");
  for (const auto& h : layers)
    if (h.rows() != rows() || h.cols() != cols())
      throw std::invalid_argument("freespace model: layer shape mismatch");
  if (region_scale < 0.9 || region_scale > 1.1)
    throw std::invalid_argument("freespace model: region scale outside [0.9, 1.1]");
  regions.validate();
  if (regions.seizure.rows() != rows() || regions.seizure.cols() != cols())
    throw std::invalid_argument("freespace model: region mask shape mismatch");
}

FreespaceModel make_model(int n_layers, Eigen::Index rows, Eigen::Index cols,
                          std::uint64_t seed) {
  if (n_layers < 1) throw std::invalid_argument("make_model: n_layers must be >= 1");
  FreespaceModel m;
  Rng rng(derive_seed(seed, "freespace.init"));
  for (int i = 0; i < n_layers; ++i) {
    Eigen::ArrayXXd h(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
      for (Eigen::Index r = 0; r < rows; ++r) h(r, c) = rng.uniform(0.0, kTwoPi);
    m.layers.push_back(std::move(h));
  }
  for (int i = 0; i + 1 < n_layers; ++i) m.activations.emplace_back(1.0, 0.0);
  m.regions = default_regions(rows, cols);
  m.validate();
  return m;
}

Readout readout(const Eigen::ArrayXXd& yn, const DetectorRegions& regions, double c) {
  regions.validate();
  if (yn.rows() != regions.seizure.rows() || yn.cols() != regions.seizure.cols())
    throw std::invalid_argument("readout: map/mask shape mismatch");
  Readout r;
  r.i1 = c * regions.seizure.select(yn, 0.0).sum() / double(regions.seizure.count());
  r.i2 = regions.non_seizure.select(yn, 0.0).sum() / double(regions.non_seizure.count());
  r.seizure = r.i1 > r.i2;
  return r;
}

Eigen::ArrayXXd layer_forward(const Eigen::ArrayXXd& x, const Eigen::ArrayXXd& h,
                              double pitch, double wavelength, double z, bool pad) {
  if (x.rows() != h.rows() || x.cols() != h.cols())
    throw std::invalid_argument("layer_forward: phase map shape mismatch");
  const Eigen::ArrayXXd phase = x + h;
  fft::CMatrix<double> field =
      phase.unaryExpr([](double p) {
        return std::complex<double>(std::cos(p), std::sin(p));
      }).matrix();
  optics::Propagator2<double> prop(x.rows(), x.cols(), pitch, wavelength, z, pad);
  return prop.apply(field).array().abs2();
}

Eigen::ArrayXXd activation(const Eigen::ArrayXXd& y, double a, double b) {
  return kTwoPi * (1.0 + (-(a * y + b)).exp()).inverse();
}

AberrationProfile identity_profile(Eigen::Index rows, Eigen::Index cols) {
  AberrationProfile p;
  p.illumination = Eigen::ArrayXXd::Ones(rows, cols);
  p.phase_error = Eigen::ArrayXXd::Zero(rows, cols);
  return p;
}

// Gaussian illumination falloff, a smooth low-order phase error (SLM
// curvature / alignment grade, not a diffuser), a one-pixel registration
// shift and uneven detector gains.
AberrationProfile stress_profile(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed,
                                 double phase_sigma) {
  AberrationProfile p = identity_profile(rows, cols);
  const double sr = double(rows) / 2.0, sc = double(cols) / 2.0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double dr = (double(r) - rows / 2.0) / sr;
      const double dc = (double(c) - cols / 2.0) / sc;
      p.illumination(r, c) = std::exp(-(dr * dr + dc * dc) / 2.0);
    }
  Rng rng(derive_seed(seed, "aberration.phase"));
  const double two_pi = 2.0 * std::numbers::pi;
  struct Wave {
    double fr, fc, phase, amp;
  };
  std::vector<Wave> waves(4);
  for (auto& w : waves)
    w = {rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0), rng.uniform(0.0, two_pi),
         rng.normal()};
  double sq = 0;
  for (const auto& w : waves) sq += 0.5 * w.amp * w.amp;
  const double scale = phase_sigma / std::sqrt(std::max(sq, 1e-12));
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      double v = 0;
      for (const auto& w : waves)
        v += w.amp * std::sin(two_pi * (w.fr * r / double(rows) + w.fc * c / double(cols)) +
                              w.phase);
      p.phase_error(r, c) = scale * v;
    }
  p.shift = {1, 1};
  p.detector_gain[0] = 1.25;
  p.detector_gain[1] = 0.85;
  return p;
}

Engine::Engine(const FreespaceModel& model)
    : prop_(model.rows(), model.cols(), model.pitch, model.wavelength, model.z, model.pad) {
  model.validate();
}

ForwardTrace Engine::forward(const FreespaceModel& model, const Eigen::ArrayXXd& image,
                             const AberrationProfile* profile) {
  const int n = model.n_layers();
  if (image.rows() != model.rows() || image.cols() != model.cols())
    throw std::invalid_argument("forward: image shape mismatch");
  if (profile && (profile->illumination.rows() != model.rows() ||
                  profile->phase_error.rows() != model.rows()))
    throw std::invalid_argument("forward: aberration profile shape mismatch");

  ForwardTrace t;
  t.x.resize(n);
  t.f.resize(n);
  t.u.resize(n);
  t.y.resize(n);

  fft::CMatrix<double> aberr;
  if (profile) {
    aberr = (profile->illumination.cast<std::complex<double>>() *
             (std::complex<double>(0, 1) * profile->phase_error.cast<std::complex<double>>())
                 .exp())
                .matrix();
  }

  t.x[0] = kTwoPi * image;
  for (int i = 0; i < n; ++i) {
    Eigen::ArrayXXd xi = t.x[i];
    if (profile && i > 0 && (profile->shift.first || profile->shift.second))
      xi = shift_map(xi, profile->shift.first, profile->shift.second);
    const Eigen::ArrayXXd phase = xi + model.layers[i];
    t.f[i] = phase.unaryExpr([](double p) {
      return std::complex<double>(std::cos(p), std::sin(p));
    }).matrix();
    fft::CMatrix<double> field = t.f[i];
    if (profile) field.array() *= aberr.array();
    t.u[i] = prop_.apply(field);
    t.y[i] = t.u[i].array().abs2();
    if (i + 1 < n) {
      const auto [a, b] = model.activations[i];
      t.x[i + 1] = activation(t.y[i], a, b);
    }
  }

  Readout r;
  const auto& reg = model.regions;
  double i1 = reg.seizure.select(t.y[n - 1], 0.0).sum() / double(reg.seizure.count());
  double i2 = reg.non_seizure.select(t.y[n - 1], 0.0).sum() / double(reg.non_seizure.count());
  if (profile) {
    i1 *= profile->detector_gain[0];
    i2 *= profile->detector_gain[1];
  }
  r.i1 = model.region_scale * i1;
  r.i2 = i2;
  r.seizure = r.i1 > r.i2;
  t.out = r;
  return t;
}

Engine::Gradients Engine::backward(const FreespaceModel& model, const ForwardTrace& trace,
                                   const Eigen::ArrayXXd& g_yn,
                                   const AberrationProfile* profile,
                                   int first_trained_layer) {
  const int n = model.n_layers();
  Gradients g;
  g.dH.assign(n, Eigen::ArrayXXd());
  g.dab.assign(n - 1, {0.0, 0.0});

  fft::CMatrix<double> aberr_conj;
  if (profile) {
    aberr_conj = (profile->illumination.cast<std::complex<double>>() *
                  (std::complex<double>(0, -1) * profile->phase_error.cast<std::complex<double>>())
                      .exp())
                     .matrix();
  }

  Eigen::ArrayXXd g_y = g_yn;
  for (int i = n - 1; i >= first_trained_layer - 1; --i) {
    // y = |u|^2  ->  g_u = 2 g_y .* u   (cotangent = dL/dRe + j dL/dIm)
    fft::CMatrix<double> g_u =
        ((2.0 * g_y).cast<std::complex<double>>() * trace.u[i].array()).matrix();
    fft::CMatrix<double> g_f = prop_.apply(g_u, /*adjoint=*/true);
    if (profile) g_f.array() *= aberr_conj.array();
    // f = exp(j phi): g_phi = Im(conj(f) g_f)
    Eigen::ArrayXXd g_phi = (trace.f[i].array().conjugate() * g_f.array()).imag();
    g.dH[i] = g_phi;

    if (i == 0) break;
    Eigen::ArrayXXd g_x = g_phi;
    if (profile && (profile->shift.first || profile->shift.second))
      g_x = shift_map(g_x, -profile->shift.first, -profile->shift.second);  // adjoint shift
    // x = 2 pi sigmoid(a y + b); sigmoid value is x / 2pi
    const auto [a, b] = model.activations[i - 1];
    const Eigen::ArrayXXd s = trace.x[i] / kTwoPi;
    const Eigen::ArrayXXd g_t = g_x * kTwoPi * s * (1.0 - s);
    g.dab[i - 1].first = (g_t * trace.y[i - 1]).sum();
    g.dab[i - 1].second = g_t.sum();
    g_y = a * g_t;
  }
  return g;
}

ForwardTrace forward(const FreespaceModel& model, const Eigen::ArrayXXd& image) {
  Engine eng(model);
  return eng.forward(model, image);
}

ForwardTrace emulate_hardware(const FreespaceModel& model, const AberrationProfile& profile,
                              const Eigen::ArrayXXd& image) {
  Engine eng(model);
  return eng.forward(model, image, &profile);
}

namespace {
constexpr char kMagic[4] = {'D', 'P', 'U', 'M'};
}

void save_model(const std::string& path, const FreespaceModel& model) {
  model.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_model: cannot open " + path);
  binio::write_magic(os, kMagic);
  binio::write_le<std::uint32_t>(os, 1);
  binio::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(model.n_layers()));
  binio::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(model.rows()));
  binio::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(model.cols()));
  binio::write_le<double>(os, model.pitch);
  binio::write_le<double>(os, model.wavelength);
  binio::write_le<double>(os, model.z);
  binio::write_le<std::uint8_t>(os, model.pad ? 1 : 0);
  for (const auto& h : model.layers) {
    const Eigen::ArrayXXd w = wrap_phase(h);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        binio::write_le<float>(os, static_cast<float>(w(r, c)));
  }
  for (const auto& [a, b] : model.activations) {
    binio::write_le<float>(os, static_cast<float>(a));
    binio::write_le<float>(os, static_cast<float>(b));
  }
  binio::write_le<float>(os, static_cast<float>(model.region_scale));
  auto write_mask = [&](const BoolMask& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        binio::write_le<std::uint8_t>(os, m(r, c) ? 1 : 0);
  };
  write_mask(model.regions.seizure);
  write_mask(model.regions.non_seizure);
  if (!os) throw std::runtime_error("save_model: write failed");
}

FreespaceModel load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_model: cannot open " + path);
  binio::expect_magic(is, kMagic, "load_model");
  const auto version = binio::read_le<std::uint32_t>(is);
  if (version != 1) throw std::runtime_error("load_model: unsupported version");
  const auto n = binio::read_le<std::uint32_t>(is);
  const auto rows = binio::read_le<std::uint32_t>(is);
  const auto cols = binio::read_le<std::uint32_t>(is);

  FreespaceModel m;
  m.pitch = binio::read_le<double>(is);
  m.wavelength = binio::read_le<double>(is);
  m.z = binio::read_le<double>(is);
  m.pad = binio::read_le<std::uint8_t>(is) != 0;
  for (std::uint32_t i = 0; i < n; ++i) {
    Eigen::ArrayXXd h(rows, cols);
    for (Eigen::Index r = 0; r < h.rows(); ++r)
      for (Eigen::Index c = 0; c < h.cols(); ++c) h(r, c) = binio::read_le<float>(is);
    m.layers.push_back(std::move(h));
  }
  for (std::uint32_t i = 0; i + 1 < n; ++i) {
    const double a = binio::read_le<float>(is);
    const double b = binio::read_le<float>(is);
    m.activations.emplace_back(a, b);
  }
  m.region_scale = binio::read_le<float>(is);
  auto read_mask = [&](BoolMask& mask) {
    mask.resize(rows, cols);
    for (Eigen::Index r = 0; r < mask.rows(); ++r)
      for (Eigen::Index c = 0; c < mask.cols(); ++c)
        mask(r, c) = binio::read_le<std::uint8_t>(is) != 0;
  };
  read_mask(m.regions.seizure);
  read_mask(m.regions.non_seizure);
  m.validate();
  return m;
}

}  // namespace dpu::freespace
