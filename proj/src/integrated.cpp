#include "dpu/integrated.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "dpu/binio.hpp"
#include "dpu/rng.hpp"

namespace dpu::integrated {

namespace {

double softplus(double x) { return x > 40 ? x : std::log1p(std::exp(x)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double inverse_softplus(double y) {
  if (y <= 0) return -745.0;  // softplus floor, effectively zero
  return y > 40 ? y : std::log(std::expm1(y));
}

}  // namespace

Eigen::Index IntegratedGeometry::grid_size() const {
  return static_cast<Eigen::Index>(std::llround(window_width / grid_pitch));
}

int IntegratedGeometry::samples_per_neuron() const {
  const double per_atom = atom_period / grid_pitch;
  const double rounded = std::round(per_atom);
  if (std::abs(per_atom - rounded) > 1e-9 * per_atom || rounded < 1)
    throw std::invalid_argument("integrated geometry: grid pitch does not divide atom period");
  return atoms_per_neuron * static_cast<int>(rounded);
}

void IntegratedGeometry::validate() const {
  if (wavelength <= 0 || n_eff <= 0 || grid_pitch <= 0 || window_width <= 0)
    throw std::invalid_argument("integrated geometry: non-positive scale");
  if (n_inputs < 1 || n_neurons < 1 || atoms_per_neuron < 1)
    throw std::invalid_argument("integrated geometry: empty layout");
  (void)samples_per_neuron();  // checks pitch divisibility
  if (metaline_width() > window_width + 1e-12)
    throw std::invalid_argument("integrated geometry: metaline wider than window");
  const double input_span = (n_inputs - 1) * input_pitch;
  if (input_span >= window_width || output_separation >= window_width)
    throw std::invalid_argument("integrated geometry: ports outside window");
  if (plane_distance < 0) throw std::invalid_argument("integrated geometry: negative distance");
}

IntegratedGeometry toy_geometry(int n_neurons, int n_inputs) {
  IntegratedGeometry g;
  g.n_neurons = n_neurons;
  g.n_inputs = n_inputs;
  g.window_width = 60e-6;
  g.input_pitch = 4e-6;
  g.output_separation = 24e-6;
  g.plane_distance = 60e-6;
  g.mode_waist = 1.0e-6;
  g.validate();
  return g;
}

double IntegratedModel::bias(int k) const {
  return bias_enabled ? softplus(bias_raw[k]) : 0.0;
}

void IntegratedModel::validate() const {
  geometry.validate();
  if (logits.size() != geometry.n_neurons)
    throw std::invalid_argument("integrated model: logit count != neuron count");
  if (temperature <= 0) throw std::invalid_argument("integrated model: temperature must be > 0");
}

IntegratedModel make_model(const IntegratedGeometry& geom, std::uint64_t seed) {
  geom.validate();
  IntegratedModel m;
  m.geometry = geom;
  m.logits.resize(geom.n_neurons);
  Rng rng(derive_seed(seed, "integrated.init"));
  for (Eigen::Index i = 0; i < m.logits.size(); ++i) m.logits(i) = rng.uniform(-0.5, 0.5);
  m.bias_raw[0] = inverse_softplus(0.1);
  m.bias_raw[1] = inverse_softplus(0.1);
  return m;
}

Eigen::VectorXd binarize(const Eigen::VectorXd& logits, double temperature, BinarizeMode mode,
                         double phase_slot, double phase_no_slot) {
  if (temperature <= 0) throw std::invalid_argument("binarize: temperature must be > 0");
  Eigen::VectorXd phases(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const double w = mode == BinarizeMode::Hard ? (logits(i) > 0 ? 1.0 : 0.0)
                                                : sigmoid(logits(i) / temperature);
    phases(i) = phase_no_slot + (phase_slot - phase_no_slot) * w;
  }
  return phases;
}

namespace {

Eigen::MatrixXd gaussian_modes(const IntegratedGeometry& geom,
                               const std::vector<double>& positions) {
  const Eigen::Index n = geom.grid_size();
  Eigen::MatrixXd modes(n, static_cast<Eigen::Index>(positions.size()));
  for (std::size_t k = 0; k < positions.size(); ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = (i - (n - 1) / 2.0) * geom.grid_pitch - positions[k];
      modes(i, static_cast<Eigen::Index>(k)) =
          std::exp(-(t * t) / (geom.mode_waist * geom.mode_waist));
    }
    modes.col(static_cast<Eigen::Index>(k)).normalize();
  }
  return modes;
}

}  // namespace

Eigen::MatrixXd input_modes(const IntegratedGeometry& geom) {
  std::vector<double> pos(geom.n_inputs);
  for (int k = 0; k < geom.n_inputs; ++k)
    pos[k] = (k - (geom.n_inputs - 1) / 2.0) * geom.input_pitch;
  Eigen::MatrixXd m = gaussian_modes(geom, pos);
  for (int k = 0; k + 1 < geom.n_inputs; ++k)
    if (std::abs(m.col(k).dot(m.col(k + 1))) > 1e-3)
      throw std::invalid_argument("inject: waveguide modes overlap (waist too large for pitch)");
  return m;
}

Eigen::MatrixXd output_modes(const IntegratedGeometry& geom) {
  return gaussian_modes(geom, {-geom.output_separation / 2.0, geom.output_separation / 2.0});
}

Field1<double> inject(const Eigen::VectorXd& x, const IntegratedGeometry& geom) {
  geom.validate();
  if (x.size() != geom.n_inputs) throw std::invalid_argument("inject: feature length mismatch");
  if ((x.array() < 0).any()) throw std::invalid_argument("inject: amplitudes must be >= 0");
  Field1<double> f;
  f.pitch = geom.grid_pitch;
  f.wavelength = geom.wavelength_eff();
  f.amp = (input_modes(geom) * x).cast<std::complex<double>>();
  return f;
}

fft::CVector<double> modulate_metaline(const fft::CVector<double>& u,
                                       const Eigen::VectorXd& neuron_phases,
                                       const IntegratedGeometry& geom) {
  if (neuron_phases.size() != geom.n_neurons)
    throw std::invalid_argument("modulate_metaline: phase count != neuron count");
  const Eigen::Index n = geom.grid_size();
  if (u.size() != n) throw std::invalid_argument("modulate_metaline: field size mismatch");
  const int spn = geom.samples_per_neuron();
  const Eigen::Index aperture = static_cast<Eigen::Index>(spn) * geom.n_neurons;
  const Eigen::Index start = (n - aperture) / 2;

  fft::CVector<double> out = fft::CVector<double>::Zero(n);
  for (int k = 0; k < geom.n_neurons; ++k) {
    const std::complex<double> m(std::cos(neuron_phases(k)), std::sin(neuron_phases(k)));
    out.segment(start + static_cast<Eigen::Index>(k) * spn, spn) =
        m * u.segment(start + static_cast<Eigen::Index>(k) * spn, spn);
  }
  return out;
}

std::pair<double, double> read_outputs(const fft::CVector<double>& u,
                                       const IntegratedGeometry& geom) {
  const Eigen::MatrixXd m = output_modes(geom);
  const std::complex<double> s1 = (m.col(0).cast<std::complex<double>>().array() * u.array()).sum();
  const std::complex<double> s2 = (m.col(1).cast<std::complex<double>>().array() * u.array()).sum();
  return {std::norm(s1), std::norm(s2)};
}

Engine::Engine(const IntegratedGeometry& geom)
    : geom_(geom),
      in_modes_(input_modes(geom)),
      out_modes_(output_modes(geom)),
      prop_(geom.grid_size(), geom.grid_pitch, geom.wavelength_eff(),
            geom.plane_distance / 2.0, true) {}

IntegratedTrace Engine::forward(const IntegratedModel& model, const Eigen::VectorXd& x,
                                BinarizeMode mode) {
  if (x.size() != geom_.n_inputs) throw std::invalid_argument("forward: feature length mismatch");
  if ((x.array() < 0).any()) throw std::invalid_argument("forward: amplitudes must be >= 0");

  IntegratedTrace t;
  t.phases = binarize(model.logits, model.temperature, mode, geom_.phase_slot,
                      geom_.phase_no_slot);
  t.u_in = (in_modes_ * x).cast<std::complex<double>>();
  t.u_mid = prop_.apply(t.u_in);
  t.u_mod = modulate_metaline(t.u_mid, t.phases, geom_);
  t.u_out = prop_.apply(t.u_mod);
  t.s[0] = (out_modes_.col(0).cast<std::complex<double>>().array() * t.u_out.array()).sum();
  t.s[1] = (out_modes_.col(1).cast<std::complex<double>>().array() * t.u_out.array()).sum();

  t.out.p1 = std::norm(t.s[0]);
  t.out.p2 = std::norm(t.s[1]);
  t.out.s1 = t.out.p1 + model.bias(0);
  t.out.s2 = t.out.p2 + model.bias(1);
  t.out.seizure = t.out.s1 > t.out.s2;
  return t;
}

Engine::Gradients Engine::backward(const IntegratedModel& model, const IntegratedTrace& trace,
                                   double g_s1, double g_s2) {
  Gradients g;
  if (model.bias_enabled) {
    g.dbias_raw[0] = g_s1 * sigmoid(model.bias_raw[0]);
    g.dbias_raw[1] = g_s2 * sigmoid(model.bias_raw[1]);
  }

  // P = |s|^2, s = m^T u
  fft::CVector<double> g_uout =
      out_modes_.col(0).cast<std::complex<double>>() * (2.0 * g_s1 * trace.s[0]) +
      out_modes_.col(1).cast<std::complex<double>>() * (2.0 * g_s2 * trace.s[1]);
  fft::CVector<double> g_umod = prop_.apply(g_uout, /*adjoint=*/true);

  // u_mod = e^{j phi} u_mid inside the aperture: g_phi = Im(conj(u_mod) g_umod)
  const int spn = geom_.samples_per_neuron();
  const Eigen::Index aperture = static_cast<Eigen::Index>(spn) * geom_.n_neurons;
  const Eigen::Index start = (geom_.grid_size() - aperture) / 2;
  g.dlogits.setZero(geom_.n_neurons);
  const double span_phase = geom_.phase_slot - geom_.phase_no_slot;
  for (int k = 0; k < geom_.n_neurons; ++k) {
    const auto seg_mod = trace.u_mod.segment(start + static_cast<Eigen::Index>(k) * spn, spn);
    const auto seg_g = g_umod.segment(start + static_cast<Eigen::Index>(k) * spn, spn);
    const double g_phi = (seg_mod.array().conjugate() * seg_g.array()).imag().sum();
    // straight-through: relaxed sigmoid derivative regardless of forward mode
    const double sg = sigmoid(model.logits(k) / model.temperature);
    g.dlogits(k) = g_phi * span_phase * sg * (1.0 - sg) / model.temperature;
  }
  return g;
}

IntegratedTrace forward_integrated(const IntegratedModel& model, const Eigen::VectorXd& x,
                                   BinarizeMode mode) {
  model.validate();
  Engine eng(model.geometry);
  return eng.forward(model, x, mode);
}

namespace {
constexpr char kMagic[4] = {'D', 'P', 'U', 'I'};
}

void save_model(const std::string& path, const IntegratedModel& model, bool include_logits) {
  model.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_model: cannot open " + path);
  const auto& g = model.geometry;
  binio::write_magic(os, kMagic);
  binio::write_le<std::uint32_t>(os, 1);
  binio::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.n_inputs));
  binio::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.n_neurons));
  binio::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.atoms_per_neuron));
  for (double v : {g.wavelength, g.n_eff, g.input_pitch, g.output_separation, g.plane_distance,
                   g.atom_period, g.atom_height, g.mode_waist, g.grid_pitch, g.window_width,
                   g.phase_slot, g.phase_no_slot})
    binio::write_le<double>(os, v);
  binio::write_le<std::uint8_t>(os, model.bias_enabled ? 1 : 0);
  binio::write_le<double>(os, model.temperature);

  // hard neuron states, one bit per neuron (bit set = slot)
  const int n = g.n_neurons;
  for (int byte = 0; byte * 8 < n; ++byte) {
    std::uint8_t b = 0;
    for (int bit = 0; bit < 8 && byte * 8 + bit < n; ++bit)
      if (model.logits(byte * 8 + bit) > 0) b |= static_cast<std::uint8_t>(1u << bit);
    binio::write_le<std::uint8_t>(os, b);
  }
  binio::write_le<double>(os, softplus(model.bias_raw[0]));
  binio::write_le<double>(os, softplus(model.bias_raw[1]));
  binio::write_le<std::uint8_t>(os, include_logits ? 1 : 0);
  if (include_logits)
    for (int i = 0; i < n; ++i) binio::write_le<double>(os, model.logits(i));
  if (!os) throw std::runtime_error("save_model: write failed");
}

IntegratedModel load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_model: cannot open " + path);
  binio::expect_magic(is, kMagic, "load_model");
  if (binio::read_le<std::uint32_t>(is) != 1)
    throw std::runtime_error("load_model: unsupported version");

  IntegratedModel m;
  auto& g = m.geometry;
  g.n_inputs = static_cast<int>(binio::read_le<std::uint32_t>(is));
  g.n_neurons = static_cast<int>(binio::read_le<std::uint32_t>(is));
  g.atoms_per_neuron = static_cast<int>(binio::read_le<std::uint32_t>(is));
  for (double* v : {&g.wavelength, &g.n_eff, &g.input_pitch, &g.output_separation,
                    &g.plane_distance, &g.atom_period, &g.atom_height, &g.mode_waist,
                    &g.grid_pitch, &g.window_width, &g.phase_slot, &g.phase_no_slot})
    *v = binio::read_le<double>(is);
  m.bias_enabled = binio::read_le<std::uint8_t>(is) != 0;
  m.temperature = binio::read_le<double>(is);

  const int n = g.n_neurons;
  std::vector<bool> slots(n);
  for (int byte = 0; byte * 8 < n; ++byte) {
    const auto b = binio::read_le<std::uint8_t>(is);
    for (int bit = 0; bit < 8 && byte * 8 + bit < n; ++bit)
      slots[byte * 8 + bit] = (b >> bit) & 1;
  }
  m.bias_raw[0] = inverse_softplus(binio::read_le<double>(is));
  m.bias_raw[1] = inverse_softplus(binio::read_le<double>(is));
  const bool has_logits = binio::read_le<std::uint8_t>(is) != 0;
  m.logits.resize(n);
  if (has_logits) {
    for (int i = 0; i < n; ++i) m.logits(i) = binio::read_le<double>(is);
  } else {
    for (int i = 0; i < n; ++i) m.logits(i) = slots[i] ? 6.0 : -6.0;
  }
  m.validate();
  return m;
}

}  // namespace dpu::integrated
