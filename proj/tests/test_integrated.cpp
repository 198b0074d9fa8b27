#include <doctest.h>

#include <cstdio>

#include "dpu/integrated.hpp"
#include "dpu/rng.hpp"
#include "oracles.hpp"

using namespace dpu;
using namespace dpu::integrated;

TEST_CASE("geometry invariant: 600 x 3 x 300 nm = 540 um") {
  IntegratedGeometry g;
  CHECK(g.metaline_width() == doctest::Approx(540e-6));
  CHECK(g.grid_size() == 6000);
  CHECK(g.samples_per_neuron() == 9);
  g.validate();
}

TEST_CASE("grid pitch must divide the atom period") {
  IntegratedGeometry g;
  g.grid_pitch = 130e-9;
  CHECK_THROWS(g.validate());
}

TEST_CASE("metaline wider than the window is rejected") {
  IntegratedGeometry g;
  g.window_width = 500e-6;  // < 540 um aperture
  CHECK_THROWS(g.validate());
}

TEST_CASE("inject: zero features give a zero field, one-hot a single mode") {
  IntegratedGeometry g = toy_geometry(16, 8);
  const auto zero = inject(Eigen::VectorXd::Zero(8), g);
  CHECK(zero.amp.cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd onehot = Eigen::VectorXd::Zero(8);
  onehot(0) = 0.7;
  const auto f = inject(onehot, g);
  CHECK(f.amp.array().abs2().sum() == doctest::Approx(0.49).epsilon(1e-12));
  CHECK(f.wavelength == doctest::Approx(g.wavelength_eff()));
}

TEST_CASE("inject scales linearly: 2x amplitudes, 4x output powers pre-bias") {
  IntegratedGeometry g = toy_geometry(16, 8);
  Rng rng(3);
  Eigen::VectorXd x(8);
  for (int i = 0; i < 8; ++i) x(i) = rng.uniform(0, 1);
  IntegratedModel m = make_model(g, 1);
  m.bias_enabled = false;
  Engine eng(g);
  const auto a = eng.forward(m, x);
  const auto b = eng.forward(m, 2.0 * x);
  CHECK(b.out.p1 == doctest::Approx(4.0 * a.out.p1).epsilon(1e-9));
  CHECK(b.out.p2 == doctest::Approx(4.0 * a.out.p2).epsilon(1e-9));
}

TEST_CASE("inject validates nonnegativity and mode overlap") {
  IntegratedGeometry g = toy_geometry(16, 8);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(8);
  x(3) = -0.1;
  CHECK_THROWS(inject(x, g));
  g.mode_waist = 4e-6;  // comparable to the 4 um pitch: neighbors overlap
  CHECK_THROWS(inject(Eigen::VectorXd::Ones(8), g));
}

TEST_CASE("modulation: no-slot leaves the aperture untouched, slot is pure phase") {
  IntegratedGeometry g = toy_geometry(16, 8);
  Rng rng(4);
  fft::CVector<double> u(g.grid_size());
  for (Eigen::Index i = 0; i < u.size(); ++i)
    u(i) = std::polar(rng.uniform(0.5, 1.0), rng.uniform(0.0, 6.28));

  const Eigen::Index aperture = g.samples_per_neuron() * g.n_neurons;
  const Eigen::Index start = (g.grid_size() - aperture) / 2;

  const auto flat = modulate_metaline(u, Eigen::VectorXd::Zero(16), g);
  CHECK((flat.segment(start, aperture) - u.segment(start, aperture)).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK(flat.head(start).cwiseAbs().maxCoeff() == 0.0);  // opaque cladding

  const auto slotted =
      modulate_metaline(u, Eigen::VectorXd::Constant(16, -1.55), g);
  CHECK((slotted.segment(start, aperture).cwiseAbs() - u.segment(start, aperture).cwiseAbs())
            .cwiseAbs()
            .maxCoeff() < 1e-15);
  const std::complex<double> ratio = slotted(start) / u(start);
  CHECK(std::arg(ratio) == doctest::Approx(-1.55).epsilon(1e-12));
}

TEST_CASE("pure-phase modulation conserves intra-aperture power") {
  IntegratedGeometry g = toy_geometry(16, 8);
  Rng rng(5);
  fft::CVector<double> u(g.grid_size());
  for (Eigen::Index i = 0; i < u.size(); ++i)
    u(i) = std::polar(rng.uniform(0.0, 1.0), rng.uniform(0.0, 6.28));
  Eigen::VectorXd phases(16);
  for (int i = 0; i < 16; ++i) phases(i) = rng.uniform() > 0.5 ? -1.55 : 0.0;

  const Eigen::Index aperture = g.samples_per_neuron() * g.n_neurons;
  const Eigen::Index start = (g.grid_size() - aperture) / 2;
  const auto out = modulate_metaline(u, phases, g);
  CHECK(out.array().abs2().sum() ==
        doctest::Approx(u.segment(start, aperture).array().abs2().sum()).epsilon(1e-12));
}

TEST_CASE("read_outputs: exact mode gives unit power, orthogonal gives none") {
  IntegratedGeometry g = toy_geometry(16, 8);
  const Eigen::MatrixXd modes = output_modes(g);
  const auto [p1, p2] = read_outputs(modes.col(0).cast<std::complex<double>>(), g);
  CHECK(p1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p2 < 1e-6);

  const auto [z1, z2] = read_outputs(fft::CVector<double>::Zero(g.grid_size()), g);
  CHECK(z1 == 0.0);
  CHECK(z2 == 0.0);

  const fft::CVector<double> mix =
      ((modes.col(0) + modes.col(1)) / std::sqrt(2.0)).cast<std::complex<double>>();
  const auto [h1, h2] = read_outputs(mix, g);
  CHECK(h1 == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(h2 == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("bias-only path: x = 0, bias (0.3, 0.1) decides for output 0") {
  IntegratedGeometry g = toy_geometry(16, 8);
  IntegratedModel m = make_model(g, 2);
  m.bias_raw[0] = std::log(std::expm1(0.3));
  m.bias_raw[1] = std::log(std::expm1(0.1));
  const auto t = forward_integrated(m, Eigen::VectorXd::Zero(8));
  CHECK(t.out.s1 == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(t.out.s2 == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(t.out.seizure);
}

TEST_CASE("mirror symmetry: symmetric input and states give equal outputs") {
  IntegratedGeometry g = toy_geometry(16, 8);
  IntegratedModel m = make_model(g, 3);
  m.bias_enabled = false;
  // mirror-symmetric neuron states and features
  for (int i = 0; i < 8; ++i) m.logits(15 - i) = m.logits(i);
  Eigen::VectorXd x(8);
  x << 0.2, 0.9, 0.4, 0.7, 0.7, 0.4, 0.9, 0.2;
  const auto t = forward_integrated(m, x);
  CHECK(t.out.s1 == doctest::Approx(t.out.s2).epsilon(1e-9));
  CHECK_FALSE(t.out.seizure);  // tie rule
}

TEST_CASE("binarize: hard step, relaxed sigmoid, temperature limit") {
  Eigen::VectorXd logits(3);
  logits << 3.0, -3.0, 0.0;
  const auto hard = binarize(logits, 0.2, BinarizeMode::Hard);
  CHECK(hard(0) == doctest::Approx(-1.55));
  CHECK(hard(1) == doctest::Approx(0.0));
  CHECK(hard(2) == doctest::Approx(0.0));  // logit 0 means no slot

  const auto relaxed = binarize(logits, 0.2, BinarizeMode::Relaxed);
  CHECK(relaxed(0) == doctest::Approx(-1.55 / (1.0 + std::exp(-15.0))));
  CHECK(relaxed(2) == doctest::Approx(-0.775));

  // T -> 0: relaxation approaches the step at |logit| = 1
  Eigen::VectorXd one(1);
  one << 1.0;
  const auto cold = binarize(one, 0.05, BinarizeMode::Relaxed);
  CHECK(std::abs(cold(0) - -1.55) < 1.55 * 1e-6);
  CHECK_THROWS(binarize(one, 0.0, BinarizeMode::Relaxed));
}

TEST_CASE("metaline diffraction matches the direct Huygens oracle within 2%") {
  IntegratedGeometry g;  // paper geometry
  g.validate();
  IntegratedModel m = make_model(g, 7);
  // alternating neuron blocks
  for (int i = 0; i < g.n_neurons; ++i) m.logits(i) = (i / 25) % 2 == 0 ? 3.0 : -3.0;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(g.n_inputs);
  x(7) = 1.0;
  x(8) = 1.0;
  Engine eng(g);
  const auto t = eng.forward(m, x);

  // oracle: direct Huygens quadrature from the modulated plane to the
  // output plane, evaluated at grid sample positions across the central
  // 300 um (every 10th sample)
  const Eigen::Index half = g.grid_size() / 2;
  std::vector<Eigen::Index> idxs;
  for (Eigen::Index i = half - 1500; i <= half + 1500; i += 10) idxs.push_back(i);
  Eigen::VectorXd obs(static_cast<Eigen::Index>(idxs.size()));
  for (std::size_t i = 0; i < idxs.size(); ++i)
    obs(static_cast<Eigen::Index>(i)) =
        (double(idxs[i]) - (double(g.grid_size()) - 1.0) / 2.0) * g.grid_pitch;
  const auto direct =
      oracle::huygens_1d(t.u_mod, g.grid_pitch, g.wavelength_eff(), g.plane_distance / 2, obs);

  Eigen::VectorXd impl(obs.size()), orac(obs.size());
  for (Eigen::Index i = 0; i < obs.size(); ++i) {
    impl(i) = std::norm(t.u_out(idxs[static_cast<std::size_t>(i)]));
    orac(i) = std::norm(direct(i));
  }
  const double scale = orac.maxCoeff();
  CHECK((impl - orac).cwiseAbs().maxCoeff() / scale < 0.02);
}

TEST_CASE("checkpoint: one bit per neuron, biases, optional logits") {
  IntegratedGeometry g = toy_geometry(16, 8);
  IntegratedModel m = make_model(g, 8);
  m.bias_raw[0] = 0.25;
  m.bias_raw[1] = -0.5;
  const char* path = "/tmp/dpu_test_model.dpui";

  SUBCASE("with logits") {
    save_model(path, m, true);
    const auto r = load_model(path);
    CHECK((r.logits - m.logits).cwiseAbs().maxCoeff() == 0.0);
    CHECK(r.bias(0) == doctest::Approx(m.bias(0)).epsilon(1e-12));
    CHECK(r.geometry.n_neurons == 16);
  }
  SUBCASE("bitmap only") {
    save_model(path, m, false);
    const auto r = load_model(path);
    const auto hard_m = binarize(m.logits, m.temperature, BinarizeMode::Hard);
    const auto hard_r = binarize(r.logits, r.temperature, BinarizeMode::Hard);
    CHECK((hard_m - hard_r).cwiseAbs().maxCoeff() == 0.0);
  }
  std::remove(path);
}

TEST_CASE("eval-time phases take only the two LUT values") {
  IntegratedGeometry g = toy_geometry(16, 8);
  IntegratedModel m = make_model(g, 9);
  const auto t = forward_integrated(m, Eigen::VectorXd::Ones(8), BinarizeMode::Hard);
  for (Eigen::Index i = 0; i < t.phases.size(); ++i)
    CHECK((t.phases(i) == 0.0 || t.phases(i) == -1.55));
}

TEST_CASE("coherent powers scale by k^2 while the bias stays fixed") {
  IntegratedGeometry g = toy_geometry(16, 8);
  IntegratedModel m = make_model(g, 19);
  m.bias_raw[0] = 0.3;
  m.bias_raw[1] = -0.1;
  Engine eng(g);
  Rng rng(20);
  Eigen::VectorXd x(8);
  for (int i = 0; i < 8; ++i) x(i) = rng.uniform(0.1, 1.0);
  const auto base = eng.forward(m, x);
  for (double k : {0.5, 2.0, 3.7}) {
    const auto scaled = eng.forward(m, k * x);
    CHECK(scaled.out.p1 == doctest::Approx(k * k * base.out.p1).epsilon(1e-12));
    CHECK(scaled.out.p2 == doctest::Approx(k * k * base.out.p2).epsilon(1e-12));
    CHECK(scaled.out.s1 - scaled.out.p1 == doctest::Approx(base.out.s1 - base.out.p1));
  }
}
