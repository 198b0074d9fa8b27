#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "dpu/propagate.hpp"
#include "dpu/rng.hpp"

using namespace dpu;
using optics::Field2;
using Cplx = std::complex<double>;

namespace {

constexpr double kLambda = 532e-9;
constexpr double kPitch = 9.2e-6;

// random field whose spectrum lives in a small central disk, well below
// both the evanescent cutoff and any band limit
fft::CMatrix<double> lowpass_field(Eigen::Index n, std::uint64_t seed, double frac = 0.1) {
  Rng rng(seed);
  fft::CMatrix<double> spec = fft::CMatrix<double>::Zero(n, n);
  const auto kmax = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(frac * double(n) / 2));
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) {
      const Eigen::Index fr = r <= n / 2 ? r : r - n;
      const Eigen::Index fc = c <= n / 2 ? c : c - n;
      if (std::abs(fr) <= kmax && std::abs(fc) <= kmax)
        spec(r, c) = std::polar(rng.uniform(0.5, 1.0), rng.uniform(0.0, 6.28));
    }
  Eigen::FFT<double> impl;
  fft::inv2(impl, spec);
  return spec;
}

double total_power(const fft::CMatrix<double>& u) { return u.array().abs2().sum(); }

}  // namespace

TEST_CASE("z = 0 returns the input exactly") {
  const auto u = lowpass_field(32, 1);
  optics::Propagator2<double> prop(32, 32, kPitch, kLambda, 0.0, true);
  const auto out = prop.apply(u);
  CHECK((out - u).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("uniform plane wave: unit magnitude, global phase 2 pi z / lambda") {
  const Eigen::Index n = 48;
  const double z = 0.1;
  fft::CMatrix<double> u = fft::CMatrix<double>::Constant(n, n, Cplx(1, 0));
  optics::Propagator2<double> prop(n, n, kPitch, kLambda, z, /*pad=*/false);
  const auto out = prop.apply(u);

  const double expected = static_cast<double>(
      std::fmod(2.0L * std::numbers::pi_v<long double> * static_cast<long double>(z) /
                    static_cast<long double>(kLambda),
                2.0L * std::numbers::pi_v<long double>));
  for (Eigen::Index r = 0; r < n; r += 7)
    for (Eigen::Index c = 0; c < n; c += 7) {
      CHECK(std::abs(std::abs(out(r, c)) - 1.0) < 1e-12);
      double phase = std::arg(out(r, c));
      if (phase < 0) phase += 2.0 * std::numbers::pi;
      CHECK(std::abs(phase - expected) < 1e-12);
    }
}

TEST_CASE("unitarity on low-pass fields (unpadded)") {
  for (std::uint64_t seed : {2, 3, 4}) {
    const auto u = lowpass_field(64, seed);
    optics::Propagator2<double> prop(64, 64, kPitch, kLambda, 0.002, /*pad=*/false);
    const auto out = prop.apply(u);
    CHECK(total_power(out) ==
          doctest::Approx(total_power(u)).epsilon(1e-6));
  }
}

TEST_CASE("semigroup: propagate(z1+z2) == propagate(z2) o propagate(z1)") {
  const auto u = lowpass_field(48, 5);
  const double z1 = 0.001, z2 = 0.002;
  optics::Propagator2<double> p1(48, 48, kPitch, kLambda, z1, false);
  optics::Propagator2<double> p2(48, 48, kPitch, kLambda, z2, false);
  optics::Propagator2<double> p12(48, 48, kPitch, kLambda, z1 + z2, false);
  const auto once = p12.apply(u);
  const auto twice = p2.apply(p1.apply(u));
  const double scale = std::sqrt(total_power(u));
  CHECK((once - twice).cwiseAbs().maxCoeff() / scale < 1e-8);
}

TEST_CASE("whole-pixel shifts commute with propagation (periodic, unpadded)") {
  const Eigen::Index n = 32;
  const auto u = lowpass_field(n, 6);
  optics::Propagator2<double> prop(n, n, kPitch, kLambda, 0.002, false);

  auto roll = [&](const fft::CMatrix<double>& m, Eigen::Index dr, Eigen::Index dc) {
    fft::CMatrix<double> out(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < n; ++c) out((r + dr) % n, (c + dc) % n) = m(r, c);
    return out;
  };
  const auto direct = prop.apply(roll(u, 5, 11));
  const auto rolled = roll(prop.apply(u), 5, 11);
  CHECK((direct - rolled).cwiseAbs().maxCoeff() / std::sqrt(total_power(u)) < 1e-10);
}

TEST_CASE("Gaussian beam width follows the closed form within 2%") {
  const Eigen::Index n = 512;
  const double w0 = 40 * kPitch;  // 368 um waist
  const double zr = std::numbers::pi * w0 * w0 / kLambda;
  Field2<double> f;
  f.pitch = kPitch;
  f.wavelength = kLambda;
  f.amp.resize(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) {
      const double x = (double(c) - n / 2.0) * kPitch;
      const double y = (double(r) - n / 2.0) * kPitch;
      f.amp(r, c) = std::exp(-(x * x + y * y) / (w0 * w0));
    }

  for (double zfrac : {0.5, 1.0}) {
    const double z = zfrac * zr;
    const auto out = optics::propagate_asm(f, z, true);
    // FWHM of the central intensity row, linear interpolation at half max
    const Eigen::ArrayXd prof = out.amp.row(n / 2).array().abs2();
    const double half = prof.maxCoeff() / 2.0;
    double left = 0, right = 0;
    for (Eigen::Index c = 1; c < n; ++c) {
      if (prof(c - 1) < half && prof(c) >= half)
        left = (c - 1) + (half - prof(c - 1)) / (prof(c) - prof(c - 1));
      if (prof(c - 1) >= half && prof(c) < half)
        right = (c - 1) + (half - prof(c - 1)) / (prof(c) - prof(c - 1));
    }
    const double fwhm = (right - left) * kPitch;
    const double wz = w0 * std::sqrt(1.0 + (z / zr) * (z / zr));
    const double fwhm_expected = wz * std::sqrt(2.0 * std::log(2.0));
    CHECK(std::abs(fwhm - fwhm_expected) / fwhm_expected < 0.02);
  }
}

TEST_CASE("1D slab: plane wave phase and double-slit fringe period") {
  const double n_eff = 2.85;
  const double lambda_eff = 1550e-9 / n_eff;
  const double pitch = 100e-9;
  const Eigen::Index n = 6000;

  SUBCASE("plane wave phase") {
    optics::Propagator1<double> prop(n, pitch, lambda_eff, 100e-6, false);
    fft::CVector<double> u = fft::CVector<double>::Constant(n, Cplx(1, 0));
    const auto out = prop.apply(u);
    const double expected = static_cast<double>(
        std::fmod(2.0L * std::numbers::pi_v<long double> * 100e-6L /
                      static_cast<long double>(lambda_eff),
                  2.0L * std::numbers::pi_v<long double>));
    double phase = std::arg(out(n / 2));
    if (phase < 0) phase += 2.0 * std::numbers::pi;
    CHECK(std::abs(std::abs(out(n / 2)) - 1.0) < 1e-12);
    CHECK(std::abs(phase - expected) < 1e-10);
  }

  SUBCASE("double slit") {
    const double d = 30e-6, slit_w = 3e-6, z = 1000e-6;
    fft::CVector<double> u = fft::CVector<double>::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = (double(i) - n / 2.0) * pitch;
      if (std::abs(x - d / 2) < slit_w / 2 || std::abs(x + d / 2) < slit_w / 2) u(i) = 1.0;
    }
    optics::Propagator1<double> prop(n, pitch, lambda_eff, z, true);
    const auto out = prop.apply(u);
    const Eigen::ArrayXd inten = out.array().abs2();

    // fringe period from successive central maxima
    std::vector<double> peaks;
    const Eigen::Index c0 = n / 2 - 600, c1 = n / 2 + 600;  // central +-60 um
    for (Eigen::Index i = c0 + 1; i + 1 < c1; ++i) {
      if (inten(i) > inten(i - 1) && inten(i) > inten(i + 1) &&
          inten(i) > 0.3 * inten.segment(c0, c1 - c0).maxCoeff()) {
        // parabolic refinement
        const double denom = inten(i - 1) - 2 * inten(i) + inten(i + 1);
        const double delta = denom != 0 ? 0.5 * (inten(i - 1) - inten(i + 1)) / denom : 0.0;
        peaks.push_back((double(i) + delta) * pitch);
      }
    }
    REQUIRE(peaks.size() >= 4);
    const double period = (peaks.back() - peaks.front()) / double(peaks.size() - 1);
    const double expected = lambda_eff * z / d;
    CHECK(std::abs(period - expected) / expected < 0.02);
  }
}

TEST_CASE("invalid propagation arguments") {
  CHECK_THROWS(optics::Propagator2<double>(8, 8, -1.0, kLambda, 0.1));
  CHECK_THROWS(optics::Propagator2<double>(8, 8, kPitch, 0.0, 0.1));
  CHECK_THROWS(optics::Propagator2<double>(8, 8, kPitch, kLambda, -0.1));
  optics::Propagator2<double> prop(8, 8, kPitch, kLambda, 0.1);
  CHECK_THROWS(prop.apply(fft::CMatrix<double>::Zero(4, 4)));
}

TEST_CASE("evanescent components are removed for z > 0") {
  // 100 nm pitch resolves frequencies beyond 1/lambda_eff: a grating at
  // the Nyquist frequency must vanish after propagation
  const double lambda_eff = 1550e-9 / 2.85;
  const Eigen::Index n = 256;
  fft::CVector<double> u(n);
  for (Eigen::Index i = 0; i < n; ++i) u(i) = (i % 2 == 0) ? 1.0 : -1.0;
  optics::Propagator1<double> prop(n, 100e-9, lambda_eff, 5e-6, false);
  const auto out = prop.apply(u);
  CHECK(out.cwiseAbs().maxCoeff() < 1e-12);
}
