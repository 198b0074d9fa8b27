#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "dpu/recording.hpp"
#include "dpu/synth.hpp"

using namespace dpu;

namespace {

// oracle: direct DFT-bin energy over [f_lo, f_hi) on a sample range
double band_energy_direct(const Eigen::VectorXd& x, double rate, double f_lo, double f_hi) {
  const auto n = x.size();
  double total = 0;
  for (Eigen::Index k = 1; k <= n / 2; ++k) {
    const double f = k * rate / double(n);
    if (f < f_lo || f >= f_hi) continue;
    std::complex<double> acc(0, 0);
    for (Eigen::Index i = 0; i < n; ++i)
      acc += x(i) * std::polar(1.0, -2.0 * std::numbers::pi * k * i / double(n));
    total += std::norm(acc);
  }
  return total;
}

}  // namespace

TEST_CASE("same seed gives bit-identical recordings") {
  SynthConfig cfg;
  cfg.n_channels = 6;
  cfg.duration_s = 30;
  cfg.active_channels = {2};
  cfg.seizure_intervals = {{5, 10}};
  cfg.seed = 99;
  const auto a = synth_recording(cfg);
  const auto b = synth_recording(cfg);
  CHECK(a.samples == b.samples);
  const auto c = synth_recording([&] {
    auto c2 = cfg;
    c2.seed = 100;
    return c2;
  }());
  CHECK((a.samples - c.samples).cwiseAbs().maxCoeff() > 0);
}

TEST_CASE("active channel carries 3-5 Hz burst energy inside the interval") {
  SynthConfig cfg;
  cfg.n_channels = 8;
  cfg.sample_rate = 256;
  cfg.duration_s = 50;
  cfg.active_channels = {5};
  cfg.seizure_intervals = {{10, 20}};
  cfg.seed = 4;
  const auto rec = synth_recording(cfg);

  const auto seg = [&](double t0, double t1) {
    const auto a = static_cast<Eigen::Index>(t0 * cfg.sample_rate);
    const auto b = static_cast<Eigen::Index>(t1 * cfg.sample_rate);
    return Eigen::VectorXd(rec.samples.row(5).segment(a, b - a).transpose());
  };
  const double burst = band_energy_direct(seg(10, 20), 256, 3, 5);
  const double rest = band_energy_direct(seg(30, 40), 256, 3, 5);
  CHECK(burst >= 2.0 * rest);
}

TEST_CASE("burst amplitude is at least 3x background RMS") {
  SynthConfig cfg;
  cfg.n_channels = 2;
  cfg.duration_s = 40;
  cfg.active_channels = {0};
  cfg.seizure_intervals = {{10, 30}};
  cfg.seed = 11;
  const auto with_burst = synth_recording(cfg);
  auto quiet_cfg = cfg;
  quiet_cfg.seizure_intervals.clear();
  quiet_cfg.active_channels.clear();
  const auto background = synth_recording(quiet_cfg);

  const auto n = background.samples.cols();
  const double rms =
      std::sqrt(background.samples.row(0).squaredNorm() / static_cast<double>(n));
  // burst = with_burst - background on the active channel, mid-interval
  const auto a = static_cast<Eigen::Index>(15 * cfg.sample_rate);
  const auto b = static_cast<Eigen::Index>(25 * cfg.sample_rate);
  const double peak = (with_burst.samples.row(0) - background.samples.row(0))
                          .segment(a, b - a)
                          .cwiseAbs()
                          .maxCoeff();
  CHECK(peak >= 3.0 * rms);
}

TEST_CASE("no seizure intervals -> all windows non-seizure") {
  SynthConfig cfg;
  cfg.n_channels = 3;
  cfg.duration_s = 20;
  cfg.seed = 2;
  const auto segs = window(synth_recording(cfg), 1, 1);
  for (const auto& s : segs) CHECK_FALSE(s.seizure);
}

TEST_CASE("invalid configs are rejected") {
  SynthConfig cfg;
  cfg.duration_s = 0;
  CHECK_THROWS(synth_recording(cfg));
  cfg.duration_s = 10;
  cfg.seizure_intervals = {{1, 2}};
  cfg.active_channels = {};
  CHECK_THROWS(synth_recording(cfg));
  cfg.active_channels = {99};
  CHECK_THROWS(synth_recording(cfg));
}
