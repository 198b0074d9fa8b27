#include "dpu/synth.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dpu/fft.hpp"
#include "dpu/rng.hpp"

namespace dpu {

namespace {

// 1/f-shaped noise of unit RMS, built by spectral shaping with random phases.
Eigen::VectorXd pink_noise(Eigen::Index n, double sample_rate, Rng& rng) {
  using namespace std::complex_literals;
  Eigen::VectorXcd spec = Eigen::VectorXcd::Zero(n);
  const double df = sample_rate / static_cast<double>(n);
  for (Eigen::Index k = 1; k <= n / 2; ++k) {
    const double f = k * df;
    const double amp = 1.0 / std::sqrt(std::max(f, 0.5));  // flatten below 0.5 Hz
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const std::complex<double> v = amp * std::exp(1i * phase);
    spec(k) = v;
    if (k < n - k) spec(n - k) = std::conj(v);  // Hermitian symmetry -> real signal
  }
  Eigen::FFT<double> fft;
  Eigen::VectorXcd sig(n);
  fft.inv(sig, spec);
  Eigen::VectorXd out = sig.real();
  const double rms = std::sqrt(out.squaredNorm() / static_cast<double>(n));
  if (rms > 0) out /= rms;
  return out;
}

}  // namespace

Recording synth_recording(const SynthConfig& cfg) {
  if (cfg.n_channels <= 0) throw std::invalid_argument("synth_recording: no channels");
  if (cfg.duration_s <= 0) throw std::invalid_argument("synth_recording: zero duration");
  if (cfg.sample_rate <= 0) throw std::invalid_argument("synth_recording: bad sample rate");
  if (!cfg.seizure_intervals.empty() && cfg.active_channels.empty())
    throw std::invalid_argument("synth_recording: seizure intervals but no active channels");
  for (int c : cfg.active_channels)
    if (c < 0 || c >= cfg.n_channels)
      throw std::invalid_argument("synth_recording: active channel out of range");

  const auto n = static_cast<Eigen::Index>(std::llround(cfg.duration_s * cfg.sample_rate));
  Recording rec;
  rec.id = "synth";
  rec.sample_rate = cfg.sample_rate;
  rec.seizure_intervals = cfg.seizure_intervals;
  rec.samples.resize(cfg.n_channels, n);
  for (int c = 0; c < cfg.n_channels; ++c)
    rec.channels.push_back({"SYN" + std::to_string(c), "uV"});

  for (int c = 0; c < cfg.n_channels; ++c) {
    Rng rng(derive_seed(cfg.seed, "synth.ch" + std::to_string(c)));
    rec.samples.row(c) = cfg.background_rms_uV * pink_noise(n, cfg.sample_rate, rng).transpose();
  }

  const double amp = cfg.burst_amplitude_rms * cfg.background_rms_uV;
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t iv = 0; iv < cfg.seizure_intervals.size(); ++iv) {
    const auto [t0, t1] = cfg.seizure_intervals[iv];
    Rng rng(derive_seed(cfg.seed, "synth.burst" + std::to_string(iv)));
    const double f = rng.uniform(3.2, 4.8);  // spike-wave fundamental, inside 3-5 Hz
    const double ramp = std::min(0.25, (t1 - t0) / 4.0);
    const auto k0 = static_cast<Eigen::Index>(std::ceil(t0 * cfg.sample_rate));
    const auto k1 = std::min<Eigen::Index>(n, static_cast<Eigen::Index>(std::floor(t1 * cfg.sample_rate)));
    for (Eigen::Index k = k0; k < k1; ++k) {
      const double t = k / cfg.sample_rate - t0;
      double env = 1.0;
      if (t < ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * t / ramp);
      const double tail = (t1 - t0) - t;
      if (tail < ramp) env = std::min(env, 0.5 - 0.5 * std::cos(std::numbers::pi * tail / ramp));
      // spike-and-wave: strong fundamental plus sharpening harmonics
      const double w = std::sin(two_pi * f * t) + 0.5 * std::sin(2 * two_pi * f * t) +
                       0.25 * std::sin(3 * two_pi * f * t);
      for (int c : cfg.active_channels) rec.samples(c, k) += amp * env * w;
    }
  }
  rec.validate();
  return rec;
}

}  // namespace dpu
