#include "dpu/stft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dpu/fft.hpp"

namespace dpu {

Spectrogram stft(const Eigen::VectorXd& signal, const StftConfig& cfg, double sample_rate) {
  if (signal.size() == 0) throw std::invalid_argument("stft: empty signal");
  if (cfg.hop <= 0) throw std::invalid_argument("stft: hop must be positive");
  if (cfg.win_len <= 0 || cfg.win_len > signal.size())
    throw std::invalid_argument("stft: window longer than signal");
  if (cfg.pad_len < cfg.win_len) throw std::invalid_argument("stft: pad_len < win_len");
  if (cfg.f_max > sample_rate / 2 + 1e-9)
    throw std::invalid_argument("stft: f_max beyond Nyquist");

  Eigen::VectorXd taper(cfg.win_len);
  if (cfg.taper == Taper::Hann && cfg.win_len > 1) {
    for (int i = 0; i < cfg.win_len; ++i)
      taper(i) = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (cfg.win_len - 1));
  } else {
    taper.setOnes();
  }

  const double df = sample_rate / cfg.pad_len;
  const int n_bins = static_cast<int>(std::floor(cfg.f_max / df + 1e-9)) + 1;
  const auto n_frames =
      static_cast<Eigen::Index>((signal.size() - cfg.win_len) / cfg.hop) + 1;

  Spectrogram spec;
  spec.hz_per_bin = df;
  spec.s_per_bin = cfg.hop / sample_rate;
  spec.values.resize(n_frames, n_bins);

  Eigen::FFT<double> impl;
  Eigen::VectorXcd frame(cfg.pad_len), X(cfg.pad_len);
  const bool has_nyquist = cfg.pad_len % 2 == 0;
  for (Eigen::Index t = 0; t < n_frames; ++t) {
    frame.setZero();
    frame.head(cfg.win_len).real() =
        signal.segment(t * cfg.hop, cfg.win_len).cwiseProduct(taper);
    frame.head(cfg.win_len).imag().setZero();
    impl.fwd(X, frame);
    for (int k = 0; k < n_bins; ++k) {
      const double two_sided = std::norm(X(k)) / cfg.pad_len;
      const bool unpaired = (k == 0) || (has_nyquist && k == cfg.pad_len / 2);
      spec.values(t, k) = unpaired ? two_sided : 2.0 * two_sided;
    }
  }
  return spec;
}

}  // namespace dpu
