#pragma once

#include <Eigen/Dense>

namespace dpu {

// Time-frequency power map. values(t, k) is the one-sided power of frame t
// in bin k (non-DC/non-Nyquist bins carry the doubled two-sided power, so
// a full-band rectangular STFT satisfies Parseval against the raw samples).
struct Spectrogram {
  Eigen::MatrixXd values;   // time-bin x frequency-bin, >= 0
  double hz_per_bin = 0.0;
  double s_per_bin = 0.0;
};

enum class Taper { Hann, Rectangular };

struct StftConfig {
  int win_len = 51;     // samples per frame
  int hop = 1;          // samples between frames
  int pad_len = 512;    // zero-padded DFT length
  double f_max = 50.0;  // keep bins with frequency <= f_max
  Taper taper = Taper::Hann;
};

Spectrogram stft(const Eigen::VectorXd& signal, const StftConfig& cfg, double sample_rate);

}  // namespace dpu
