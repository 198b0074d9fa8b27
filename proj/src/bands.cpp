#include "dpu/bands.hpp"

#include <stdexcept>

#include "dpu/fft.hpp"

namespace dpu {

void BandSpec::validate(double nyquist) const {
  double prev_high = 0.0;
  bool first = true;
  for (const auto& [lo, hi] : bands) {
    if (!(lo < hi)) throw std::invalid_argument("band spec: low must be below high");
    if (!first && lo < prev_high)
      throw std::invalid_argument("band spec: bands overlap or unsorted");
    if (hi > nyquist + 1e-9) throw std::invalid_argument("band spec: band exceeds Nyquist");
    prev_high = hi;
    first = false;
  }
}

BandSpec eeg_bands(double sample_rate) {
  const double gamma_hi = std::min(70.0, 0.99 * sample_rate / 2.0);
  return BandSpec{{{0.4, 4.0}, {4.0, 8.0}, {8.0, 12.0}, {12.0, 30.0}, {30.0, gamma_hi}}};
}

BandSpec integrated_bands() {
  return BandSpec{{{0.0, 6.0}, {6.0, 14.0}, {14.0, 22.0}, {22.0, 30.0}}};
}

Eigen::VectorXd band_energy(const Eigen::VectorXd& signal, const BandSpec& spec,
                            double sample_rate) {
  if (signal.size() == 0) throw std::invalid_argument("band_energy: empty signal");
  spec.validate(sample_rate / 2.0);

  const Eigen::Index n = signal.size();
  Eigen::FFT<double> impl;
  Eigen::VectorXcd x = signal.cast<std::complex<double>>(), X(n);
  impl.fwd(X, x);

  const double df = sample_rate / static_cast<double>(n);
  const bool has_nyquist = n % 2 == 0;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(spec.size());
  for (Eigen::Index k = 0; k <= n / 2; ++k) {
    const double f = k * df;
    const bool unpaired = (k == 0) || (has_nyquist && k == n / 2);
    const double p = std::norm(X(k)) / static_cast<double>(n) * (unpaired ? 1.0 : 2.0);
    for (int b = 0; b < spec.size(); ++b) {
      if (f >= spec.bands[b].first && f < spec.bands[b].second) {
        out(b) += p;
        break;
      }
    }
  }
  return out;
}

Eigen::VectorXd channel_band_attrs(const Segment& seg, const BandSpec& spec,
                                   double sample_rate) {
  const int nc = static_cast<int>(seg.data.rows());
  const int nb = spec.size();
  Eigen::VectorXd out(nc * nb);
  for (int c = 0; c < nc; ++c)
    out.segment(c * nb, nb) = band_energy(seg.data.row(c).transpose(), spec, sample_rate);
  return out;
}

Eigen::VectorXd channel_attrs(const Segment& seg, double sample_rate) {
  if (seg.data.rows() != 23)
    throw std::invalid_argument("channel_attrs: expected a 23-channel EEG segment");
  return channel_band_attrs(seg, eeg_bands(sample_rate), sample_rate);
}

}  // namespace dpu
