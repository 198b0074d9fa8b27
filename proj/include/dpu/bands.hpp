#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dpu/recording.hpp"

namespace dpu {

// Ordered, non-overlapping frequency bands. Bin membership is half-open:
// low <= f < high.
struct BandSpec {
  std::vector<std::pair<double, double>> bands;  // (low Hz, high Hz)

  void validate(double nyquist) const;
  int size() const { return static_cast<int>(bands.size()); }
};

// delta/theta/alpha/beta/gamma; gamma is capped below Nyquist so the
// 115-attribute layout stays valid at low sampling rates.
BandSpec eeg_bands(double sample_rate);

// the four coarse bands feeding the integrated model's feature vectors
BandSpec integrated_bands();

// Periodogram (|DFT|^2 / N, one-sided with doubling) summed per band.
Eigen::VectorXd band_energy(const Eigen::VectorXd& signal, const BandSpec& spec,
                            double sample_rate);

// 23 channels x 5 bands, channel-major. Throws unless the segment has
// exactly 23 channels.
Eigen::VectorXd channel_attrs(const Segment& seg, double sample_rate);

// Generalization used internally: any channel count, any band spec.
Eigen::VectorXd channel_band_attrs(const Segment& seg, const BandSpec& spec,
                                   double sample_rate);

}  // namespace dpu
