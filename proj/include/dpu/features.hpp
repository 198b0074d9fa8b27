#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dpu/bands.hpp"
#include "dpu/recording.hpp"
#include "dpu/stft.hpp"

namespace dpu {

struct FeatureImage {
  Eigen::MatrixXd pixels;  // in [0,1]
  std::string patient_id;
  bool seizure = false;
};

struct FeatureVector {
  Eigen::VectorXd attrs;  // >= 0, max-normalized to 1 (zero stays zero)
  bool seizure = false;
};

// Bilinear resample with corner alignment; out_rows/out_cols >= 1.
Eigen::MatrixXd bilinear_resize(const Eigen::MatrixXd& in, Eigen::Index out_rows,
                                Eigen::Index out_cols);

// Tiles up to 23 spectrograms row-major into the smallest near-square grid
// (ceil(sqrt(n)) columns), resizes each into its cell, then min-max
// normalizes the whole frame to [0,1]. Constant frames map to all zeros.
FeatureImage assemble_image(const std::vector<Spectrogram>& spectros,
                            Eigen::Index out_rows = 400, Eigen::Index out_cols = 400);

// Splits one channel of the segment into `parts` equal sub-windows
// (remainder samples dropped), takes band energies per part, concatenates
// part-major, and max-normalizes.
FeatureVector feature_vector(const Segment& seg, int channel, int parts,
                             const BandSpec& spec, double sample_rate);

}  // namespace dpu
