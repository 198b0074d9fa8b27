#include "dpu/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dpu {

Eigen::MatrixXd bilinear_resize(const Eigen::MatrixXd& in, Eigen::Index out_rows,
                                Eigen::Index out_cols) {
  if (in.size() == 0) throw std::invalid_argument("bilinear_resize: empty input");
  if (out_rows < 1 || out_cols < 1) throw std::invalid_argument("bilinear_resize: empty output");

  Eigen::MatrixXd out(out_rows, out_cols);
  const double rs = out_rows > 1 ? double(in.rows() - 1) / double(out_rows - 1) : 0.0;
  const double cs = out_cols > 1 ? double(in.cols() - 1) / double(out_cols - 1) : 0.0;
  for (Eigen::Index r = 0; r < out_rows; ++r) {
    const double y = r * rs;
    const auto y0 = static_cast<Eigen::Index>(y);
    const auto y1 = std::min(y0 + 1, in.rows() - 1);
    const double fy = y - y0;
    for (Eigen::Index c = 0; c < out_cols; ++c) {
      const double x = c * cs;
      const auto x0 = static_cast<Eigen::Index>(x);
      const auto x1 = std::min(x0 + 1, in.cols() - 1);
      const double fx = x - x0;
      out(r, c) = (1 - fy) * ((1 - fx) * in(y0, x0) + fx * in(y0, x1)) +
                  fy * ((1 - fx) * in(y1, x0) + fx * in(y1, x1));
    }
  }
  return out;
}

FeatureImage assemble_image(const std::vector<Spectrogram>& spectros,
                            Eigen::Index out_rows, Eigen::Index out_cols) {
  const auto n = static_cast<Eigen::Index>(spectros.size());
  if (n == 0) throw std::invalid_argument("assemble_image: empty spectrogram list");
  if (n > 23) throw std::invalid_argument("assemble_image: more than 23 spectrograms");

  const auto cols = static_cast<Eigen::Index>(std::ceil(std::sqrt(double(n))));
  const auto rows = (n + cols - 1) / cols;

  FeatureImage img;
  img.pixels = Eigen::MatrixXd::Zero(out_rows, out_cols);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index gr = i / cols, gc = i % cols;
    // cell boundaries partition the frame evenly, absorbing the remainder
    const Eigen::Index r0 = gr * out_rows / rows, r1 = (gr + 1) * out_rows / rows;
    const Eigen::Index c0 = gc * out_cols / cols, c1 = (gc + 1) * out_cols / cols;
    img.pixels.block(r0, c0, r1 - r0, c1 - c0) =
        bilinear_resize(spectros[i].values, r1 - r0, c1 - c0);
  }

  const double lo = img.pixels.minCoeff(), hi = img.pixels.maxCoeff();
  // treat interpolation-level jitter around a constant as a degenerate range
  if (hi - lo > 1e-12 * std::max({std::abs(hi), std::abs(lo), 1.0}))
    img.pixels = (img.pixels.array() - lo) / (hi - lo);
  else
    img.pixels.setZero();  // degenerate range maps to 0
  return img;
}

FeatureVector feature_vector(const Segment& seg, int channel, int parts,
                             const BandSpec& spec, double sample_rate) {
  if (channel < 0 || channel >= seg.data.rows())
    throw std::invalid_argument("feature_vector: channel out of range");
  if (parts < 1) throw std::invalid_argument("feature_vector: parts must be >= 1");
  const Eigen::Index part_len = seg.data.cols() / parts;
  if (part_len == 0) throw std::invalid_argument("feature_vector: segment shorter than parts");

  FeatureVector fv;
  fv.seizure = seg.seizure;
  fv.attrs.resize(parts * spec.size());
  for (int p = 0; p < parts; ++p) {
    const Eigen::VectorXd sub =
        seg.data.row(channel).segment(p * part_len, part_len).transpose();
    fv.attrs.segment(p * spec.size(), spec.size()) = band_energy(sub, spec, sample_rate);
  }
  const double mx = fv.attrs.maxCoeff();
  if (mx > 0) fv.attrs /= mx;
  return fv;
}

}  // namespace dpu
