#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>
#include <complex>

// Thin wrappers around Eigen's FFT. Forward transforms are unnormalized,
// inverse transforms carry the full 1/N so that inv(fwd(x)) == x.

namespace dpu::fft {

template <typename Scalar>
using CVector = Eigen::Vector<std::complex<Scalar>, Eigen::Dynamic>;
template <typename Scalar>
using CMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
void fwd(Eigen::FFT<Scalar>& impl, CVector<Scalar>& v) {
  CVector<Scalar> out(v.size());
  impl.fwd(out, v);
  v.swap(out);
}

template <typename Scalar>
void inv(Eigen::FFT<Scalar>& impl, CVector<Scalar>& v) {
  CVector<Scalar> out(v.size());
  impl.inv(out, v);
  v.swap(out);
}

// In-place 2D transform: columns first, then rows.
template <typename Scalar, bool Inverse>
void transform2(Eigen::FFT<Scalar>& impl, CMatrix<Scalar>& m) {
  const Eigen::Index rows = m.rows(), cols = m.cols();
  CVector<Scalar> buf, out;
  for (Eigen::Index c = 0; c < cols; ++c) {
    buf = m.col(c);
    out.resize(rows);
    if constexpr (Inverse)
      impl.inv(out, buf);
    else
      impl.fwd(out, buf);
    m.col(c) = out;
  }
  for (Eigen::Index r = 0; r < rows; ++r) {
    buf = m.row(r).transpose();
    out.resize(cols);
    if constexpr (Inverse)
      impl.inv(out, buf);
    else
      impl.fwd(out, buf);
    m.row(r) = out.transpose();
  }
}

template <typename Scalar>
void fwd2(Eigen::FFT<Scalar>& impl, CMatrix<Scalar>& m) {
  transform2<Scalar, false>(impl, m);
}

template <typename Scalar>
void inv2(Eigen::FFT<Scalar>& impl, CMatrix<Scalar>& m) {
  transform2<Scalar, true>(impl, m);
}

// FFT bin frequency for index k of an n-point transform at sampling step d:
// the usual wrapped layout, k in [0, n) -> frequency in cycles per unit.
template <typename Scalar>
Scalar bin_frequency(Eigen::Index k, Eigen::Index n, Scalar d) {
  const Eigen::Index kk = (k <= (n - 1) / 2) ? k : k - n;
  return static_cast<Scalar>(kk) / (static_cast<Scalar>(n) * d);
}

}  // namespace dpu::fft
