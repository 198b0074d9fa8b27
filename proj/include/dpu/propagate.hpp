#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "dpu/fft.hpp"

// Scalar-wave propagation by the band-limited angular spectrum method.
// Transfer function T(fx,fy) = exp(j 2 pi z sqrt(1/lambda^2 - fx^2 - fy^2))
// on propagating modes, zero on evanescent ones, additionally truncated at
// the anti-aliasing bound f_lim = 1 / (lambda sqrt((2 z / S)^2 + 1)) for a
// window of physical size S (Matsushima's band limit).
//
// Forward DFTs are unnormalized and inverses carry 1/N, so propagation is
// unitary on the retained modes. apply(..., adjoint=true) applies the
// conjugate transfer, which is exactly the adjoint map used by reverse-mode
// differentiation.

namespace dpu::optics {

template <typename S>
struct Field2 {
  fft::CMatrix<S> amp;  // rows x cols complex amplitude
  S pitch = S(1);       // meters per sample
  S wavelength = S(1);  // meters
};

template <typename S>
struct Field1 {
  fft::CVector<S> amp;
  S pitch = S(1);
  S wavelength = S(1);  // effective wavelength (lambda/n_eff in a slab)
};

namespace detail {

template <typename S>
std::complex<S> transfer_coeff(S fx, S fy, S wavelength, S z, S fx_lim, S fy_lim) {
  if (std::abs(fx) > fx_lim || std::abs(fy) > fy_lim) return {S(0), S(0)};
  // the unreduced phase reaches ~1e6 rad at bench-scale z; evaluate and
  // reduce it mod 2 pi in extended precision before taking cos/sin
  const long double il = 1.0L / static_cast<long double>(wavelength);
  const long double radicand = il * il - static_cast<long double>(fx) * fx -
                               static_cast<long double>(fy) * fy;
  if (radicand < 0.0L) return {S(0), S(0)};
  const long double phase = 2.0L * std::numbers::pi_v<long double> *
                            static_cast<long double>(z) * std::sqrt(radicand);
  const long double reduced = std::fmod(phase, 2.0L * std::numbers::pi_v<long double>);
  return {static_cast<S>(std::cos(reduced)), static_cast<S>(std::sin(reduced))};
}

template <typename S>
S band_limit(S wavelength, S z, S window) {
  const S t = S(2) * z / window;
  return S(1) / (wavelength * std::sqrt(t * t + S(1)));
}

}  // namespace detail

template <typename S>
class Propagator2 {
 public:
  Propagator2(Eigen::Index rows, Eigen::Index cols, S pitch, S wavelength, S z,
              bool pad = true)
      : rows_(rows), cols_(cols), pad_(pad), z_(z) {
    if (pitch <= S(0) || wavelength <= S(0))
      throw std::invalid_argument("propagate: non-positive pitch or wavelength");
    if (z < S(0)) throw std::invalid_argument("propagate: negative distance");
    prows_ = pad ? 2 * rows : rows;
    pcols_ = pad ? 2 * cols : cols;
    if (z_ == S(0)) return;  // identity, no transfer needed

    const S fy_lim = detail::band_limit(wavelength, z, S(prows_) * pitch);
    const S fx_lim = detail::band_limit(wavelength, z, S(pcols_) * pitch);
    transfer_.resize(prows_, pcols_);
    for (Eigen::Index r = 0; r < prows_; ++r) {
      const S fy = fft::bin_frequency<S>(r, prows_, pitch);
      for (Eigen::Index c = 0; c < pcols_; ++c) {
        const S fx = fft::bin_frequency<S>(c, pcols_, pitch);
        transfer_(r, c) = detail::transfer_coeff(fx, fy, wavelength, z, fx_lim, fy_lim);
      }
    }
  }

  // u must be rows x cols; returns the propagated field (same size)
  fft::CMatrix<S> apply(const fft::CMatrix<S>& u, bool adjoint = false) {
    if (u.rows() != rows_ || u.cols() != cols_)
      throw std::invalid_argument("propagate: field shape mismatch");
    if (z_ == S(0)) return u;

    fft::CMatrix<S> w;
    if (pad_) {
      w.setZero(prows_, pcols_);
      w.block(rows_ / 2, cols_ / 2, rows_, cols_) = u;
    } else {
      w = u;
    }
    fft::fwd2(fft_, w);
    if (adjoint)
      w.array() *= transfer_.array().conjugate();
    else
      w.array() *= transfer_.array();
    fft::inv2(fft_, w);
    if (pad_) return w.block(rows_ / 2, cols_ / 2, rows_, cols_);
    return w;
  }

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }

 private:
  Eigen::Index rows_, cols_, prows_, pcols_;
  bool pad_;
  S z_;
  fft::CMatrix<S> transfer_;
  Eigen::FFT<S> fft_;
};

template <typename S>
class Propagator1 {
 public:
  Propagator1(Eigen::Index n, S pitch, S wavelength, S z, bool pad = true)
      : n_(n), pad_(pad), z_(z) {
    if (pitch <= S(0) || wavelength <= S(0))
      throw std::invalid_argument("propagate: non-positive pitch or wavelength");
    if (z < S(0)) throw std::invalid_argument("propagate: negative distance");
    pn_ = pad ? 2 * n : n;
    if (z_ == S(0)) return;

    const S f_lim = detail::band_limit(wavelength, z, S(pn_) * pitch);
    transfer_.resize(pn_);
    for (Eigen::Index k = 0; k < pn_; ++k) {
      const S f = fft::bin_frequency<S>(k, pn_, pitch);
      transfer_(k) = detail::transfer_coeff(f, S(0), wavelength, z, f_lim, f_lim);
    }
  }

  fft::CVector<S> apply(const fft::CVector<S>& u, bool adjoint = false) {
    if (u.size() != n_) throw std::invalid_argument("propagate: field size mismatch");
    if (z_ == S(0)) return u;

    fft::CVector<S> w;
    if (pad_) {
      w.setZero(pn_);
      w.segment(n_ / 2, n_) = u;
    } else {
      w = u;
    }
    fft::fwd(fft_, w);
    if (adjoint)
      w.array() *= transfer_.array().conjugate();
    else
      w.array() *= transfer_.array();
    fft::inv(fft_, w);
    if (pad_) return w.segment(n_ / 2, n_);
    return w;
  }

 private:
  Eigen::Index n_, pn_;
  bool pad_;
  S z_;
  fft::CVector<S> transfer_;
  Eigen::FFT<S> fft_;
};

// One-shot conveniences for tests and small callers.
template <typename S>
Field2<S> propagate_asm(const Field2<S>& u, S z, bool pad = true) {
  Propagator2<S> p(u.amp.rows(), u.amp.cols(), u.pitch, u.wavelength, z, pad);
  return {p.apply(u.amp), u.pitch, u.wavelength};
}

template <typename S>
Field1<S> propagate_slab(const Field1<S>& u, S z, bool pad = true) {
  Propagator1<S> p(u.amp.size(), u.pitch, u.wavelength, z, pad);
  return {p.apply(u.amp), u.pitch, u.wavelength};
}

}  // namespace dpu::optics
