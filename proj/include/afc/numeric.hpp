#pragma once

// Dense numerical kernels shared by the simulation modules. Everything here is
// templated on the scalar type and works on Eigen column arrays; the domain
// modules instantiate them with double.

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>

#include "afc/error.hpp"

namespace afc {

template <typename Scalar>
using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using ArrayXc = Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, 1>;

constexpr bool is_power_of_two(std::size_t n) { return n >= 1 && (n & (n - 1)) == 0; }

// Frequency/time transform pair in the physics sign convention used by every
// propagation routine: a component at detuning nu evolves as exp(-2 pi i nu t).
//
//   to_frequency:  X_k = sum_n x_n exp(+2 pi i k n / N)
//   to_time:       x_n = (1/N) sum_k X_k exp(-2 pi i k n / N)
template <typename Scalar>
ArrayXc<Scalar> to_frequency(const ArrayXc<Scalar>& x) {
  Eigen::FFT<Scalar> fft;
  fft.SetFlag(Eigen::FFT<Scalar>::Unscaled);
  Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> in = x.matrix(), out;
  fft.inv(out, in);
  return out.array();
}

template <typename Scalar>
ArrayXc<Scalar> to_time(const ArrayXc<Scalar>& spectrum) {
  Eigen::FFT<Scalar> fft;
  Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> in = spectrum.matrix(), out;
  fft.fwd(out, in);
  return out.array() / static_cast<Scalar>(spectrum.size());
}

/// Complex log-spectrum whose real part is `real_part` and whose conjugate
/// sequence (under to_time) vanishes on the negative-time half of the circle.
/// The imaginary part is the discrete Hilbert partner of the real part.
template <typename Scalar>
ArrayXc<Scalar> causal_completion(const ArrayX<Scalar>& real_part) {
  const Eigen::Index n = real_part.size();
  require(n >= 2 && is_power_of_two(static_cast<std::size_t>(n)),
          "causal_completion: length must be a power of two >= 2");
  ArrayXc<Scalar> seq = to_time<Scalar>(real_part.template cast<std::complex<Scalar>>());
  const Eigen::Index half = n / 2;
  for (Eigen::Index i = 1; i < half; ++i) seq(i) *= Scalar(2);
  for (Eigen::Index i = half + 1; i < n; ++i) seq(i) = 0;
  return to_frequency<Scalar>(seq);
}

/// Raised-cosine weights rising from 0 to 1 over the outer `fraction` of the
/// samples at each end.
template <typename Scalar>
ArrayX<Scalar> raised_cosine_taper(Eigen::Index n, Scalar fraction) {
  ArrayX<Scalar> w = ArrayX<Scalar>::Ones(n);
  const auto edge = static_cast<Eigen::Index>(std::ceil(fraction * static_cast<Scalar>(n)));
  for (Eigen::Index i = 0; i < edge && i < n; ++i) {
    const Scalar v = Scalar(0.5) * (Scalar(1) - std::cos(std::numbers::pi_v<Scalar> * static_cast<Scalar>(i) /
                                                          static_cast<Scalar>(edge)));
    w(i) = v;
    w(n - 1 - i) = v;
  }
  return w;
}

/// Linear interpolation of samples y on the uniform axis x0 + i*dx. Returns
/// `outside` beyond the sampled range.
template <typename Scalar, typename Value>
Value interp_uniform(const Eigen::Array<Value, Eigen::Dynamic, 1>& y, Scalar x0, Scalar dx, Scalar x,
                     Value outside) {
  const Scalar pos = (x - x0) / dx;
  const auto last = static_cast<Scalar>(y.size() - 1);
  if (!(pos >= 0) || pos > last) return outside;
  const auto i = std::min(static_cast<Eigen::Index>(pos), y.size() - 2);
  const Scalar frac = pos - static_cast<Scalar>(i);
  return y(i) * (Scalar(1) - frac) + y(i + 1) * frac;
}

/// Paired samples (x_i, y_i), e.g. a decay curve or a fringe scan.
struct Series {
  Eigen::ArrayXd x;
  Eigen::ArrayXd y;

  Eigen::Index size() const { return x.size(); }
};

template <typename Scalar>
struct LeastSquaresSolution {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> coeffs;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> covariance;
  Scalar rss{};
  Eigen::Index dof{};
};

/// Ordinary least squares with the classical covariance estimate
/// sigma^2 (X^T X)^{-1}, sigma^2 = rss / (n - p). Throws ComputationError
/// when the design matrix is rank deficient.
template <typename DerivedX, typename DerivedY>
LeastSquaresSolution<typename DerivedX::Scalar> solve_least_squares(const Eigen::MatrixBase<DerivedX>& design,
                                                                    const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Matrix x = design;
  Eigen::ColPivHouseholderQR<Matrix> qr(x);
  // Columns are O(1) basis functions, so a scale-aware threshold is enough.
  qr.setThreshold(Scalar(1e-10));
  if (qr.rank() < x.cols()) throw ComputationError("least squares: design matrix is rank deficient");

  LeastSquaresSolution<Scalar> out;
  out.coeffs = qr.solve(y.derived().template cast<Scalar>().eval());
  const auto residual = (x * out.coeffs - y.derived().template cast<Scalar>()).eval();
  out.rss = residual.squaredNorm();
  out.dof = x.rows() - x.cols();
  const Matrix normal_inv = (x.transpose() * x).ldlt().solve(Matrix::Identity(x.cols(), x.cols()));
  const Scalar sigma2 = out.dof > 0 ? out.rss / static_cast<Scalar>(out.dof) : Scalar(0);
  out.covariance = sigma2 * normal_inv;
  return out;
}

}  // namespace afc
