#pragma once

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include "qchain/chain.hpp"
#include "qchain/common.hpp"

namespace qchain {

// Closed-form spectral data of R. Open chain: eigenvalues 2cos(q pi/(n+1))
// with sine eigenvectors; ring: Fourier modes with eigenvalues
// 2cos(2 pi q/n). Used to evaluate exp(-iRt) without a numeric eigensolver.
class XXSpectrum {
 public:
  explicit XXSpectrum(const ChainSpec& spec) : n_(spec.n) {
    spec.validate();
    require(spec.boundary != Boundary::infinite_analytic,
            "XXSpectrum: infinite chain handled analytically, not spectrally");
    ring_ = (spec.boundary == Boundary::ring);
    const double pi = std::numbers::pi;
    lambda_.resize(n_);
    if (!ring_) {
      modes_.resize(n_, n_);
      const double norm = std::sqrt(2.0 / (n_ + 1));
      for (int q = 0; q < n_; ++q) {
        lambda_[q] = 2.0 * std::cos((q + 1) * pi / (n_ + 1));
        for (int j = 0; j < n_; ++j)
          modes_(j, q) = norm * std::sin((j + 1) * (q + 1) * pi / (n_ + 1));
      }
    } else {
      for (int q = 0; q < n_; ++q) lambda_[q] = 2.0 * std::cos(2.0 * pi * q / n_);
    }
  }

  int n() const { return n_; }

  // exp(-i R t)
  MatrixXc unitary(double t) const {
    if (!ring_) {
      VectorXc ph(n_);
      for (int q = 0; q < n_; ++q)
        ph[q] = std::exp(Complex(0.0, -lambda_[q] * t));
      return modes_ * ph.asDiagonal() * modes_.transpose();
    }
    // circulant: first column via DFT, then wrap
    VectorXc col0 = VectorXc::Zero(n_);
    const double pi = std::numbers::pi;
    for (int j = 0; j < n_; ++j) {
      Complex acc(0.0, 0.0);
      for (int q = 0; q < n_; ++q) {
        const double ang = 2.0 * pi * q * j / n_;
        acc += std::exp(Complex(0.0, ang)) * std::exp(Complex(0.0, -lambda_[q] * t));
      }
      col0[j] = acc / static_cast<double>(n_);
    }
    MatrixXc u(n_, n_);
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k) u(j, k) = col0[(j - k + n_) % n_];
    return u;
  }

 private:
  int n_;
  bool ring_ = false;
  VectorXr lambda_;
  MatrixXr modes_;  // open-chain sine eigenvectors
};

// c_{j,k}(t) = exp(-gamma t) (exp(-iRt))_{j,k}. For the infinite chain the
// kernel is (-i)^{|j-k|} J_{|j-k|}(2t) on an n-site index window.
inline MatrixXc exact_averaged_correlation(const ChainSpec& spec, double t) {
  spec.validate();
  require(spec.noise_mode != NoiseMode::static_,
          "exact_averaged_correlation: no closed form for static disorder");
  const double damp = std::exp(-spec.gamma * t);
  if (spec.boundary == Boundary::infinite_analytic) {
    const int n = spec.n;
    MatrixXc c(n, n);
    // (-i)^m J_m(2t), m = |j-k|
    for (int m = 0; m < n; ++m) {
      const double bess = std::cyl_bessel_j(m, 2.0 * std::abs(t));
      Complex val = std::pow(Complex(0.0, -1.0), m) * bess;
      if (t < 0.0 && (m % 2) == 1) val = -val;  // J_m odd/even in t
      for (int j = 0; j + m < n; ++j) {
        c(j, j + m) = damp * val;
        c(j + m, j) = damp * val;
      }
    }
    return c;
  }
  XXSpectrum spectrum(spec);
  return damp * spectrum.unitary(t);
}

// Scaling-and-squaring evaluation of exp(-iRt); independent oracle for the
// spectral path above.
inline MatrixXc matrix_exponential_check(const MatrixXr& r, double t) {
  require(std::isfinite(t), "matrix_exponential_check: t must be finite");
  MatrixXc a = Complex(0.0, -t) * r;
  MatrixXc result = a.exp();
  return result;
}

}  // namespace qchain
