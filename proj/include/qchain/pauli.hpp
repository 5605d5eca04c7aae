#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "qchain/common.hpp"

namespace qchain {

// Operator on n qubits expanded in the tensor-product Pauli basis
// B_alpha = sigma^{a_1} x ... x sigma^{a_n}. Index digits are base 4 with
// site 0 least significant; digit codes 0=I, 1=x, 2=y, 3=z.
struct PauliOperatorRep {
  int n = 0;
  VectorXc coeffs;  // size 4^n

  static PauliOperatorRep zero(int n) {
    require(n >= 1 && n <= 8, "PauliOperatorRep: n out of range");
    PauliOperatorRep rep;
    rep.n = n;
    rep.coeffs = VectorXc::Zero(std::int64_t(1) << (2 * n));
    return rep;
  }

  static PauliOperatorRep identity(int n) {
    PauliOperatorRep rep = zero(n);
    rep.coeffs[0] = 1.0;
    return rep;
  }

  // Single Pauli string sigma^digit at `site`, identity elsewhere.
  static PauliOperatorRep single(int n, int site, int digit,
                                 Complex coeff = 1.0) {
    require(site >= 0 && site < n, "PauliOperatorRep: site out of range");
    require(digit >= 0 && digit <= 3, "PauliOperatorRep: bad Pauli digit");
    PauliOperatorRep rep = zero(n);
    rep.coeffs[std::int64_t(digit) << (2 * site)] = coeff;
    return rep;
  }

  std::int64_t dim() const { return coeffs.size(); }
};

namespace pauli {

inline int digit(std::int64_t idx, int site) {
  return static_cast<int>((idx >> (2 * site)) & 3);
}

inline std::int64_t with_digit(std::int64_t idx, int site, int d) {
  const std::int64_t mask = std::int64_t(3) << (2 * site);
  return (idx & ~mask) | (std::int64_t(d) << (2 * site));
}

inline int weight(std::int64_t idx, int n) {
  int w = 0;
  for (int j = 0; j < n; ++j)
    if (digit(idx, j) != 0) ++w;
  return w;
}

inline int xy_weight(std::int64_t idx, int n) {
  int w = 0;
  for (int j = 0; j < n; ++j) {
    const int d = digit(idx, j);
    if (d == 1 || d == 2) ++w;
  }
  return w;
}

// sigma^a sigma^b = phase * sigma^c single-site table.
struct SiteProduct {
  int idx;
  Complex phase;
};

inline SiteProduct site_product(int a, int b) {
  if (a == 0) return {b, 1.0};
  if (b == 0) return {a, 1.0};
  if (a == b) return {0, 1.0};
  // remaining: the cyclic pairs
  static constexpr int third[4][4] = {
      {0, 0, 0, 0}, {0, 0, 3, 2}, {0, 3, 0, 1}, {0, 2, 1, 0}};
  const int c = third[a][b];
  // epsilon_{abc}: xyz, yzx, zxy positive
  const bool positive = (b - a + 3) % 3 == 1;
  return {c, positive ? Complex(0.0, 1.0) : Complex(0.0, -1.0)};
}

// B_alpha B_beta = phase * B_gamma on strings.
inline std::int64_t string_product(std::int64_t alpha, std::int64_t beta,
                                   int n, Complex& phase) {
  std::int64_t gamma = 0;
  phase = 1.0;
  for (int j = 0; j < n; ++j) {
    const SiteProduct p = site_product(digit(alpha, j), digit(beta, j));
    gamma |= std::int64_t(p.idx) << (2 * j);
    phase *= p.phase;
  }
  return gamma;
}

// true if the strings commute (they either commute or anticommute).
inline bool strings_commute(std::int64_t alpha, std::int64_t beta, int n) {
  int anti = 0;
  for (int j = 0; j < n; ++j) {
    const int a = digit(alpha, j);
    const int b = digit(beta, j);
    if (a != 0 && b != 0 && a != b) ++anti;
  }
  return (anti % 2) == 0;
}

}  // namespace pauli

inline PauliOperatorRep pauli_multiply(const PauliOperatorRep& a,
                                       const PauliOperatorRep& b) {
  require(a.n == b.n, "pauli_multiply: mismatched qubit counts");
  PauliOperatorRep out = PauliOperatorRep::zero(a.n);
  for (std::int64_t alpha = 0; alpha < a.dim(); ++alpha) {
    const Complex ca = a.coeffs[alpha];
    if (ca == 0.0) continue;
    for (std::int64_t beta = 0; beta < b.dim(); ++beta) {
      const Complex cb = b.coeffs[beta];
      if (cb == 0.0) continue;
      Complex phase;
      const std::int64_t gamma = pauli::string_product(alpha, beta, a.n, phase);
      out.coeffs[gamma] += ca * cb * phase;
    }
  }
  return out;
}

// Exact commutator via the single-site multiplication table.
inline PauliOperatorRep pauli_commutator(const PauliOperatorRep& a,
                                         const PauliOperatorRep& b) {
  require(a.n == b.n, "pauli_commutator: mismatched qubit counts");
  PauliOperatorRep out = PauliOperatorRep::zero(a.n);
  for (std::int64_t alpha = 0; alpha < a.dim(); ++alpha) {
    const Complex ca = a.coeffs[alpha];
    if (ca == 0.0) continue;
    for (std::int64_t beta = 0; beta < b.dim(); ++beta) {
      const Complex cb = b.coeffs[beta];
      if (cb == 0.0) continue;
      if (pauli::strings_commute(alpha, beta, a.n)) continue;
      Complex phase;
      const std::int64_t gamma = pauli::string_product(alpha, beta, a.n, phase);
      out.coeffs[gamma] += 2.0 * ca * cb * phase;  // AB - BA = 2 AB here
    }
  }
  return out;
}

// Dense 2^n x 2^n matrix. Each string is a signed permutation of the
// computational basis, so this costs O(4^n 2^n n).
inline MatrixXc pauli_to_dense(const PauliOperatorRep& rep) {
  const int n = rep.n;
  const std::int64_t dim = std::int64_t(1) << n;
  MatrixXc m = MatrixXc::Zero(dim, dim);
  for (std::int64_t alpha = 0; alpha < rep.dim(); ++alpha) {
    const Complex c = rep.coeffs[alpha];
    if (c == 0.0) continue;
    for (std::int64_t ket = 0; ket < dim; ++ket) {
      std::int64_t bra = ket;
      Complex phase = 1.0;
      for (int j = 0; j < n; ++j) {
        const int d = pauli::digit(alpha, j);
        const int bit = static_cast<int>((ket >> j) & 1);
        switch (d) {
          case 1:
            bra ^= (std::int64_t(1) << j);
            break;
          case 2:
            bra ^= (std::int64_t(1) << j);
            phase *= bit ? Complex(0.0, -1.0) : Complex(0.0, 1.0);
            break;
          case 3:
            if (bit) phase = -phase;
            break;
          default:
            break;
        }
      }
      m(bra, ket) += c * phase;
    }
  }
  return m;
}

inline PauliOperatorRep pauli_from_dense(const MatrixXc& m, int n) {
  require(m.rows() == (std::int64_t(1) << n) && m.cols() == m.rows(),
          "pauli_from_dense: dimension mismatch");
  PauliOperatorRep rep = PauliOperatorRep::zero(n);
  const std::int64_t dim = m.rows();
  for (std::int64_t alpha = 0; alpha < rep.dim(); ++alpha) {
    Complex acc = 0.0;
    for (std::int64_t ket = 0; ket < dim; ++ket) {
      std::int64_t bra = ket;
      Complex phase = 1.0;
      for (int j = 0; j < n; ++j) {
        const int d = pauli::digit(alpha, j);
        const int bit = static_cast<int>((ket >> j) & 1);
        switch (d) {
          case 1:
            bra ^= (std::int64_t(1) << j);
            break;
          case 2:
            bra ^= (std::int64_t(1) << j);
            phase *= bit ? Complex(0.0, -1.0) : Complex(0.0, 1.0);
            break;
          case 3:
            if (bit) phase = -phase;
            break;
          default:
            break;
        }
      }
      // <ket| B_alpha^T ... tr(B_alpha m) = sum_ket <ket|B_alpha m|ket>
      acc += std::conj(phase) * m(bra, ket);
    }
    rep.coeffs[alpha] = acc / static_cast<double>(dim);
  }
  return rep;
}

inline double pauli_operator_norm(const PauliOperatorRep& rep) {
  MatrixXc m = pauli_to_dense(rep);
  const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (herm < 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    Eigen::SelfAdjointEigenSolver<MatrixXc> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::JacobiSVD<MatrixXc> svd(m);
  return svd.singularValues()[0];
}

inline bool pauli_is_hermitian(const PauliOperatorRep& rep, double tol = 1e-10) {
  for (std::int64_t i = 0; i < rep.dim(); ++i)
    if (std::abs(std::imag(rep.coeffs[i])) > tol) return false;
  return true;
}

}  // namespace qchain
