#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "qchain/common.hpp"
#include "qchain/pauli.hpp"
#include "qchain/rng.hpp"

namespace qchain {

// H0 = sum_j h_j with h_j acting on sites (j, j+1); each bond is given by
// its 16 two-site Pauli coefficients, index a*4+b for sigma^a_j sigma^b_{j+1}.
struct H0Spec {
  int n = 2;
  bool ring = false;
  std::vector<std::array<double, 16>> bonds;

  int bond_count() const { return static_cast<int>(bonds.size()); }

  void validate() const {
    require(n >= 1 && n <= 8, "H0Spec: n out of range");
    const int expected = (n == 1) ? 0 : (ring ? n : n - 1);
    require(static_cast<int>(bonds.size()) == expected,
            "H0Spec: bond count does not match chain length/boundary");
  }

  static H0Spec empty(int n, bool ring = false) {
    H0Spec spec;
    spec.n = n;
    spec.ring = ring;
    if (n > 1) spec.bonds.assign(ring ? n : n - 1, {});
    return spec;
  }

  static H0Spec uniform(int n, const std::array<double, 16>& bond,
                        bool ring = false) {
    H0Spec spec = empty(n, ring);
    for (auto& b : spec.bonds) b = bond;
    return spec;
  }

  // sigma^x sigma^x + sigma^y sigma^y
  static H0Spec xx(int n, bool ring = false) {
    std::array<double, 16> b{};
    b[1 * 4 + 1] = 1.0;
    b[2 * 4 + 2] = 1.0;
    return uniform(n, b, ring);
  }

  // xx + sigma^z sigma^z
  static H0Spec heisenberg(int n, bool ring = false) {
    std::array<double, 16> b{};
    b[1 * 4 + 1] = 1.0;
    b[2 * 4 + 2] = 1.0;
    b[3 * 4 + 3] = 1.0;
    return uniform(n, b, ring);
  }

  PauliOperatorRep assemble() const {
    validate();
    PauliOperatorRep h = PauliOperatorRep::zero(n);
    for (int b = 0; b < bond_count(); ++b) {
      const int j = b;
      const int k = (b + 1) % n;
      for (int a1 = 0; a1 < 4; ++a1)
        for (int a2 = 0; a2 < 4; ++a2) {
          const double w = bonds[b][a1 * 4 + a2];
          if (w == 0.0) continue;
          std::int64_t idx = 0;
          idx = pauli::with_digit(idx, j, a1);
          idx = pauli::with_digit(idx, k, a2);
          h.coeffs[idx] += w;
        }
    }
    return h;
  }

  double norm() const { return pauli_operator_norm(assemble()); }
};

// F_{alpha,beta} defined by -i[H0, B_alpha] = sum_beta F_{alpha,beta} B_beta.
struct StructureMatrix {
  int n = 0;
  MatrixXr f;
};

inline StructureMatrix build_structure_matrix(const PauliOperatorRep& h) {
  require(h.n <= 6, "build_structure_matrix: n capped at 6 (dense 4^n)");
  require(pauli_is_hermitian(h), "build_structure_matrix: H0 must be Hermitian");
  const int n = h.n;
  const std::int64_t dim = std::int64_t(1) << (2 * n);
  StructureMatrix out;
  out.n = n;
  out.f = MatrixXr::Zero(dim, dim);
  // -i [h, B_alpha] term by term over the nonzero strings of H0
  for (std::int64_t mu = 0; mu < h.dim(); ++mu) {
    const Complex w = h.coeffs[mu];
    if (w == 0.0) continue;
    for (std::int64_t alpha = 0; alpha < dim; ++alpha) {
      if (pauli::strings_commute(mu, alpha, n)) continue;
      Complex phase;
      const std::int64_t beta = pauli::string_product(mu, alpha, n, phase);
      // [B_mu, B_alpha] = 2 phase B_beta; coefficient of -i w [..]
      const Complex val = Complex(0.0, -1.0) * w * 2.0 * phase;
      out.f(alpha, beta) += std::real(val);
    }
  }
  return out;
}

inline StructureMatrix build_structure_matrix(const H0Spec& h0) {
  h0.validate();
  return build_structure_matrix(h0.assemble());
}

enum class NoiseKind { isotropic, z_only };

inline std::string to_string(NoiseKind k) {
  return k == NoiseKind::isotropic ? "isotropic" : "z-only";
}

// Generator of the averaged dynamics in the Pauli coefficient basis. The
// dissipator is diagonal there: isotropic noise damps a string coefficient
// at rate 8 gamma per non-identity site; a fixed-direction field
// X_j = x*1 + y*sigma^z_j damps at 4 gamma y^2 per site with digit x or y
// (the identity part of X_j drops out of the commutators).
struct Superoperator {
  int n = 0;
  NoiseKind kind = NoiseKind::isotropic;
  double gamma = 0.0;
  double field_x = 0.0, field_y = 1.0;
  double h0_norm = 0.0;
  H0Spec h0;
  MatrixXr f;       // structure matrix of H0
  VectorXr rates;   // dissipative decay per Pauli index

  std::int64_t dim() const { return f.rows(); }

  // Schrodinger picture: dc/dt = (F^T - diag(rates)) c
  MatrixXr schrodinger() const {
    MatrixXr g = f.transpose();
    g.diagonal() -= rates;
    return g;
  }

  // Heisenberg picture: db/dt = (-F^T - diag(rates)) b
  MatrixXr heisenberg() const {
    MatrixXr g = -f.transpose();
    g.diagonal() -= rates;
    return g;
  }
};

inline Superoperator build_generator(const H0Spec& h0, NoiseKind kind,
                                     double gamma, double field_x = 0.0,
                                     double field_y = 1.0) {
  h0.validate();
  require(h0.n <= 6, "build_generator: n capped at 6");
  require(gamma >= 0.0, "build_generator: gamma must be >= 0");
  Superoperator gen;
  gen.n = h0.n;
  gen.kind = kind;
  gen.gamma = gamma;
  gen.field_x = field_x;
  gen.field_y = field_y;
  gen.h0 = h0;
  gen.h0_norm = h0.norm();
  gen.f = build_structure_matrix(h0).f;
  const std::int64_t dim = gen.f.rows();
  gen.rates = VectorXr::Zero(dim);
  for (std::int64_t alpha = 0; alpha < dim; ++alpha) {
    if (kind == NoiseKind::isotropic) {
      gen.rates[alpha] = 8.0 * gamma * pauli::weight(alpha, gen.n);
    } else {
      gen.rates[alpha] =
          4.0 * gamma * field_y * field_y * pauli::xy_weight(alpha, gen.n);
    }
  }
  return gen;
}

namespace detail {

// Propagate coefficient vectors along a uniform grid with one cached
// matrix exponential per distinct spacing. Above 4^5 the exponential is
// replaced by RK4 with a norm-scaled substep.
class CoefficientPropagator {
 public:
  explicit CoefficientPropagator(MatrixXr generator)
      : gen_(std::move(generator)) {
    use_expm_ = gen_.rows() <= 1024;
    if (!use_expm_) {
      const double norm = gen_.cwiseAbs().rowwise().sum().maxCoeff();
      substep_ = 0.02 / std::max(1.0, norm);
    }
  }

  void advance(VectorXr& c, double span) {
    if (span <= 0.0) return;
    if (use_expm_) {
      if (!have_step_ ||
          std::abs(span - step_span_) > 1e-12 * std::max(1.0, span)) {
        MatrixXr a = gen_ * span;
        step_ = a.exp();
        step_span_ = span;
        have_step_ = true;
      }
      c = step_ * c;
      return;
    }
    const int m = std::max(1, static_cast<int>(std::ceil(span / substep_)));
    const double h = span / m;
    VectorXr k1, k2, k3, k4;
    for (int i = 0; i < m; ++i) {
      k1.noalias() = gen_ * c;
      k2.noalias() = gen_ * (c + (0.5 * h) * k1);
      k3.noalias() = gen_ * (c + (0.5 * h) * k2);
      k4.noalias() = gen_ * (c + h * k3);
      c += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }

 private:
  MatrixXr gen_;
  MatrixXr step_;
  double step_span_ = 0.0;
  double substep_ = 0.0;
  bool have_step_ = false;
  bool use_expm_ = true;
};

}  // namespace detail

inline void validate_density_rep(const PauliOperatorRep& rho) {
  require(pauli_is_hermitian(rho, 1e-9), "density: coefficients must be real");
  const double dim = std::pow(2.0, rho.n);
  require(std::abs(std::real(rho.coeffs[0]) * dim - 1.0) < 1e-8,
          "density: trace must be 1");
  MatrixXc m = pauli_to_dense(rho);
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(m, Eigen::EigenvaluesOnly);
  require(es.eigenvalues().minCoeff() > -1e-8, "density: not positive");
}

inline std::vector<PauliOperatorRep> evolve_density(
    const Superoperator& gen, const PauliOperatorRep& rho0,
    const std::vector<double>& t_grid) {
  require(rho0.n == gen.n, "evolve_density: dimension mismatch");
  require(!t_grid.empty(), "evolve_density: empty grid");
  validate_density_rep(rho0);
  detail::CoefficientPropagator prop(gen.schrodinger());
  VectorXr c = rho0.coeffs.real();
  std::vector<PauliOperatorRep> out;
  out.reserve(t_grid.size());
  double t = 0.0, prev = -1.0;
  for (double target : t_grid) {
    require(target >= 0.0 && target > prev, "evolve_density: bad grid");
    prev = target;
    prop.advance(c, target - t);
    t = target;
    PauliOperatorRep rep = PauliOperatorRep::zero(gen.n);
    rep.coeffs = c.cast<Complex>();
    out.push_back(std::move(rep));
  }
  return out;
}

inline PauliOperatorRep heisenberg_evolve(const Superoperator& gen,
                                          const PauliOperatorRep& b0,
                                          double t) {
  require(b0.n == gen.n, "heisenberg_evolve: dimension mismatch");
  require(t >= 0.0, "heisenberg_evolve: t must be >= 0");
  require(pauli_is_hermitian(b0, 1e-9),
          "heisenberg_evolve: observable must be Hermitian");
  detail::CoefficientPropagator prop(gen.heisenberg());
  VectorXr b = b0.coeffs.real();
  prop.advance(b, t);
  PauliOperatorRep rep = PauliOperatorRep::zero(gen.n);
  rep.coeffs = b.cast<Complex>();
  return rep;
}

// ||[A_x, B(t)]|| maximised over sigma^{x,y,z} plus `random_probes` random
// traceless Hermitian unit-norm single-site operators. A sampled maximum is
// a lower bound on the supremum: enough to falsify an envelope, never to
// certify tightness.
inline double lr_commutator_of_state(const PauliOperatorRep& bt, int x,
                                     int random_probes = 20,
                                     std::uint64_t probe_seed = 7) {
  const int n = bt.n;
  require(n <= 5, "lr_commutator: dense norms capped at n=5");
  require(x >= 0 && x < n, "lr_commutator: site out of range");
  MatrixXc bdense = pauli_to_dense(bt);
  std::vector<std::array<double, 3>> probes;
  probes.push_back({1.0, 0.0, 0.0});
  probes.push_back({0.0, 1.0, 0.0});
  probes.push_back({0.0, 0.0, 1.0});
  RngStream rng({probe_seed, 0});
  for (int k = 0; k < random_probes; ++k) {
    std::array<double, 3> v{rng.normal(), rng.normal(), rng.normal()};
    const double r = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (r < 1e-12) {
      --k;
      continue;
    }
    probes.push_back({v[0] / r, v[1] / r, v[2] / r});
  }
  double best = 0.0;
  for (const auto& v : probes) {
    PauliOperatorRep a = PauliOperatorRep::zero(n);
    a.coeffs[std::int64_t(1) << (2 * x)] = v[0];
    a.coeffs[std::int64_t(2) << (2 * x)] = v[1];
    a.coeffs[std::int64_t(3) << (2 * x)] = v[2];
    MatrixXc adense = pauli_to_dense(a);
    MatrixXc comm = adense * bdense - bdense * adense;
    // i[A,B] is Hermitian for Hermitian A, B
    Eigen::SelfAdjointEigenSolver<MatrixXc> es(Complex(0.0, 1.0) * comm,
                                               Eigen::EigenvaluesOnly);
    best = std::max(best, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  return best;
}

inline double lr_commutator(const Superoperator& gen,
                            const PauliOperatorRep& b0, int x, double t,
                            int random_probes = 20) {
  return lr_commutator_of_state(heisenberg_evolve(gen, b0, t), x,
                                random_probes);
}

// C_B(x, t) on a shared grid for every site, stepping B(t) once.
inline std::vector<std::vector<double>> lr_commutator_series(
    const Superoperator& gen, const PauliOperatorRep& b0,
    const std::vector<double>& t_grid, int random_probes = 20) {
  require(b0.n == gen.n, "lr_commutator_series: dimension mismatch");
  detail::CoefficientPropagator prop(gen.heisenberg());
  VectorXr b = b0.coeffs.real();
  std::vector<std::vector<double>> out;
  out.reserve(t_grid.size());
  double t = 0.0, prev = -1.0;
  for (double target : t_grid) {
    require(target >= 0.0 && target > prev, "lr_commutator_series: bad grid");
    prev = target;
    prop.advance(b, target - t);
    t = target;
    PauliOperatorRep bt = PauliOperatorRep::zero(gen.n);
    bt.coeffs = b.cast<Complex>();
    std::vector<double> row(gen.n);
    for (int x = 0; x < gen.n; ++x)
      row[x] = lr_commutator_of_state(bt, x, random_probes);
    out.push_back(std::move(row));
  }
  return out;
}

// Diagnostic for the paper's mixing condition: rank of the F submatrix with
// rows outside I = {alpha : some digit in {x,y}} and columns inside I.
struct RankConditionReport {
  std::int64_t rows = 0, cols = 0;
  std::int64_t rank = 0, max_rank = 0;
  bool full_rank = false;
  VectorXr singular_values;
  double tolerance = 0.0;
};

inline RankConditionReport rank_condition_report(const StructureMatrix& sm) {
  const int n = sm.n;
  const std::int64_t dim = sm.f.rows();
  std::vector<std::int64_t> rows, cols;
  for (std::int64_t alpha = 0; alpha < dim; ++alpha) {
    if (pauli::xy_weight(alpha, n) == 0)
      rows.push_back(alpha);
    else
      cols.push_back(alpha);
  }
  MatrixXr sub(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      sub(i, j) = sm.f(rows[i], cols[j]);
  RankConditionReport rep;
  rep.rows = static_cast<std::int64_t>(rows.size());
  rep.cols = static_cast<std::int64_t>(cols.size());
  rep.max_rank = std::min(rep.rows, rep.cols);
  Eigen::BDCSVD<MatrixXr> svd(sub);
  rep.singular_values = svd.singularValues();
  const double smax =
      rep.singular_values.size() > 0 ? rep.singular_values[0] : 0.0;
  rep.tolerance = 1e-10 * std::max(smax, 1e-300);
  rep.rank = (rep.singular_values.array() > rep.tolerance).count();
  rep.full_rank = (rep.rank == rep.max_rank);
  return rep;
}

// Spectral analysis of the generator; the authoritative mixing verdict.
struct RelaxationReport {
  double gap = 0.0;          // -max Re of nonzero eigenvalues
  std::int64_t kernel_dim = 0;
  bool maximally_mixing = false;
  MatrixXc kernel;           // steady-state coefficient vectors (columns)
};

inline RelaxationReport relaxation_check(const Superoperator& gen) {
  require(gen.n <= 5, "relaxation_check: spectral analysis capped at n=5");
  const MatrixXr g = gen.schrodinger();
  Eigen::EigenSolver<MatrixXr> es(g);
  const VectorXc ev = es.eigenvalues();
  const double scale = std::max(ev.cwiseAbs().maxCoeff(), 1.0);
  const double tol = 1e-9 * scale;
  RelaxationReport rep;
  double max_re_nonzero = -std::numeric_limits<double>::infinity();
  std::vector<std::int64_t> kernel_idx;
  for (std::int64_t i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i]) <= tol) {
      kernel_idx.push_back(i);
    } else {
      max_re_nonzero = std::max(max_re_nonzero, std::real(ev[i]));
    }
  }
  rep.kernel_dim = static_cast<std::int64_t>(kernel_idx.size());
  rep.gap = -max_re_nonzero;
  rep.kernel.resize(g.rows(), rep.kernel_dim);
  for (std::size_t k = 0; k < kernel_idx.size(); ++k)
    rep.kernel.col(k) = es.eigenvectors().col(kernel_idx[k]);
  if (rep.kernel_dim == 1) {
    const VectorXc v = rep.kernel.col(0);
    const double off = (v.tail(v.size() - 1)).norm();
    rep.maximally_mixing = off <= 1e-7 * v.norm();
  }
  return rep;
}

}  // namespace qchain
