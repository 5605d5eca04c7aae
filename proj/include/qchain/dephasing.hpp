#pragma once

#include <vector>

#include <Eigen/Eigenvalues>

#include "qchain/chain.hpp"
#include "qchain/common.hpp"

namespace qchain {

struct SingleParticleDensity {
  double t = 0.0;
  MatrixXc rho;
};

struct DephasingOptions {
  double max_step = 0.005;  // RK4 substep ceiling
  bool disable_hopping = false;  // test hook: pure dephasing
};

namespace detail {

// out = R * rho using the tridiagonal structure of R (plus ring corners).
inline void apply_hopping_left(const MatrixXc& rho, bool ring, MatrixXc& out) {
  const int n = static_cast<int>(rho.rows());
  out.setZero(n, n);
  out.topRows(n - 1) += rho.bottomRows(n - 1);
  out.bottomRows(n - 1) += rho.topRows(n - 1);
  if (ring && n > 2) {
    out.row(0) += rho.row(n - 1);
    out.row(n - 1) += rho.row(0);
  }
}

// drho/dt = -i[R, rho] - 2 gamma (rho - diag rho). Uses rho = rho^dagger
// so that rho R = (R rho)^dagger.
struct DephasingRhs {
  bool ring = false;
  double gamma = 0.0;
  bool hopping = true;
  mutable MatrixXc work;

  void operator()(const MatrixXc& rho, MatrixXc& out) const {
    const int n = static_cast<int>(rho.rows());
    if (hopping) {
      apply_hopping_left(rho, ring, work);
      out = Complex(0.0, -1.0) * (work - work.adjoint());
    } else {
      out.setZero(n, n);
    }
    if (gamma > 0.0) {
      out -= 2.0 * gamma * rho;
      out.diagonal() += 2.0 * gamma * rho.diagonal();
    }
  }
};

}  // namespace detail

inline void validate_density(const MatrixXc& rho, double tol = 1e-8) {
  require(rho.rows() == rho.cols(), "density: must be square");
  require((rho - rho.adjoint()).cwiseAbs().maxCoeff() < tol,
          "density: not Hermitian");
  require(std::abs(rho.trace() - Complex(1.0, 0.0)) < tol,
          "density: trace must be 1");
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(rho, Eigen::EigenvaluesOnly);
  require(es.eigenvalues().minCoeff() > -tol, "density: not positive");
}

// Fixed-step RK4 integration of the dephasing master equation in the
// one-particle sector. Snapshots are returned at the requested times; the
// substep never exceeds options.max_step.
inline std::vector<SingleParticleDensity> evolve_dephasing_density(
    const ChainSpec& chain, const MatrixXc& rho0,
    const std::vector<double>& t_grid, DephasingOptions options = {}) {
  chain.validate();
  require(chain.boundary != Boundary::infinite_analytic,
          "evolve_dephasing_density: requires a finite chain");
  require(rho0.rows() == chain.n, "evolve_dephasing_density: rho0 dimension");
  require(options.max_step > 0.0, "evolve_dephasing_density: max_step > 0");
  validate_density(rho0);
  require(!t_grid.empty(), "evolve_dephasing_density: empty time grid");

  detail::DephasingRhs rhs;
  rhs.ring = (chain.boundary == Boundary::ring);
  rhs.gamma = (chain.noise_mode == NoiseMode::none) ? 0.0 : chain.gamma;
  rhs.hopping = !options.disable_hopping;
  require(chain.noise_mode != NoiseMode::static_,
          "evolve_dephasing_density: static disorder has no single master "
          "equation; average trajectories instead");

  std::vector<SingleParticleDensity> out;
  out.reserve(t_grid.size());
  MatrixXc rho = rho0;
  MatrixXc k1, k2, k3, k4, tmp;
  double t = 0.0;
  double prev = -1.0;
  for (double target : t_grid) {
    require(target >= 0.0, "evolve_dephasing_density: negative time");
    require(target > prev, "evolve_dephasing_density: grid must increase");
    prev = target;
    const double span = target - t;
    if (span > 0.0) {
      const int m = std::max(1, static_cast<int>(std::ceil(span / options.max_step)));
      const double h = span / m;
      for (int i = 0; i < m; ++i) {
        rhs(rho, k1);
        tmp = rho + (0.5 * h) * k1;
        rhs(tmp, k2);
        tmp = rho + (0.5 * h) * k2;
        rhs(tmp, k3);
        tmp = rho + h * k3;
        rhs(tmp, k4);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      t = target;
    }
    out.push_back({target, rho});
  }
  return out;
}

}  // namespace qchain
