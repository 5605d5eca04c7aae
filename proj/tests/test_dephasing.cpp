#include <catch2/catch_amalgamated.hpp>

#include "qchain/bounds.hpp"
#include "qchain/dephasing.hpp"
#include "qchain/ensemble.hpp"
#include "qchain/propagator.hpp"
#include "qchain/trajectory.hpp"

using namespace qchain;

TEST_CASE("gamma=0 reduces to unitary conjugation", "[dephasing]") {
  ChainSpec spec{9, Boundary::open, 0.0, NoiseMode::dynamic};
  MatrixXc rho0 = MatrixXc::Zero(9, 9);
  rho0(4, 4) = 0.5;
  rho0(5, 5) = 0.5;
  rho0(4, 5) = Complex(0.25, 0.25);
  rho0(5, 4) = std::conj(rho0(4, 5));
  auto out = evolve_dephasing_density(spec, rho0, {2.0});
  MatrixXc u = XXSpectrum(spec).unitary(2.0);
  MatrixXc want = u * rho0 * u.adjoint();
  REQUIRE((out[0].rho - want).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("hopping suppressed: diagonal frozen, coherences decay",
          "[dephasing]") {
  ChainSpec spec{5, Boundary::open, 0.4, NoiseMode::dynamic};
  MatrixXc rho0 = MatrixXc::Zero(5, 5);
  rho0(1, 1) = 0.6;
  rho0(3, 3) = 0.4;
  rho0(1, 3) = Complex(0.2, -0.1);
  rho0(3, 1) = std::conj(rho0(1, 3));
  DephasingOptions opts;
  opts.disable_hopping = true;
  const double t = 1.5;
  auto out = evolve_dephasing_density(spec, rho0, {t}, opts);
  REQUIRE(std::abs(out[0].rho(1, 1) - rho0(1, 1)) < 1e-10);
  REQUIRE(std::abs(out[0].rho(3, 3) - rho0(3, 3)) < 1e-10);
  const Complex want = rho0(1, 3) * std::exp(-2.0 * spec.gamma * t);
  REQUIRE(std::abs(out[0].rho(1, 3) - want) < 1e-9);
}

TEST_CASE("trace, Hermiticity, positivity preserved", "[dephasing]") {
  ChainSpec spec{13, Boundary::ring, 0.2, NoiseMode::dynamic};
  MatrixXc rho0 = MatrixXc::Zero(13, 13);
  rho0(6, 6) = 1.0;
  auto out = evolve_dephasing_density(spec, rho0, {1.0, 2.0, 3.0});
  for (const auto& snap : out) {
    REQUIRE(std::abs(snap.rho.trace() - Complex(1.0, 0.0)) < 1e-10);
    REQUIRE((snap.rho - snap.rho.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
    Eigen::SelfAdjointEigenSolver<MatrixXc> es(snap.rho,
                                               Eigen::EigenvaluesOnly);
    REQUIRE(es.eigenvalues().minCoeff() > -1e-8);
  }
}

TEST_CASE("halving the substep changes nothing at 1e-8", "[dephasing]") {
  ChainSpec spec{15, Boundary::open, 0.3, NoiseMode::dynamic};
  MatrixXc rho0 = MatrixXc::Zero(15, 15);
  rho0(7, 7) = 1.0;
  DephasingOptions coarse;
  coarse.max_step = 0.005;
  DephasingOptions fine;
  fine.max_step = 0.0025;
  auto a = evolve_dephasing_density(spec, rho0, {2.0}, coarse);
  auto b = evolve_dephasing_density(spec, rho0, {2.0}, fine);
  REQUIRE((a[0].rho - b[0].rho).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("MSD of the exact density matches f(gamma,t)", "[dephasing]") {
  ChainSpec spec{61, Boundary::open, 0.25, NoiseMode::dynamic};
  MatrixXc rho0 = MatrixXc::Zero(61, 61);
  const int k = 30;
  rho0(k, k) = 1.0;
  auto out = evolve_dephasing_density(spec, rho0, {1.0, 3.0, 6.0});
  for (const auto& snap : out) {
    double msd = 0.0;
    for (int j = 0; j < 61; ++j)
      msd += (j - k) * (j - k) * std::real(snap.rho(j, j));
    const double want = msd_f(spec.gamma, snap.t);
    REQUIRE(std::abs(msd - want) < 1e-6 * std::max(1.0, want));
  }
}

TEST_CASE("diagonal identity bridges to the ensemble", "[dephasing]") {
  // E|c_{j,k}|^2 are the diagonal entries of the dephasing density
  ChainSpec spec{9, Boundary::open, 0.3, NoiseMode::dynamic};
  const int k = 4;
  MatrixXc rho0 = MatrixXc::Zero(9, 9);
  rho0(k, k) = 1.0;
  auto exact = evolve_dephasing_density(spec, rho0, {1.0, 2.0});
  auto stats = run_ensemble(spec, 600, 55, {1.0, 2.0}, 0.01,
                            {site_source(9, k)});
  for (std::size_t ti = 0; ti < exact.size(); ++ti) {
    for (int j = 0; j < 9; ++j) {
      const double err = std::abs(std::real(exact[ti].rho(j, j)) -
                                  stats.mean_abs2[0](ti, j));
      REQUIRE(err <= 3.0 * std::max(stats.stderr_abs2[0](ti, j), 1e-12) +
                        2e-4);  // split-step bias at dt = 0.01
    }
  }
}

TEST_CASE("invalid densities rejected", "[dephasing]") {
  ChainSpec spec{4, Boundary::open, 0.1, NoiseMode::dynamic};
  MatrixXc bad = MatrixXc::Zero(4, 4);
  bad(0, 0) = 2.0;  // trace 2
  REQUIRE_THROWS_AS(evolve_dephasing_density(spec, bad, {1.0}), Error);
  bad(0, 0) = 1.5;
  bad(1, 1) = -0.5;  // negative eigenvalue
  REQUIRE_THROWS_AS(evolve_dephasing_density(spec, bad, {1.0}), Error);
  MatrixXc nonherm = MatrixXc::Zero(4, 4);
  nonherm(0, 0) = 1.0;
  nonherm(0, 1) = Complex(0.3, 0.1);
  REQUIRE_THROWS_AS(evolve_dephasing_density(spec, nonherm, {1.0}), Error);
}
