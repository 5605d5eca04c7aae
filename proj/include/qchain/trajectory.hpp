#pragma once

#include <vector>

#include <Eigen/SparseCore>

#include "qchain/chain.hpp"
#include "qchain/common.hpp"
#include "qchain/propagator.hpp"

namespace qchain {

// Amplitudes at one requested time. Columns track the evolution of the
// supplied initial vectors (one column per source).
struct TrajectoryState {
  double t = 0.0;
  MatrixXc amplitudes;  // n x m
};

struct TrajectoryOptions {
  // Test hook: drop the hopping step so a trajectory is a pure phase kick.
  bool disable_hopping = false;
};

// Split-step integrator for one noise realization: per step apply the exact
// hop exp(-iR dt) then the diagonal phase kick exp(-i phi_j). Each step is
// exactly unitary. The hop matrix decays superexponentially away from the
// diagonal, so entries below 1e-15 are pruned and applied sparsely.
class TrajectoryEngine {
 public:
  TrajectoryEngine(const ChainSpec& spec, double dt,
                   TrajectoryOptions opts = {})
      : n_(spec.n), dt_(dt), opts_(opts) {
    require(dt > 0.0, "TrajectoryEngine: dt must be > 0");
    require(spec.boundary != Boundary::infinite_analytic,
            "TrajectoryEngine: trajectories require a finite chain");
    if (!opts_.disable_hopping) {
      XXSpectrum spectrum(spec);
      MatrixXc u = spectrum.unitary(dt);
      // prune far below double precision so the truncation never shows up
      // even after ~1e5 accumulated applications
      hop_ = u.sparseView(1.0, 1e-16);
      hop_.makeCompressed();
    }
  }

  int n() const { return n_; }
  double dt() const { return dt_; }

  // In-place single step with the phases of noise step s. `work` is a
  // caller-owned buffer so one engine can be shared across threads.
  void step(MatrixXc& psi, const NoiseRealization& noise, int s,
            MatrixXc& work) const {
    if (!opts_.disable_hopping) {
      work.resize(psi.rows(), psi.cols());
      work.noalias() = hop_ * psi;
      psi.swap(work);
    }
    for (int j = 0; j < n_; ++j) {
      const Complex kick = std::exp(Complex(0.0, -noise.phases(s, j)));
      psi.row(j) *= kick;
    }
  }

  std::vector<TrajectoryState> evolve(const NoiseRealization& noise,
                                      const std::vector<double>& t_grid,
                                      const MatrixXc& psi0) const {
    require(noise.phases.cols() == n_, "evolve: noise path has wrong width");
    require(psi0.rows() == n_, "evolve: initial state has wrong dimension");
    const std::vector<int> snap = snapshot_steps(noise, t_grid);
    std::vector<TrajectoryState> out;
    out.reserve(t_grid.size());
    MatrixXc psi = psi0;
    MatrixXc work;
    int next = 0;
    for (int s = 0; s <= noise.steps && next < static_cast<int>(snap.size());
         ++s) {
      while (next < static_cast<int>(snap.size()) && snap[next] == s) {
        out.push_back({t_grid[next], psi});
        ++next;
      }
      if (s < noise.steps) step(psi, noise, s, work);
    }
    return out;
  }

  // Maps each requested time to a whole step count, rejecting times that do
  // not sit on the dt grid or exceed the path.
  std::vector<int> snapshot_steps(const NoiseRealization& noise,
                                  const std::vector<double>& t_grid) const {
    std::vector<int> snap;
    snap.reserve(t_grid.size());
    double prev = -1.0;
    for (double t : t_grid) {
      require(t >= 0.0, "evolve: t_grid times must be >= 0");
      require(t > prev, "evolve: t_grid must be strictly increasing");
      prev = t;
      const double steps_real = t / noise.dt;
      const int s = static_cast<int>(std::llround(steps_real));
      require(std::abs(steps_real - s) < 1e-6,
              "evolve: t_grid times must be integer multiples of dt");
      require(s <= noise.steps, "evolve: t_grid exceeds the noise path length");
      snap.push_back(s);
    }
    return snap;
  }

 private:
  int n_;
  double dt_;
  TrajectoryOptions opts_;
  Eigen::SparseMatrix<Complex> hop_;
};

inline std::vector<TrajectoryState> evolve_trajectory(
    const ChainSpec& spec, const NoiseRealization& noise,
    const std::vector<double>& t_grid, const MatrixXc& psi0,
    TrajectoryOptions opts = {}) {
  TrajectoryEngine engine(spec, noise.dt, opts);
  return engine.evolve(noise, t_grid, psi0);
}

inline VectorXc basis_state(int n, int site) {
  require(site >= 0 && site < n, "basis_state: site out of range");
  VectorXc v = VectorXc::Zero(n);
  v[site] = 1.0;
  return v;
}

// (e_k + i e_{k+1})/sqrt(2); carries <p>(0) = 1.
inline VectorXc wavepacket_state(int n, int site) {
  require(site >= 0 && site + 1 < n, "wavepacket_state: needs sites k, k+1");
  VectorXc v = VectorXc::Zero(n);
  v[site] = 1.0 / std::sqrt(2.0);
  v[site + 1] = Complex(0.0, 1.0 / std::sqrt(2.0));
  return v;
}

}  // namespace qchain
