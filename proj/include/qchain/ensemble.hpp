#pragma once

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

#include "qchain/chain.hpp"
#include "qchain/common.hpp"
#include "qchain/trajectory.hpp"

namespace qchain {

// Initial vector plus the site used as origin for position observables.
struct SourceSpec {
  VectorXc psi0;
  int origin = 0;
};

inline SourceSpec site_source(int n, int site) {
  return {basis_state(n, site), site};
}

inline SourceSpec wavepacket_source(int n, int site) {
  return {wavepacket_state(n, site), site};
}

// Monte Carlo estimates over noise realizations. All per-site arrays are
// indexed (time, site), one entry of the outer vector per source.
struct EnsembleStats {
  std::vector<double> ts;
  int n = 0;
  int traj_count = 0;
  std::uint64_t master_seed = 0;
  double dt = 0.0;
  std::vector<int> origins;

  std::vector<MatrixXc> mean_c;       // E[psi_j]
  std::vector<MatrixXr> stderr_c;     // sqrt(var_c / N)
  std::vector<MatrixXr> mean_abs2;    // E|psi_j|^2
  std::vector<MatrixXr> stderr_abs2;
  std::vector<MatrixXr> var_c;        // E|psi|^2 - |E psi|^2
  std::vector<MatrixXr> stderr_var;
  std::vector<VectorXr> msd, msd_stderr;            // sum_j (j-origin)^2 |psi_j|^2
  std::vector<VectorXr> momentum, momentum_stderr;  // -2 sum_j Im(psi_j psi_{j+1}^*)
};

struct EnsembleOptions {
  int threads = 0;  // 0: hardware concurrency
  TrajectoryOptions trajectory;
};

namespace detail {

// Per-block partial sums. Blocks have a fixed size so the reduction order
// (sequential within a block, blocks folded in index order) is independent
// of the thread count.
inline constexpr int kEnsembleBlock = 16;

struct BlockSums {
  std::vector<MatrixXc> sum_c;
  std::vector<MatrixXr> sum_abs2, sum_abs4;
  std::vector<VectorXr> sum_msd, sum_msd2, sum_p, sum_p2;

  void init(int sources, int t_count, int n) {
    sum_c.assign(sources, MatrixXc::Zero(t_count, n));
    sum_abs2.assign(sources, MatrixXr::Zero(t_count, n));
    sum_abs4.assign(sources, MatrixXr::Zero(t_count, n));
    sum_msd.assign(sources, VectorXr::Zero(t_count));
    sum_msd2.assign(sources, VectorXr::Zero(t_count));
    sum_p.assign(sources, VectorXr::Zero(t_count));
    sum_p2.assign(sources, VectorXr::Zero(t_count));
  }

  void add(const BlockSums& o) {
    for (std::size_t s = 0; s < sum_c.size(); ++s) {
      sum_c[s] += o.sum_c[s];
      sum_abs2[s] += o.sum_abs2[s];
      sum_abs4[s] += o.sum_abs4[s];
      sum_msd[s] += o.sum_msd[s];
      sum_msd2[s] += o.sum_msd2[s];
      sum_p[s] += o.sum_p[s];
      sum_p2[s] += o.sum_p2[s];
    }
  }
};

inline void accumulate_snapshot(BlockSums& acc, int ti, const MatrixXc& psi,
                                const std::vector<SourceSpec>& sources) {
  const int n = static_cast<int>(psi.rows());
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const auto col = psi.col(static_cast<int>(s));
    double msd = 0.0;
    for (int j = 0; j < n; ++j) {
      const Complex a = col[j];
      const double a2 = std::norm(a);
      acc.sum_c[s](ti, j) += a;
      acc.sum_abs2[s](ti, j) += a2;
      acc.sum_abs4[s](ti, j) += a2 * a2;
      const double d = j - sources[s].origin;
      msd += d * d * a2;
    }
    double p = 0.0;
    for (int j = 0; j + 1 < n; ++j)
      p -= 2.0 * std::imag(col[j] * std::conj(col[j + 1]));
    acc.sum_msd[s][ti] += msd;
    acc.sum_msd2[s][ti] += msd * msd;
    acc.sum_p[s][ti] += p;
    acc.sum_p2[s][ti] += p * p;
  }
}

}  // namespace detail

// Averages split-step trajectories over traj_count independent noise paths
// (trajectory i uses RNG stream i). Output is bit-reproducible for a fixed
// master seed regardless of thread count.
inline EnsembleStats run_ensemble(const ChainSpec& chain, int traj_count,
                                  std::uint64_t master_seed,
                                  const std::vector<double>& t_grid, double dt,
                                  const std::vector<SourceSpec>& sources,
                                  EnsembleOptions options = {}) {
  chain.validate();
  require(traj_count >= 1, "run_ensemble: traj_count must be >= 1");
  require(traj_count <= 100'000'000, "run_ensemble: traj_count too large");
  require(!sources.empty(), "run_ensemble: at least one source required");
  require(!t_grid.empty(), "run_ensemble: empty time grid");
  for (const auto& src : sources)
    require(src.psi0.size() == chain.n, "run_ensemble: source dimension");

  TrajectoryEngine engine(chain, dt, options.trajectory);
  const int t_count = static_cast<int>(t_grid.size());
  const int steps = static_cast<int>(std::llround(t_grid.back() / dt));
  NoiseRealization probe;
  probe.dt = dt;
  probe.steps = steps;
  const std::vector<int> snaps = engine.snapshot_steps(probe, t_grid);

  MatrixXc psi0(chain.n, static_cast<int>(sources.size()));
  for (std::size_t s = 0; s < sources.size(); ++s)
    psi0.col(static_cast<int>(s)) = sources[s].psi0;

  const int n_blocks =
      (traj_count + detail::kEnsembleBlock - 1) / detail::kEnsembleBlock;
  std::vector<detail::BlockSums> blocks(n_blocks);

  int n_threads = options.threads > 0
                      ? options.threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads < 1) n_threads = 1;
  n_threads = std::min(n_threads, n_blocks);

  std::atomic<int> next_block{0};
  auto worker = [&]() {
    NoiseRealization noise;
    MatrixXc psi, work;
    for (;;) {
      const int b = next_block.fetch_add(1);
      if (b >= n_blocks) break;
      auto& acc = blocks[b];
      acc.init(static_cast<int>(sources.size()), t_count, chain.n);
      const int lo = b * detail::kEnsembleBlock;
      const int hi = std::min(lo + detail::kEnsembleBlock, traj_count);
      for (int traj = lo; traj < hi; ++traj) {
        sample_noise_path_into(chain, {master_seed, static_cast<std::uint64_t>(traj)},
                               dt, steps, noise);
        psi = psi0;
        int next_snap = 0;
        for (int s = 0; s <= steps && next_snap < t_count; ++s) {
          while (next_snap < t_count && snaps[next_snap] == s) {
            detail::accumulate_snapshot(acc, next_snap, psi, sources);
            ++next_snap;
          }
          if (s < steps) engine.step(psi, noise, s, work);
        }
      }
    }
  };

  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  detail::BlockSums total;
  total.init(static_cast<int>(sources.size()), t_count, chain.n);
  for (const auto& b : blocks) total.add(b);

  EnsembleStats stats;
  stats.ts = t_grid;
  stats.n = chain.n;
  stats.traj_count = traj_count;
  stats.master_seed = master_seed;
  stats.dt = dt;
  const double inv_n = 1.0 / traj_count;
  for (std::size_t s = 0; s < sources.size(); ++s) {
    stats.origins.push_back(sources[s].origin);
    MatrixXc mean_c = total.sum_c[s] * inv_n;
    MatrixXr mean_abs2 = total.sum_abs2[s] * inv_n;
    MatrixXr mean_abs4 = total.sum_abs4[s] * inv_n;
    MatrixXr var = mean_abs2 - mean_c.cwiseAbs2();
    MatrixXr var_abs2 =
        (mean_abs4 - mean_abs2.cwiseAbs2()).cwiseMax(0.0);
    MatrixXr se_c = (var.cwiseMax(0.0) * inv_n).cwiseSqrt();
    MatrixXr se_abs2 = (var_abs2 * inv_n).cwiseSqrt();
    MatrixXr se_var =
        (se_abs2.array().square() +
         (2.0 * mean_c.cwiseAbs().array() * se_c.array()).square())
            .sqrt()
            .matrix();
    stats.mean_c.push_back(std::move(mean_c));
    stats.mean_abs2.push_back(std::move(mean_abs2));
    stats.var_c.push_back(std::move(var));
    stats.stderr_c.push_back(std::move(se_c));
    stats.stderr_abs2.push_back(std::move(se_abs2));
    stats.stderr_var.push_back(std::move(se_var));

    VectorXr msd = total.sum_msd[s] * inv_n;
    VectorXr msd_var =
        (total.sum_msd2[s] * inv_n - msd.cwiseAbs2()).cwiseMax(0.0);
    VectorXr p = total.sum_p[s] * inv_n;
    VectorXr p_var = (total.sum_p2[s] * inv_n - p.cwiseAbs2()).cwiseMax(0.0);
    stats.msd.push_back(msd);
    stats.msd_stderr.push_back((msd_var * inv_n).cwiseSqrt());
    stats.momentum.push_back(p);
    stats.momentum_stderr.push_back((p_var * inv_n).cwiseSqrt());
  }
  return stats;
}

}  // namespace qchain
