#pragma once

#include <chrono>
#include <cstdlib>
#include <sstream>

#include "qchain/analysis.hpp"
#include "qchain/bounds.hpp"
#include "qchain/config.hpp"
#include "qchain/dephasing.hpp"
#include "qchain/ensemble.hpp"
#include "qchain/lindblad.hpp"
#include "qchain/output.hpp"
#include "qchain/propagator.hpp"

namespace qchain {

// Sample times snapped onto the split-step dt grid, always starting at 0.
inline std::vector<double> snapped_time_grid(double t_max, int samples,
                                             double dt) {
  require(t_max > 0.0 && dt > 0.0 && samples >= 2, "time grid: bad arguments");
  const auto steps = static_cast<long long>(std::llround(t_max / dt));
  require(steps >= 1, "time grid: t_max shorter than one step");
  std::vector<double> out;
  for (int i = 0; i < samples; ++i) {
    const long long s = (steps * i) / (samples - 1);
    const double t = static_cast<double>(s) * dt;
    if (out.empty() || t > out.back()) out.push_back(t);
  }
  return out;
}

inline std::vector<double> linear_time_grid(double t_max, int samples) {
  require(t_max > 0.0 && samples >= 2, "time grid: bad arguments");
  std::vector<double> out(samples);
  for (int i = 0; i < samples; ++i) out[i] = t_max * i / (samples - 1);
  return out;
}

namespace detail {

inline int resolve_site(int one_based, int n, int fallback_index) {
  if (one_based == 0) return fallback_index;
  require(one_based >= 1 && one_based <= n, "site out of range");
  return one_based - 1;
}

inline std::vector<std::string> site_columns(int n) {
  std::vector<std::string> cols{"t"};
  for (int j = 1; j <= n; ++j) cols.push_back("site_" + std::to_string(j));
  return cols;
}

inline std::string wide_csv(const std::vector<double>& ts,
                            const MatrixXr& values) {
  std::vector<std::vector<double>> rows;
  rows.reserve(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    std::vector<double> row{ts[i]};
    for (int j = 0; j < values.cols(); ++j)
      row.push_back(values(static_cast<int>(i), j));
    rows.push_back(std::move(row));
  }
  return csv_bytes(site_columns(static_cast<int>(values.cols())), rows);
}

struct ParsedCsv {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline ParsedCsv parse_csv(const std::string& bytes) {
  ParsedCsv out;
  std::istringstream in(bytes);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "csv: empty file");
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) out.columns.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream rs(line);
    while (std::getline(rs, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error("csv: non-numeric cell '" + cell + "'");
      }
    }
    require(row.size() == out.columns.size(), "csv: ragged row");
    out.rows.push_back(std::move(row));
  }
  return out;
}

inline SourceSpec make_source(const std::string& initial, int n, int site) {
  if (initial == "wavepacket") return wavepacket_source(n, site);
  return site_source(n, site);
}

}  // namespace detail

inline void run_ensemble_experiment(const RunConfig& cfg, OutputSink& sink) {
  ChainSpec chain = cfg.chain_spec();
  require(chain.boundary != Boundary::infinite_analytic,
          "ensemble: needs a finite chain");
  const int origin = detail::resolve_site(cfg.source_site, cfg.n, (cfg.n - 1) / 2);
  const std::vector<double> grid =
      snapped_time_grid(cfg.t_max, cfg.samples, cfg.dt);
  EnsembleOptions opts;
  opts.threads = cfg.threads;
  SourceSpec source = detail::make_source(cfg.initial, cfg.n, origin);
  EnsembleStats stats = run_ensemble(chain, cfg.trajectories, cfg.seed, grid,
                                     cfg.dt, {source}, opts);

  const int t_count = static_cast<int>(grid.size());
  MatrixXr mean_abs(t_count, cfg.n), mean_re(t_count, cfg.n),
      mean_im(t_count, cfg.n);
  for (int ti = 0; ti < t_count; ++ti)
    for (int j = 0; j < cfg.n; ++j) {
      mean_abs(ti, j) = std::abs(stats.mean_c[0](ti, j));
      mean_re(ti, j) = std::real(stats.mean_c[0](ti, j));
      mean_im(ti, j) = std::imag(stats.mean_c[0](ti, j));
    }
  sink.write("ensemble_mean_abs.csv", detail::wide_csv(grid, mean_abs));
  sink.write("ensemble_mean_re.csv", detail::wide_csv(grid, mean_re));
  sink.write("ensemble_mean_im.csv", detail::wide_csv(grid, mean_im));
  sink.write("ensemble_stderr.csv", detail::wide_csv(grid, stats.stderr_c[0]));
  sink.write("ensemble_abs2.csv", detail::wide_csv(grid, stats.mean_abs2[0]));
  sink.write("ensemble_abs2_stderr.csv",
             detail::wide_csv(grid, stats.stderr_abs2[0]));
  sink.write("ensemble_var.csv", detail::wide_csv(grid, stats.var_c[0]));
  sink.write("ensemble_var_stderr.csv",
             detail::wide_csv(grid, stats.stderr_var[0]));

  std::vector<std::vector<double>> obs;
  for (int ti = 0; ti < t_count; ++ti)
    obs.push_back({grid[ti], stats.msd[0][ti], stats.msd_stderr[0][ti],
                   stats.momentum[0][ti], stats.momentum_stderr[0][ti]});
  sink.write("observables.csv",
             csv_bytes({"t", "msd", "msd_stderr", "momentum",
                        "momentum_stderr"},
                       obs));

  // single disorder realization (stream 0) for the Fig.-2-style panel
  NoiseRealization noise = sample_noise_path(
      chain, {cfg.seed, 0},
      cfg.dt, static_cast<int>(std::llround(grid.back() / cfg.dt)));
  auto single = evolve_trajectory(chain, noise, grid, source.psi0);
  ArrayXXr single_abs(t_count, cfg.n);
  for (int ti = 0; ti < t_count; ++ti)
    for (int j = 0; j < cfg.n; ++j)
      single_abs(ti, j) = std::abs(single[ti].amplitudes(j, 0));
  sink.write("heatmap_single_abs.txt",
             heatmap_text_bytes(single_abs, grid, "single_realization_abs_c"));
  sink.write("heatmap_single_abs.pgm", heatmap_pgm_bytes(single_abs));
  sink.write("heatmap_mean_abs.txt",
             heatmap_text_bytes(mean_abs.array(), grid, "ensemble_mean_abs_c"));
  sink.write("heatmap_mean_abs.pgm", heatmap_pgm_bytes(mean_abs.array()));
}

inline void run_exact_experiment(const RunConfig& cfg, OutputSink& sink) {
  ChainSpec chain = cfg.chain_spec();
  const std::vector<double> grid = linear_time_grid(cfg.t_max, cfg.samples);
  const int t_count = static_cast<int>(grid.size());
  const int origin =
      detail::resolve_site(cfg.density_source_site, cfg.n, (cfg.n - 1) / 2);

  // closed-form averaged correlations out of the source column
  ArrayXXr corr_abs(t_count, cfg.n);
  for (int ti = 0; ti < t_count; ++ti) {
    MatrixXc c = exact_averaged_correlation(chain, grid[ti]);
    for (int j = 0; j < cfg.n; ++j) corr_abs(ti, j) = std::abs(c(j, origin));
  }
  sink.write("exact_corr_abs.csv",
             detail::wide_csv(grid, corr_abs.matrix()));
  sink.write("heatmap_exact_abs.txt",
             heatmap_text_bytes(corr_abs, grid, "exact_mean_abs_c"));
  sink.write("heatmap_exact_abs.pgm", heatmap_pgm_bytes(corr_abs));

  if (chain.boundary == Boundary::infinite_analytic) return;

  // exact dephasing density evolution
  SourceSpec source =
      detail::make_source(cfg.density_initial, cfg.n, origin);
  MatrixXc rho0 = source.psi0 * source.psi0.adjoint();
  DephasingOptions dopt;
  dopt.max_step = cfg.max_step;
  std::vector<double> positive_grid(grid.begin() + 1, grid.end());
  auto rhos = evolve_dephasing_density(chain, rho0, positive_grid, dopt);
  rhos.insert(rhos.begin(), {0.0, rho0});

  ArrayXXr diag(t_count, cfg.n);
  for (int ti = 0; ti < t_count; ++ti)
    for (int j = 0; j < cfg.n; ++j)
      diag(ti, j) = std::real(rhos[ti].rho(j, j));
  sink.write("density_diag.csv", detail::wide_csv(grid, diag.matrix()));
  sink.write("heatmap_density_diag.txt",
             heatmap_text_bytes(diag, grid, "density_diagonal"));
  sink.write("heatmap_density_diag.pgm", heatmap_pgm_bytes(diag));

  auto msd = msd_series(rhos, origin);
  auto mom = momentum_series(rhos);
  std::vector<std::vector<double>> obs;
  for (int ti = 0; ti < t_count; ++ti) {
    const double f = chain.noise_mode == NoiseMode::none
                         ? msd_f(0.0, grid[ti])
                         : msd_f(chain.gamma, grid[ti]);
    obs.push_back({grid[ti], msd.values[ti], mom.values[ti], f});
  }
  sink.write("observables.csv",
             csv_bytes({"t", "msd", "momentum", "msd_f_reference"}, obs));
}

inline void run_lindblad_experiment(const RunConfig& cfg, OutputSink& sink) {
  require(cfg.lb_n <= 5, "lindblad experiment: commutator norms need n <= 5");
  H0Spec h0 = cfg.lindblad_h0();
  double gamma = cfg.lb_gamma;
  const double h0_norm = h0.norm();
  if (cfg.lb_gamma_over_h0 > 0.0) gamma = cfg.lb_gamma_over_h0 * h0_norm;
  Superoperator gen = build_generator(h0, cfg.lindblad_kind(), gamma);

  const int b_site = detail::resolve_site(cfg.lb_b_site, cfg.lb_n, cfg.lb_n - 1);
  const int x_site = detail::resolve_site(cfg.lb_x_site, cfg.lb_n, 0);
  PauliOperatorRep b = PauliOperatorRep::single(cfg.lb_n, b_site, 3);

  const std::vector<double> grid = linear_time_grid(cfg.t_max, cfg.samples);
  auto series = lr_commutator_series(gen, b, grid, cfg.lb_probes);

  std::vector<std::vector<double>> rows;
  for (std::size_t ti = 0; ti < grid.size(); ++ti) {
    std::vector<double> row{grid[ti]};
    row.insert(row.end(), series[ti].begin(), series[ti].end());
    rows.push_back(std::move(row));
  }
  sink.write("lr_commutator.csv",
             csv_bytes(detail::site_columns(cfg.lb_n), rows));

  // envelope with C_B(j, 0) taken from the t = 0 commutators
  ChainSpec rspec;
  rspec.n = cfg.lb_n;
  rspec.boundary =
      cfg.lb_boundary == "ring" ? Boundary::ring : Boundary::open;
  MatrixXr r = build_hopping_matrix(rspec);
  VectorXr c0(cfg.lb_n);
  for (int j = 0; j < cfg.lb_n; ++j) c0[j] = series[0][j];
  LrBoundEnvelope env(gamma, h0_norm, r);

  bool dominated = true;
  double worst_ratio = 0.0;
  std::vector<std::vector<double>> bound_rows;
  for (std::size_t ti = 0; ti < grid.size(); ++ti) {
    const double rhs = env.value(x_site, grid[ti], c0);
    const double lhs = series[ti][x_site];
    bound_rows.push_back({grid[ti], lhs, rhs});
    for (int j = 0; j < cfg.lb_n; ++j) {
      const double rhs_j = env.value(j, grid[ti], c0);
      if (series[ti][j] > rhs_j + 1e-9) dominated = false;
      if (rhs_j > 0.0)
        worst_ratio = std::max(worst_ratio, series[ti][j] / rhs_j);
    }
  }
  sink.write("lr_bound.csv",
             csv_bytes({"t", "commutator_at_x", "bound_rhs_at_x"}, bound_rows));

  const double t_end = grid.back();
  const double delta = 1e-5 * std::max(1.0, t_end);
  const double slope = (env.log_value(x_site, t_end + delta, c0) -
                        env.log_value(x_site, t_end - delta, c0)) /
                       (2.0 * delta);
  nlohmann::json j;
  j["gamma"] = gamma;
  j["h0_norm"] = h0_norm;
  j["noise_kind"] = to_string(gen.kind);
  j["b_site"] = b_site + 1;
  j["x_site"] = x_site + 1;
  j["dominated"] = dominated;
  j["worst_ratio"] = worst_ratio;
  j["envelope_log_slope_at_t_max"] = slope;
  j["gamma_paper"] = 8.0 * gamma + 128.0 * h0_norm;
  j["gamma_derived"] = 8.0 * gamma - 128.0 * h0_norm;
  sink.write("lr_check.json", j.dump(2) + "\n");
}

inline void run_mixing_experiment(const RunConfig& cfg, OutputSink& sink) {
  H0Spec h0 = cfg.lindblad_h0();
  double gamma = cfg.lb_gamma;
  const double h0_norm = h0.norm();
  if (cfg.lb_gamma_over_h0 > 0.0) gamma = cfg.lb_gamma_over_h0 * h0_norm;
  Superoperator gen = build_generator(h0, cfg.lindblad_kind(), gamma);
  StructureMatrix f = build_structure_matrix(h0);
  RankConditionReport rank = rank_condition_report(f);
  RelaxationReport relax = relaxation_check(gen);

  nlohmann::json j;
  j["n"] = cfg.lb_n;
  j["h0"] = cfg.lb_h0;
  j["h0_norm"] = h0_norm;
  j["noise_kind"] = to_string(gen.kind);
  j["gamma"] = gamma;
  j["rank_condition"] = {
      {"rows", rank.rows},
      {"cols", rank.cols},
      {"rank", rank.rank},
      {"max_rank", rank.max_rank},
      {"full_rank", rank.full_rank},
      {"tolerance", rank.tolerance},
  };
  std::vector<double> top_sv;
  for (int i = 0; i < std::min<std::int64_t>(10, rank.singular_values.size());
       ++i)
    top_sv.push_back(rank.singular_values[i]);
  j["rank_condition"]["singular_values_top"] = top_sv;
  j["relaxation"] = {
      {"gap", relax.gap},
      {"kernel_dim", relax.kernel_dim},
      {"maximally_mixing", relax.maximally_mixing},
  };
  sink.write("mixing_report.json", j.dump(2) + "\n");

  if (f.f.rows() <= 256) {
    std::vector<std::string> cols;
    for (int i = 0; i < f.f.cols(); ++i)
      cols.push_back("b" + std::to_string(i));
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < f.f.rows(); ++i) {
      std::vector<double> row(f.f.cols());
      for (int k = 0; k < f.f.cols(); ++k) row[k] = f.f(i, k);
      rows.push_back(std::move(row));
    }
    sink.write("f_matrix.csv", csv_bytes(cols, rows));
  }
}

inline void run_bounds_experiment(const RunConfig& cfg, OutputSink& sink) {
  const std::vector<double> grid = linear_time_grid(cfg.t_max, cfg.samples);
  ChainSpec chain = cfg.chain_spec();
  ChainSpec rspec = chain;
  if (rspec.boundary == Boundary::infinite_analytic)
    rspec.boundary = Boundary::open;
  MatrixXr r = build_hopping_matrix(rspec);
  const int c_site = detail::resolve_site(cfg.bd_c_site, cfg.n, cfg.n - 1);
  const int x_site = detail::resolve_site(cfg.bd_x_site, cfg.n, 0);
  VectorXr c0 = VectorXr::Zero(cfg.n);
  c0[c_site] = 2.0;

  LrBoundEnvelope env(chain.gamma, cfg.bd_h0_norm, r);
  std::vector<std::vector<double>> rows;
  for (double t : grid) {
    rows.push_back({t, msd_f(chain.gamma, t),
                    variance_bound(cfg.bd_sep, chain.gamma, t),
                    chebyshev_radius(chain.gamma, t, cfg.bd_delta),
                    env.value(x_site, t, c0)});
  }
  sink.write(
      "bounds_curves.csv",
      csv_bytes({"t", "msd_f", "variance_bound", "chebyshev_radius",
                 "lr_envelope"},
                rows));

  RegimeReport regime =
      regime_classify(chain.gamma, cfg.bd_h0_norm, c0.sum(), cfg.bd_eps);
  nlohmann::json j;
  j["regime"] = to_string(regime.regime);
  j["gamma"] = regime.gamma;
  j["h0_norm"] = regime.h0_norm;
  j["threshold_16_h0"] = 16.0 * regime.h0_norm;
  j["gamma_paper"] = regime.gamma_paper;
  j["gamma_derived"] = regime.gamma_derived;
  j["t_eps_paper"] = regime.t_eps_paper;
  j["t_eps_derived"] = regime.t_eps_derived;
  j["kappa_eps"] = regime.kappa_eps;
  sink.write("regime.json", j.dump(2) + "\n");
}

inline void run_analyze_experiment(const RunConfig& cfg, OutputSink& sink) {
  const std::string bytes = read_file(cfg.an_input);
  detail::ParsedCsv csv = detail::parse_csv(bytes);
  require(!csv.rows.empty(), "analyze: input has no data rows");
  require(csv.columns.size() >= 2 && csv.columns[0] == "t",
          "analyze: first column must be t");
  std::vector<double> ts;
  for (const auto& row : csv.rows) ts.push_back(row[0]);

  ObservableSeries series;
  if (cfg.an_kind == "series") {
    series.name = csv.columns[1];
    series.source_id = cfg.an_input;
    for (const auto& row : csv.rows) {
      series.ts.push_back(row[0]);
      series.values.push_back(row[1]);
      series.stderrs.push_back(row.size() > 2 ? row[2] : 0.0);
    }
    series.validate();
  } else {
    const int n = static_cast<int>(csv.columns.size()) - 1;
    ArrayXXr field(csv.rows.size(), n);
    for (std::size_t i = 0; i < csv.rows.size(); ++i)
      for (int j = 0; j < n; ++j) field(static_cast<int>(i), j) = csv.rows[i][j + 1];
    int origin;
    if (cfg.an_origin_site > 0) {
      origin = detail::resolve_site(cfg.an_origin_site, n, 0);
    } else {
      field.row(0).maxCoeff(&origin);  // initial peak
    }
    const double peak0 = field.row(0).maxCoeff();
    require(peak0 > 0.0, "analyze: initial row is all zero");
    const double eps = cfg.an_eps_rel * peak0;
    series = front_radius(field, ts, origin, std::min(eps, 0.999999),
                          cfg.an_input);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < series.ts.size(); ++i)
      rows.push_back({series.ts[i], series.values[i]});
    sink.write("front_radius.csv", csv_bytes({"t", "front_radius"}, rows));
  }

  const double t_lo = cfg.an_fit_t_min;
  const double t_hi = cfg.an_fit_t_max > 0.0 ? cfg.an_fit_t_max : ts.back();
  nlohmann::json j;
  j["input"] = cfg.an_input;
  j["kind"] = cfg.an_kind;
  j["window"] = {t_lo, t_hi};
  try {
    ExponentFit fit = fit_exponent(series, t_lo, t_hi);
    j["status"] = "ok";
    j["alpha"] = fit.alpha;
    j["alpha_err"] = fit.alpha_err;
    j["r_squared"] = fit.r_squared;
    j["points"] = fit.points;
  } catch (const Error& e) {
    // saturated/localised data has no power law; report instead of fit
    j["status"] = "no-fit";
    j["reason"] = e.what();
  }
  sink.write("exponent_fit.json", j.dump(2) + "\n");
}

inline std::filesystem::path resolve_output_dir(const RunConfig& cfg) {
  if (!cfg.output.empty()) return cfg.output;
  if (const char* env = std::getenv("QCHAIN_OUTPUT_DIR")) return env;
  return "out";
}

// Dispatches one experiment, writes its outputs plus run.json, and returns
// the record. Identical config + seed give byte-identical numeric outputs.
inline RunRecord run(const RunConfig& cfg) {
  validate_config(cfg);
  RunRecord record;
  record.experiment = to_string(cfg.experiment);
  record.version = kVersion;
  record.seed = cfg.seed;
  record.config_echo = serialise_config(cfg);
  OutputSink sink(resolve_output_dir(cfg), record);
  const auto start = std::chrono::steady_clock::now();
  switch (cfg.experiment) {
    case Experiment::ensemble:
      run_ensemble_experiment(cfg, sink);
      break;
    case Experiment::exact:
      run_exact_experiment(cfg, sink);
      break;
    case Experiment::lindblad:
      run_lindblad_experiment(cfg, sink);
      break;
    case Experiment::bounds:
      run_bounds_experiment(cfg, sink);
      break;
    case Experiment::analyze:
      run_analyze_experiment(cfg, sink);
      break;
    case Experiment::mixing:
      run_mixing_experiment(cfg, sink);
      break;
  }
  record.wall_ms =
      std::chrono::duration<double, std::milli>(
          std::chrono::steady_clock::now() - start)
          .count();
  write_file(sink.dir() / "run.json", run_record_json(record));
  return record;
}

}  // namespace qchain
