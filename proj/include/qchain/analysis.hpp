#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "qchain/common.hpp"
#include "qchain/dephasing.hpp"
#include "qchain/ensemble.hpp"

namespace qchain {

struct ObservableSeries {
  std::string name;
  std::string source_id;
  std::vector<double> ts;
  std::vector<double> values;
  std::vector<double> stderrs;  // zeros when the source is exact

  void validate() const {
    require(ts.size() == values.size() && ts.size() == stderrs.size(),
            "ObservableSeries: ragged columns");
    for (std::size_t i = 1; i < ts.size(); ++i)
      require(ts[i] > ts[i - 1], "ObservableSeries: t must increase");
    for (double s : stderrs)
      require(s >= 0.0, "ObservableSeries: stderr must be >= 0");
  }
};

// sum_j (j - origin)^2 rho_{jj}(t) from an exact density sequence.
inline ObservableSeries msd_series(
    const std::vector<SingleParticleDensity>& rhos, int origin,
    const std::string& source_id = "exact") {
  require(!rhos.empty(), "msd_series: empty input");
  const int n = static_cast<int>(rhos.front().rho.rows());
  require(origin >= 0 && origin < n, "msd_series: origin out of range");
  ObservableSeries s{"msd", source_id, {}, {}, {}};
  for (const auto& snap : rhos) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const double d = j - origin;
      acc += d * d * std::real(snap.rho(j, j));
    }
    s.ts.push_back(snap.t);
    s.values.push_back(acc);
    s.stderrs.push_back(0.0);
  }
  s.validate();
  return s;
}

inline ObservableSeries msd_series(const EnsembleStats& stats, int source = 0,
                                   const std::string& source_id = "ensemble") {
  require(source >= 0 && source < static_cast<int>(stats.msd.size()),
          "msd_series: source index out of range");
  ObservableSeries s{"msd", source_id, stats.ts, {}, {}};
  s.values.assign(stats.msd[source].begin(), stats.msd[source].end());
  s.stderrs.assign(stats.msd_stderr[source].begin(),
                   stats.msd_stderr[source].end());
  s.validate();
  return s;
}

// tr(p rho) = -2 sum_j Im rho_{j,j+1}.
inline ObservableSeries momentum_series(
    const std::vector<SingleParticleDensity>& rhos,
    const std::string& source_id = "exact") {
  require(!rhos.empty(), "momentum_series: empty input");
  const int n = static_cast<int>(rhos.front().rho.rows());
  ObservableSeries s{"momentum", source_id, {}, {}, {}};
  for (const auto& snap : rhos) {
    double acc = 0.0;
    for (int j = 0; j + 1 < n; ++j)
      acc -= 2.0 * std::imag(snap.rho(j, j + 1));
    s.ts.push_back(snap.t);
    s.values.push_back(acc);
    s.stderrs.push_back(0.0);
  }
  s.validate();
  return s;
}

inline ObservableSeries momentum_series(const EnsembleStats& stats,
                                        int source = 0,
                                        const std::string& source_id =
                                            "ensemble") {
  require(source >= 0 && source < static_cast<int>(stats.momentum.size()),
          "momentum_series: source index out of range");
  ObservableSeries s{"momentum", source_id, stats.ts, {}, {}};
  s.values.assign(stats.momentum[source].begin(),
                  stats.momentum[source].end());
  s.stderrs.assign(stats.momentum_stderr[source].begin(),
                   stats.momentum_stderr[source].end());
  s.validate();
  return s;
}

// Largest |j - origin| whose field value reaches eps; 0 when none does.
// field is (time, site) and must be nonnegative (|c| or rho_jj).
inline ObservableSeries front_radius(const ArrayXXr& field,
                                     const std::vector<double>& ts, int origin,
                                     double eps,
                                     const std::string& source_id = "field") {
  require(eps > 0.0 && eps < 1.0, "front_radius: eps must be in (0,1)");
  require(static_cast<int>(ts.size()) == field.rows(),
          "front_radius: time axis mismatch");
  const int n = static_cast<int>(field.cols());
  require(origin >= 0 && origin < n, "front_radius: origin out of range");
  require(field.isFinite().all(), "front_radius: field has NaN/Inf entries");
  require((field >= 0.0).all(), "front_radius: field must be nonnegative");
  ObservableSeries s{"front_radius", source_id, {}, {}, {}};
  for (int ti = 0; ti < field.rows(); ++ti) {
    int radius = 0;
    for (int j = 0; j < n; ++j)
      if (field(ti, j) >= eps) radius = std::max(radius, std::abs(j - origin));
    s.ts.push_back(ts[ti]);
    s.values.push_back(radius);
    s.stderrs.push_back(0.0);
  }
  s.validate();
  return s;
}

// Power-law fit radius ~ t^alpha by least squares on log-log samples
// inside the window.
struct ExponentFit {
  double alpha = 0.0;
  double alpha_err = 0.0;
  double t_min = 0.0, t_max = 0.0;
  double r_squared = 0.0;
  int points = 0;
};

inline ExponentFit fit_exponent(const ObservableSeries& series, double t_min,
                                double t_max) {
  series.validate();
  require(t_max > t_min, "fit_exponent: empty window");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < series.ts.size(); ++i) {
    const double t = series.ts[i];
    if (t < t_min || t > t_max) continue;
    require(t > 0.0, "fit_exponent: window must be at positive times");
    require(series.values[i] > 0.0,
            "fit_exponent: zero values in window (saturated or localised "
            "regime; report instead of fit)");
    xs.push_back(std::log(t));
    ys.push_back(std::log(series.values[i]));
  }
  const int m = static_cast<int>(xs.size());
  require(m >= 8, "fit_exponent: need at least 8 samples in window");
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < m; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < m; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  require(sxx > 0.0, "fit_exponent: degenerate time window");
  ExponentFit fit;
  fit.alpha = sxy / sxx;
  fit.t_min = t_min;
  fit.t_max = t_max;
  fit.points = m;
  const double intercept = my - fit.alpha * mx;
  double ss_res = 0.0;
  for (int i = 0; i < m; ++i) {
    const double r = ys[i] - (intercept + fit.alpha * xs[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  if (m > 2) fit.alpha_err = std::sqrt(ss_res / (m - 2) / sxx);
  return fit;
}

}  // namespace qchain
