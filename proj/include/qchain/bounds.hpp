#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qchain/common.hpp"

namespace qchain {

// <x^2>(t) = 2t/gamma + (e^{-2 gamma t} - 1)/gamma^2 for a particle released
// at one site. Small 2*gamma*t switches to the series
// 2t^2 (1 - x/3 + x^2/12 - x^3/60 + x^4/360), x = 2 gamma t, to avoid
// cancellation; gamma = 0 is the ballistic limit 2t^2.
inline double msd_f(double gamma, double t) {
  require(gamma >= 0.0, "msd_f: gamma must be >= 0");
  require(t >= 0.0, "msd_f: t must be >= 0");
  const double x = 2.0 * gamma * t;
  if (x < 2e-4) {
    return 2.0 * t * t *
           (1.0 - x / 3.0 + x * x / 12.0 - x * x * x / 60.0 +
            x * x * x * x / 360.0);
  }
  return (x + std::expm1(-x)) / (gamma * gamma);
}

// min{1, f(gamma,t)/sep^2}; sep = 0 returns the trivial bound 1.
inline double variance_bound(int sep, double gamma, double t) {
  if (sep == 0) return 1.0;
  const double f = msd_f(gamma, t);
  const double s2 = static_cast<double>(sep) * sep;
  return std::min(1.0, f / s2);
}

// kappa sqrt(f) with kappa = 1/sqrt(delta): excursion probability beyond
// the radius is at most delta.
inline double chebyshev_radius(double gamma, double t, double delta) {
  require(delta > 0.0 && delta <= 1.0, "chebyshev_radius: delta in (0,1]");
  return std::sqrt(msd_f(gamma, t) / delta);
}

// Right-hand side of the fluctuating-disorder Lieb-Robinson bound,
//   e^{-8(gamma - 8||H0||)t} sum_j (e^{32||H0|| R t})_{x,j} C_B(j,0),
// evaluated from the eigendecomposition of R with the dominant exponent
// factored out so large arguments do not overflow prematurely.
class LrBoundEnvelope {
 public:
  LrBoundEnvelope(double gamma, double h0_norm, MatrixXr r)
      : gamma_(gamma), h0_norm_(h0_norm) {
    require(gamma >= 0.0, "lr_bound: gamma must be >= 0");
    require(h0_norm >= 0.0, "lr_bound: h0_norm must be >= 0");
    Eigen::SelfAdjointEigenSolver<MatrixXr> es(r);
    modes_ = es.eigenvectors();
    lambda_ = es.eigenvalues();
    lambda_max_ = lambda_.maxCoeff();
  }

  int n() const { return static_cast<int>(lambda_.size()); }

  double value(int x, double t, const VectorXr& c0) const {
    require(t >= 0.0, "lr_bound: t must be >= 0");
    require(c0.size() == lambda_.size(), "lr_bound: c0 has wrong length");
    require(c0.minCoeff() >= 0.0, "lr_bound: c0 must be nonnegative");
    require(x >= 0 && x < n(), "lr_bound: site out of range");
    const double a = 32.0 * h0_norm_ * t;
    double sum = 0.0;
    for (int q = 0; q < n(); ++q) {
      const double mode_weight = modes_(x, q) * modes_.col(q).dot(c0);
      sum += mode_weight * std::exp(a * (lambda_[q] - lambda_max_));
    }
    sum = std::max(sum, 0.0);  // roundoff guard; exact value is >= 0
    const double exponent = -8.0 * (gamma_ - 8.0 * h0_norm_) * t + a * lambda_max_;
    return sum * std::exp(exponent);
  }

  // log of the envelope, finite even where exp() would overflow
  double log_value(int x, double t, const VectorXr& c0) const {
    const double a = 32.0 * h0_norm_ * t;
    double sum = 0.0;
    for (int q = 0; q < n(); ++q) {
      const double mode_weight = modes_(x, q) * modes_.col(q).dot(c0);
      sum += mode_weight * std::exp(a * (lambda_[q] - lambda_max_));
    }
    if (sum <= 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(sum) - 8.0 * (gamma_ - 8.0 * h0_norm_) * t + a * lambda_max_;
  }

 private:
  double gamma_, h0_norm_;
  MatrixXr modes_;
  VectorXr lambda_;
  double lambda_max_ = 0.0;
};

inline double lr_bound_rhs(int x, double t, double gamma, double h0_norm,
                           const VectorXr& c0, const MatrixXr& r) {
  return LrBoundEnvelope(gamma, h0_norm, r).value(x, t, c0);
}

enum class Regime { ballistic_dominated, localised, threshold };

inline std::string to_string(Regime r) {
  switch (r) {
    case Regime::ballistic_dominated: return "ballistic-dominated";
    case Regime::localised: return "localised";
    case Regime::threshold: return "threshold";
  }
  return "?";
}

// Regime classification per the gamma vs 16||H0|| threshold. For the
// localised regime t_eps is reported with both decay rates: the printed
// Gamma = 8 gamma + 128||H0|| and the rate 8 gamma - 128||H0|| implied by
// the envelope itself with ||R|| = 2 (the envelope-slope test adjudicates).
struct RegimeReport {
  Regime regime = Regime::threshold;
  double gamma = 0.0, h0_norm = 0.0;
  double gamma_paper = 0.0;    // 8 gamma + 128 h
  double gamma_derived = 0.0;  // 8 gamma - 128 h
  double t_eps_paper = 0.0;
  double t_eps_derived = 0.0;
  double kappa_eps = 0.0;  // cone slope where the envelope falls below eps
};

namespace detail {

// log of e^{-8(gamma-8h)t} I_r(64 h t) c_total on the infinite chain.
inline double log_infinite_envelope(double r, double t, double gamma,
                                    double h, double c_total) {
  const double z = 64.0 * h * t;
  double log_bessel;
  if (z < 500.0) {
    const double b = std::cyl_bessel_i(r, z);
    log_bessel = b > 0.0 ? std::log(b) : -std::numeric_limits<double>::infinity();
  } else {
    // uniform asymptotic (Debye) expansion of log I_r(z)
    const double s = std::sqrt(r * r + z * z);
    log_bessel = s + r * std::log(z / (r + s)) - 0.5 * std::log(2.0 * M_PI * s);
  }
  return -8.0 * (gamma - 8.0 * h) * t + log_bessel + std::log(c_total);
}

}  // namespace detail

inline RegimeReport regime_classify(double gamma, double h0_norm,
                                    double c_total, double eps) {
  require(gamma > 0.0, "regime_classify: gamma must be > 0");
  require(h0_norm > 0.0, "regime_classify: h0_norm must be > 0");
  require(c_total > 0.0, "regime_classify: c_total must be > 0");
  require(eps > 0.0, "regime_classify: eps must be > 0");
  RegimeReport rep;
  rep.gamma = gamma;
  rep.h0_norm = h0_norm;
  rep.gamma_paper = 8.0 * gamma + 128.0 * h0_norm;
  rep.gamma_derived = 8.0 * gamma - 128.0 * h0_norm;
  const double threshold = 16.0 * h0_norm;
  if (std::abs(gamma - threshold) <= 1e-12 * std::max(1.0, threshold)) {
    rep.regime = Regime::threshold;
  } else if (gamma < threshold) {
    rep.regime = Regime::ballistic_dominated;
  } else {
    rep.regime = Regime::localised;
    rep.t_eps_paper = std::log(c_total / eps) / rep.gamma_paper;
    rep.t_eps_derived = std::log(c_total / eps) / rep.gamma_derived;
  }
  // kappa_eps: bisect the cone slope r/t at a reference time where the
  // infinite-chain envelope crosses eps
  const double t_ref = std::min(1.0, 4.0 / std::max(64.0 * h0_norm, 1.0));
  const double log_eps = std::log(eps);
  double lo = 0.0, hi = 4.0;
  while (detail::log_infinite_envelope(hi * t_ref, t_ref, gamma, h0_norm,
                                       c_total) > log_eps &&
         hi < 1e7)
    hi *= 2.0;
  if (detail::log_infinite_envelope(lo * t_ref, t_ref, gamma, h0_norm,
                                    c_total) <= log_eps) {
    rep.kappa_eps = 0.0;
  } else {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (detail::log_infinite_envelope(mid * t_ref, t_ref, gamma, h0_norm,
                                        c_total) > log_eps)
        lo = mid;
      else
        hi = mid;
    }
    rep.kappa_eps = 0.5 * (lo + hi);
  }
  return rep;
}

// A named analytic envelope sampled on a time grid; serialises to CSV.
struct BoundCurve {
  enum class Kind { lr_envelope, msd_f, variance_bound, chebyshev_radius };
  Kind kind;
  std::string label;
  std::vector<std::pair<double, double>> samples;
};

inline BoundCurve sample_msd_f(double gamma, const std::vector<double>& ts) {
  BoundCurve c{BoundCurve::Kind::msd_f, "msd_f", {}};
  for (double t : ts) c.samples.emplace_back(t, msd_f(gamma, t));
  return c;
}

inline BoundCurve sample_variance_bound(int sep, double gamma,
                                        const std::vector<double>& ts) {
  BoundCurve c{BoundCurve::Kind::variance_bound, "variance_bound", {}};
  for (double t : ts) c.samples.emplace_back(t, variance_bound(sep, gamma, t));
  return c;
}

inline BoundCurve sample_chebyshev_radius(double gamma, double delta,
                                          const std::vector<double>& ts) {
  BoundCurve c{BoundCurve::Kind::chebyshev_radius, "chebyshev_radius", {}};
  for (double t : ts) c.samples.emplace_back(t, chebyshev_radius(gamma, t, delta));
  return c;
}

inline BoundCurve sample_lr_envelope(int x, double gamma, double h0_norm,
                                     const VectorXr& c0, const MatrixXr& r,
                                     const std::vector<double>& ts) {
  LrBoundEnvelope env(gamma, h0_norm, r);
  BoundCurve c{BoundCurve::Kind::lr_envelope, "lr_envelope", {}};
  for (double t : ts) c.samples.emplace_back(t, env.value(x, t, c0));
  return c;
}

}  // namespace qchain
