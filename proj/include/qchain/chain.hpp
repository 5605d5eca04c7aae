#pragma once

#include <cstdint>
#include <string>

#include "qchain/common.hpp"
#include "qchain/rng.hpp"

namespace qchain {

enum class Boundary { open, ring, infinite_analytic };
enum class NoiseMode { dynamic, static_, none };

inline std::string to_string(Boundary b) {
  switch (b) {
    case Boundary::open: return "open";
    case Boundary::ring: return "ring";
    case Boundary::infinite_analytic: return "infinite";
  }
  return "?";
}

inline std::string to_string(NoiseMode m) {
  switch (m) {
    case NoiseMode::dynamic: return "dynamic";
    case NoiseMode::static_: return "static";
    case NoiseMode::none: return "none";
  }
  return "?";
}

// Chain geometry and noise model. gamma is normalised as the amplitude
// decay rate of the averaged correlations: per-step phase variance is
// 2*gamma*dt, so E[exp(-i phi)] = exp(-gamma dt) and the averaged
// propagator is exp(-gamma t) exp(-iRt). Hopping amplitude is fixed to 1.
struct ChainSpec {
  int n = 2;
  Boundary boundary = Boundary::open;
  double gamma = 0.0;
  NoiseMode noise_mode = NoiseMode::dynamic;
  double static_width = 1.0;  // W: rms of the quenched field, static mode

  void validate() const {
    if (boundary != Boundary::infinite_analytic)
      require(n >= 2, "ChainSpec: n must be >= 2 for open/ring boundaries");
    else
      require(n >= 1, "ChainSpec: n must be >= 1");
    require(gamma >= 0.0, "ChainSpec: gamma must be >= 0");
    require(static_width >= 0.0, "ChainSpec: static_width must be >= 0");
  }
};

// One sampled disorder path: phases(s, j) is the field phase accumulated by
// site j during step s. Regenerating with the same spec is bit-identical.
struct NoiseRealization {
  RngStreamSpec stream;
  double dt = 0.0;
  int steps = 0;
  ArrayXXr phases;  // steps x n

  double t_max() const { return dt * steps; }
};

// R_{j,k} = delta_{j,k+1} + delta_{j+1,k}, plus corner entries on a ring.
inline MatrixXr build_hopping_matrix(const ChainSpec& spec) {
  spec.validate();
  require(spec.boundary != Boundary::infinite_analytic,
          "build_hopping_matrix: infinite-analytic boundary has no finite "
          "hopping matrix");
  const int n = spec.n;
  MatrixXr r = MatrixXr::Zero(n, n);
  for (int j = 0; j + 1 < n; ++j) {
    r(j, j + 1) = 1.0;
    r(j + 1, j) = 1.0;
  }
  if (spec.boundary == Boundary::ring && n > 2) {
    r(0, n - 1) = 1.0;
    r(n - 1, 0) = 1.0;
  }
  return r;
}

inline void sample_noise_path_into(const ChainSpec& spec,
                                   const RngStreamSpec& stream, double dt,
                                   int steps, NoiseRealization& out) {
  spec.validate();
  require(dt > 0.0, "sample_noise_path: dt must be > 0");
  require(steps >= 1, "sample_noise_path: steps must be >= 1");
  out.stream = stream;
  out.dt = dt;
  out.steps = steps;
  out.phases.resize(steps, spec.n);
  switch (spec.noise_mode) {
    case NoiseMode::none:
      out.phases.setZero();
      break;
    case NoiseMode::dynamic: {
      RngStream rng(stream);
      const double sigma = std::sqrt(2.0 * spec.gamma * dt);
      for (int s = 0; s < steps; ++s)
        for (int j = 0; j < spec.n; ++j) out.phases(s, j) = sigma * rng.normal();
      break;
    }
    case NoiseMode::static_: {
      RngStream rng(stream);
      for (int j = 0; j < spec.n; ++j) {
        const double xi = spec.static_width * rng.normal();
        out.phases.col(j).setConstant(xi * dt);
      }
      break;
    }
  }
}

inline NoiseRealization sample_noise_path(const ChainSpec& spec,
                                          const RngStreamSpec& stream,
                                          double dt, int steps) {
  NoiseRealization out;
  sample_noise_path_into(spec, stream, dt, steps, out);
  return out;
}

}  // namespace qchain
