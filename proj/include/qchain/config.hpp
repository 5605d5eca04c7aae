#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qchain/chain.hpp"
#include "qchain/common.hpp"
#include "qchain/lindblad.hpp"

namespace qchain {

enum class Experiment { ensemble, exact, lindblad, bounds, analyze, mixing };

inline std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::ensemble: return "ensemble";
    case Experiment::exact: return "exact";
    case Experiment::lindblad: return "lindblad";
    case Experiment::bounds: return "bounds";
    case Experiment::analyze: return "analyze";
    case Experiment::mixing: return "mixing";
  }
  return "?";
}

// Fully validated run description. The file format is flat `key = value`
// lines under [section] headers; unknown sections or keys are errors.
struct RunConfig {
  // [run]
  Experiment experiment = Experiment::ensemble;
  std::uint64_t seed = 1;
  std::string output = "";  // empty: QCHAIN_OUTPUT_DIR or ./out
  int threads = 0;

  // [chain]
  int n = 50;
  std::string boundary = "open";  // open | ring | infinite
  double gamma = 0.1;
  std::string noise = "dynamic";  // dynamic | static | none
  double static_width = 1.0;

  // [time]
  double dt = 0.01;
  double t_max = 25.0;
  int samples = 126;

  // [ensemble]
  int trajectories = 2000;
  int source_site = 1;            // 1-based; 0 = center
  std::string initial = "site";   // site | wavepacket

  // [density]
  double max_step = 0.005;
  int density_source_site = 0;    // 1-based; 0 = center
  std::string density_initial = "site";

  // [lindblad]
  int lb_n = 4;
  std::string lb_h0 = "xx";  // xx | heisenberg | tilted | custom
  std::vector<double> lb_h0_bond;  // 16 values for h0 = custom
  std::string lb_boundary = "open";  // open | ring
  std::string lb_noise_kind = "isotropic";  // isotropic | z-only
  double lb_gamma = 0.3;
  double lb_gamma_over_h0 = 0.0;  // > 0: gamma = value * ||H0||
  int lb_b_site = 0;              // 1-based; 0 = last site
  int lb_x_site = 1;
  int lb_probes = 20;

  // [bounds]
  double bd_h0_norm = 1.0;
  double bd_eps = 1e-3;
  double bd_delta = 0.04;
  int bd_sep = 10;
  int bd_c_site = 0;  // 1-based; 0 = last site
  int bd_x_site = 1;

  // [analyze]
  std::string an_input;
  std::string an_kind = "field";  // field | series
  int an_origin_site = 0;           // 1-based; 0 = center
  double an_eps_rel = 1e-3;
  double an_fit_t_min = 3.0;
  double an_fit_t_max = 0.0;  // 0 = end of data

  ChainSpec chain_spec() const {
    ChainSpec spec;
    spec.n = n;
    if (boundary == "open") spec.boundary = Boundary::open;
    else if (boundary == "ring") spec.boundary = Boundary::ring;
    else spec.boundary = Boundary::infinite_analytic;
    spec.gamma = gamma;
    if (noise == "dynamic") spec.noise_mode = NoiseMode::dynamic;
    else if (noise == "static") spec.noise_mode = NoiseMode::static_;
    else spec.noise_mode = NoiseMode::none;
    spec.static_width = static_width;
    return spec;
  }

  H0Spec lindblad_h0() const {
    const bool ring = (lb_boundary == "ring");
    if (lb_h0 == "xx") return H0Spec::xx(lb_n, ring);
    if (lb_h0 == "heisenberg") return H0Spec::heisenberg(lb_n, ring);
    if (lb_h0 == "tilted") {
      // xx plus symmetry-breaking local fields folded into the bonds
      H0Spec spec = H0Spec::xx(lb_n, ring);
      for (auto& b : spec.bonds) {
        b[1 * 4 + 0] += 0.4;
        b[3 * 4 + 0] += 0.7;
      }
      if (!ring) {
        spec.bonds.back()[0 * 4 + 1] += 0.3;
        spec.bonds.back()[0 * 4 + 3] += 0.5;
      }
      return spec;
    }
    std::array<double, 16> bond{};
    for (int i = 0; i < 16; ++i) bond[i] = lb_h0_bond[i];
    return H0Spec::uniform(lb_n, bond, ring);
  }

  NoiseKind lindblad_kind() const {
    return lb_noise_kind == "isotropic" ? NoiseKind::isotropic
                                        : NoiseKind::z_only;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

struct ConfigValue {
  std::string section, key, raw;
  int line = 0;
};

inline double parse_double(const ConfigValue& v) {
  std::size_t pos = 0;
  double out;
  try {
    out = std::stod(v.raw, &pos);
  } catch (const std::exception&) {
    throw Error("config: " + v.section + "." + v.key + ": expected a number, got '" +
                v.raw + "'");
  }
  if (pos != v.raw.size())
    throw Error("config: " + v.section + "." + v.key + ": trailing characters in '" +
                v.raw + "'");
  return out;
}

inline std::int64_t parse_int(const ConfigValue& v) {
  std::size_t pos = 0;
  std::int64_t out;
  try {
    out = std::stoll(v.raw, &pos);
  } catch (const std::exception&) {
    throw Error("config: " + v.section + "." + v.key + ": expected an integer, got '" +
                v.raw + "'");
  }
  if (pos != v.raw.size())
    throw Error("config: " + v.section + "." + v.key + ": trailing characters in '" +
                v.raw + "'");
  return out;
}

inline std::uint64_t parse_uint(const ConfigValue& v) {
  const std::int64_t out = parse_int(v);
  if (out < 0)
    throw Error("config: " + v.section + "." + v.key + ": must be nonnegative");
  return static_cast<std::uint64_t>(out);
}

inline std::string parse_choice(const ConfigValue& v,
                                const std::vector<std::string>& allowed) {
  for (const auto& a : allowed)
    if (v.raw == a) return v.raw;
  std::string opts;
  for (const auto& a : allowed) opts += (opts.empty() ? "" : " | ") + a;
  throw Error("config: " + v.section + "." + v.key + ": '" + v.raw +
              "' is not one of " + opts);
}

inline std::vector<double> parse_double_list(const ConfigValue& v) {
  std::vector<double> out;
  std::stringstream ss(v.raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    ConfigValue one{v.section, v.key, item, v.line};
    out.push_back(parse_double(one));
  }
  return out;
}

}  // namespace detail

// Applies one key to the config; shared by the file parser and the CLI
// `--set section.key=value` overrides. Throws naming the key on any
// unknown key, type mismatch, or range violation.
inline void apply_config_value(RunConfig& cfg, const std::string& section,
                               const std::string& key,
                               const std::string& value) {
  using namespace detail;
  ConfigValue v{section, key, value, 0};
  auto range = [&](bool ok, const std::string& what) {
    if (!ok) throw Error("config: " + section + "." + key + ": " + what);
  };

  if (section == "run") {
    if (key == "experiment") {
      const std::string s = parse_choice(
          v, {"ensemble", "exact", "lindblad", "bounds", "analyze", "mixing"});
      if (s == "ensemble") cfg.experiment = Experiment::ensemble;
      else if (s == "exact") cfg.experiment = Experiment::exact;
      else if (s == "lindblad") cfg.experiment = Experiment::lindblad;
      else if (s == "bounds") cfg.experiment = Experiment::bounds;
      else if (s == "analyze") cfg.experiment = Experiment::analyze;
      else cfg.experiment = Experiment::mixing;
    } else if (key == "seed") {
      cfg.seed = parse_uint(v);
    } else if (key == "output") {
      cfg.output = value;
    } else if (key == "threads") {
      cfg.threads = static_cast<int>(parse_int(v));
      range(cfg.threads >= 0, "threads must be >= 0");
    } else {
      throw Error("config: unknown key run." + key);
    }
  } else if (section == "chain") {
    if (key == "n") {
      cfg.n = static_cast<int>(parse_int(v));
      range(cfg.n >= 2 && cfg.n <= 100000, "n must be in [2, 100000]");
    } else if (key == "boundary") {
      cfg.boundary = parse_choice(v, {"open", "ring", "infinite"});
    } else if (key == "gamma") {
      cfg.gamma = parse_double(v);
      range(cfg.gamma >= 0.0, "gamma must be >= 0");
    } else if (key == "noise") {
      cfg.noise = parse_choice(v, {"dynamic", "static", "none"});
    } else if (key == "static_width") {
      cfg.static_width = parse_double(v);
      range(cfg.static_width >= 0.0, "static_width must be >= 0");
    } else {
      throw Error("config: unknown key chain." + key);
    }
  } else if (section == "time") {
    if (key == "dt") {
      cfg.dt = parse_double(v);
      range(cfg.dt > 0.0, "dt must be > 0");
    } else if (key == "t_max") {
      cfg.t_max = parse_double(v);
      range(cfg.t_max > 0.0, "t_max must be > 0");
    } else if (key == "samples") {
      cfg.samples = static_cast<int>(parse_int(v));
      range(cfg.samples >= 2 && cfg.samples <= 100000,
            "samples must be in [2, 100000]");
    } else {
      throw Error("config: unknown key time." + key);
    }
  } else if (section == "ensemble") {
    if (key == "trajectories") {
      cfg.trajectories = static_cast<int>(parse_int(v));
      range(cfg.trajectories >= 1 && cfg.trajectories <= 100'000'000,
            "trajectories must be in [1, 1e8]");
    } else if (key == "source_site") {
      cfg.source_site = static_cast<int>(parse_int(v));
      range(cfg.source_site >= 0, "source_site must be >= 0 (0 = center)");
    } else if (key == "initial") {
      cfg.initial = parse_choice(v, {"site", "wavepacket"});
    } else {
      throw Error("config: unknown key ensemble." + key);
    }
  } else if (section == "density") {
    if (key == "max_step") {
      cfg.max_step = parse_double(v);
      range(cfg.max_step > 0.0 && cfg.max_step <= 1.0,
            "max_step must be in (0, 1]");
    } else if (key == "source_site") {
      cfg.density_source_site = static_cast<int>(parse_int(v));
      range(cfg.density_source_site >= 0,
            "source_site must be >= 0 (0 = center)");
    } else if (key == "initial") {
      cfg.density_initial = parse_choice(v, {"site", "wavepacket"});
    } else {
      throw Error("config: unknown key density." + key);
    }
  } else if (section == "lindblad") {
    if (key == "n") {
      cfg.lb_n = static_cast<int>(parse_int(v));
      range(cfg.lb_n >= 1 && cfg.lb_n <= 6, "n must be in [1, 6] for lindblad");
    } else if (key == "h0") {
      cfg.lb_h0 = parse_choice(v, {"xx", "heisenberg", "tilted", "custom"});
    } else if (key == "h0_bond") {
      cfg.lb_h0_bond = parse_double_list(v);
      range(cfg.lb_h0_bond.size() == 16,
            "h0_bond needs exactly 16 comma-separated values");
    } else if (key == "boundary") {
      cfg.lb_boundary = parse_choice(v, {"open", "ring"});
    } else if (key == "noise_kind") {
      cfg.lb_noise_kind = parse_choice(v, {"isotropic", "z-only"});
    } else if (key == "gamma") {
      cfg.lb_gamma = parse_double(v);
      range(cfg.lb_gamma >= 0.0, "gamma must be >= 0");
    } else if (key == "gamma_over_h0") {
      cfg.lb_gamma_over_h0 = parse_double(v);
      range(cfg.lb_gamma_over_h0 >= 0.0, "gamma_over_h0 must be >= 0");
    } else if (key == "b_site") {
      cfg.lb_b_site = static_cast<int>(parse_int(v));
      range(cfg.lb_b_site >= 0, "b_site must be >= 0 (0 = last site)");
    } else if (key == "x_site") {
      cfg.lb_x_site = static_cast<int>(parse_int(v));
      range(cfg.lb_x_site >= 1, "x_site must be >= 1");
    } else if (key == "probes") {
      cfg.lb_probes = static_cast<int>(parse_int(v));
      range(cfg.lb_probes >= 0 && cfg.lb_probes <= 10000,
            "probes must be in [0, 10000]");
    } else {
      throw Error("config: unknown key lindblad." + key);
    }
  } else if (section == "bounds") {
    if (key == "h0_norm") {
      cfg.bd_h0_norm = parse_double(v);
      range(cfg.bd_h0_norm > 0.0, "h0_norm must be > 0");
    } else if (key == "eps") {
      cfg.bd_eps = parse_double(v);
      range(cfg.bd_eps > 0.0 && cfg.bd_eps < 1.0, "eps must be in (0, 1)");
    } else if (key == "delta") {
      cfg.bd_delta = parse_double(v);
      range(cfg.bd_delta > 0.0 && cfg.bd_delta <= 1.0,
            "delta must be in (0, 1]");
    } else if (key == "sep") {
      cfg.bd_sep = static_cast<int>(parse_int(v));
    } else if (key == "c_site") {
      cfg.bd_c_site = static_cast<int>(parse_int(v));
      range(cfg.bd_c_site >= 0, "c_site must be >= 0 (0 = last site)");
    } else if (key == "x_site") {
      cfg.bd_x_site = static_cast<int>(parse_int(v));
      range(cfg.bd_x_site >= 1, "x_site must be >= 1");
    } else {
      throw Error("config: unknown key bounds." + key);
    }
  } else if (section == "analyze") {
    if (key == "input") {
      cfg.an_input = value;
    } else if (key == "kind") {
      cfg.an_kind = parse_choice(v, {"field", "series"});
    } else if (key == "origin_site") {
      cfg.an_origin_site = static_cast<int>(parse_int(v));
      range(cfg.an_origin_site >= 0, "origin_site must be >= 0 (0 = center)");
    } else if (key == "eps_rel") {
      cfg.an_eps_rel = parse_double(v);
      range(cfg.an_eps_rel > 0.0 && cfg.an_eps_rel < 1.0,
            "eps_rel must be in (0, 1)");
    } else if (key == "fit_t_min") {
      cfg.an_fit_t_min = parse_double(v);
      range(cfg.an_fit_t_min >= 0.0, "fit_t_min must be >= 0");
    } else if (key == "fit_t_max") {
      cfg.an_fit_t_max = parse_double(v);
      range(cfg.an_fit_t_max >= 0.0, "fit_t_max must be >= 0");
    } else {
      throw Error("config: unknown key analyze." + key);
    }
  } else {
    throw Error("config: unknown section [" + section + "]");
  }
}

// Cross-field checks that single keys cannot see.
inline void validate_config(const RunConfig& cfg) {
  if (cfg.experiment == Experiment::lindblad ||
      cfg.experiment == Experiment::mixing) {
    if (cfg.lb_h0 == "custom" && cfg.lb_h0_bond.size() != 16)
      throw Error("config: lindblad.h0 = custom requires lindblad.h0_bond");
    if (cfg.lb_n > 6)
      throw Error("config: lindblad.n: n must be <= 6 for lindblad");
    if (cfg.experiment == Experiment::mixing && cfg.lb_n > 5)
      throw Error("config: lindblad.n: n must be <= 5 for mixing analysis");
    if (cfg.lb_x_site > cfg.lb_n)
      throw Error("config: lindblad.x_site: beyond chain end");
    if (cfg.lb_b_site > cfg.lb_n)
      throw Error("config: lindblad.b_site: beyond chain end");
  }
  if (cfg.experiment == Experiment::ensemble ||
      cfg.experiment == Experiment::exact) {
    if (cfg.boundary == "infinite" && cfg.experiment == Experiment::ensemble)
      throw Error(
          "config: chain.boundary: ensemble needs a finite chain (open|ring)");
    if (cfg.source_site > cfg.n)
      throw Error("config: ensemble.source_site: beyond chain end");
    if (cfg.density_source_site > cfg.n)
      throw Error("config: density.source_site: beyond chain end");
    const double steps = cfg.t_max / cfg.dt;
    if (steps > 5e7) throw Error("config: time.dt: more than 5e7 steps");
  }
  if (cfg.experiment == Experiment::analyze && cfg.an_input.empty())
    throw Error("config: analyze.input is required");
}

inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw Error("config: line " + std::to_string(lineno) +
                    ": malformed section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("config: line " + std::to_string(lineno) +
                  ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (section.empty())
      throw Error("config: line " + std::to_string(lineno) +
                  ": key outside any [section]");
    apply_config_value(cfg, section, key, value);
  }
  validate_config(cfg);
  return cfg;
}

inline std::string serialise_config(const RunConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "[run]\n";
  out << "experiment = " << to_string(c.experiment) << "\n";
  out << "seed = " << c.seed << "\n";
  if (!c.output.empty()) out << "output = " << c.output << "\n";
  out << "threads = " << c.threads << "\n";
  out << "\n[chain]\n";
  out << "n = " << c.n << "\n";
  out << "boundary = " << c.boundary << "\n";
  out << "gamma = " << c.gamma << "\n";
  out << "noise = " << c.noise << "\n";
  out << "static_width = " << c.static_width << "\n";
  out << "\n[time]\n";
  out << "dt = " << c.dt << "\n";
  out << "t_max = " << c.t_max << "\n";
  out << "samples = " << c.samples << "\n";
  out << "\n[ensemble]\n";
  out << "trajectories = " << c.trajectories << "\n";
  out << "source_site = " << c.source_site << "\n";
  out << "initial = " << c.initial << "\n";
  out << "\n[density]\n";
  out << "max_step = " << c.max_step << "\n";
  out << "source_site = " << c.density_source_site << "\n";
  out << "initial = " << c.density_initial << "\n";
  out << "\n[lindblad]\n";
  out << "n = " << c.lb_n << "\n";
  out << "h0 = " << c.lb_h0 << "\n";
  if (!c.lb_h0_bond.empty()) {
    out << "h0_bond = ";
    for (std::size_t i = 0; i < c.lb_h0_bond.size(); ++i)
      out << (i ? "," : "") << c.lb_h0_bond[i];
    out << "\n";
  }
  out << "boundary = " << c.lb_boundary << "\n";
  out << "noise_kind = " << c.lb_noise_kind << "\n";
  out << "gamma = " << c.lb_gamma << "\n";
  out << "gamma_over_h0 = " << c.lb_gamma_over_h0 << "\n";
  out << "b_site = " << c.lb_b_site << "\n";
  out << "x_site = " << c.lb_x_site << "\n";
  out << "probes = " << c.lb_probes << "\n";
  out << "\n[bounds]\n";
  out << "h0_norm = " << c.bd_h0_norm << "\n";
  out << "eps = " << c.bd_eps << "\n";
  out << "delta = " << c.bd_delta << "\n";
  out << "sep = " << c.bd_sep << "\n";
  out << "c_site = " << c.bd_c_site << "\n";
  out << "x_site = " << c.bd_x_site << "\n";
  out << "\n[analyze]\n";
  if (!c.an_input.empty()) out << "input = " << c.an_input << "\n";
  out << "kind = " << c.an_kind << "\n";
  out << "origin_site = " << c.an_origin_site << "\n";
  out << "eps_rel = " << c.an_eps_rel << "\n";
  out << "fit_t_min = " << c.an_fit_t_min << "\n";
  out << "fit_t_max = " << c.an_fit_t_max << "\n";
  return out.str();
}

}  // namespace qchain
