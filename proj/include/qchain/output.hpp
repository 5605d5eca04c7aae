#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qchain/common.hpp"

namespace qchain {

namespace detail {

inline std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline void write_file(const std::filesystem::path& path,
                       const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot open for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  require(out.good(), "write failed: " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// CSV with a documented header row; first column is always t.
inline std::string csv_bytes(const std::vector<std::string>& columns,
                             const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    out += (i ? "," : "") + columns[i];
  }
  out += "\n";
  for (const auto& row : rows) {
    require(row.size() == columns.size(), "csv: ragged row");
    for (std::size_t i = 0; i < row.size(); ++i) {
      out += (i ? "," : "") + detail::format_g17(row[i]);
    }
    out += "\n";
  }
  return out;
}

// Plain-text matrix: one header line, then rows = time ascending downward,
// columns = site.
inline std::string heatmap_text_bytes(const ArrayXXr& field,
                                      const std::vector<double>& ts,
                                      const std::string& label) {
  require(static_cast<int>(ts.size()) == field.rows(),
          "heatmap: time axis mismatch");
  std::string out = "# " + label + " rows=" + std::to_string(field.rows()) +
                    " cols=" + std::to_string(field.cols()) +
                    " t_min=" + detail::format_g17(ts.front()) +
                    " t_max=" + detail::format_g17(ts.back()) +
                    " (rows: time ascending; cols: site)\n";
  for (int r = 0; r < field.rows(); ++r) {
    for (int c = 0; c < field.cols(); ++c) {
      if (c) out += " ";
      out += detail::format_g17(field(r, c));
    }
    out += "\n";
  }
  return out;
}

// 8-bit binary portable graymap; [0, max] maps linearly to [255, 0]
// (white background, black peak). An all-zero field is all white.
inline std::string heatmap_pgm_bytes(const ArrayXXr& field) {
  require(field.isFinite().all(), "heatmap: NaN/Inf entries");
  require((field >= 0.0).all(), "heatmap: negative entries");
  const double peak = field.maxCoeff();
  std::string out = "P5\n" + std::to_string(field.cols()) + " " +
                    std::to_string(field.rows()) + "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(field.size()));
  for (int r = 0; r < field.rows(); ++r)
    for (int c = 0; c < field.cols(); ++c) {
      const double v = peak > 0.0 ? field(r, c) / peak : 0.0;
      const int px = 255 - static_cast<int>(std::lround(255.0 * v));
      out.push_back(static_cast<char>(px));
    }
  return out;
}

// Everything needed to reproduce one run bit-for-bit.
struct RunRecord {
  std::string experiment;
  std::string version;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;
  std::string config_echo;
  std::map<std::string, std::string> output_checksums;  // file -> fnv1a64 hex
};

inline std::string run_record_json(const RunRecord& rec) {
  nlohmann::json j;
  j["experiment"] = rec.experiment;
  j["version"] = rec.version;
  j["seed"] = rec.seed;
  j["wall_ms"] = rec.wall_ms;
  j["config"] = rec.config_echo;
  j["outputs"] = rec.output_checksums;
  return j.dump(2) + "\n";
}

// Collects output files for one run directory and fills the record's
// checksum table as they are written.
class OutputSink {
 public:
  OutputSink(std::filesystem::path dir, RunRecord& record)
      : dir_(std::move(dir)), record_(record) {
    std::filesystem::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& bytes) {
    write_file(dir_ / name, bytes);
    char hex[24];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    record_.output_checksums[name] = hex;
  }

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  RunRecord& record_;
};

}  // namespace qchain
