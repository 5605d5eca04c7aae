#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "qchain/config.hpp"
#include "qchain/output.hpp"
#include "qchain/runner.hpp"

using namespace qchain;
namespace fs = std::filesystem;

namespace {

std::string catch_message(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("qchain_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

}  // namespace

TEST_CASE("minimal ensemble config parses", "[io]") {
  const std::string text = R"(
[run]
experiment = ensemble
seed = 42

[chain]
n = 50
gamma = 0.1

[ensemble]
trajectories = 2000
)";
  RunConfig cfg = parse_config(text);
  REQUIRE(cfg.experiment == Experiment::ensemble);
  REQUIRE(cfg.n == 50);
  REQUIRE(cfg.gamma == 0.1);
  REQUIRE(cfg.trajectories == 2000);
  REQUIRE(cfg.seed == 42);
}

TEST_CASE("errors name the offending key", "[io]") {
  const std::string neg = catch_message(
      []() { parse_config("[chain]\ngamma = -1\n"); });
  REQUIRE(neg.find("gamma") != std::string::npos);

  const std::string cap = catch_message([]() {
    parse_config("[run]\nexperiment = lindblad\n[lindblad]\nn = 8\n");
  });
  REQUIRE(cap.find("lindblad") != std::string::npos);
  REQUIRE(cap.find("n") != std::string::npos);

  const std::string unknown = catch_message(
      []() { parse_config("[chain]\nhopping = 2\n"); });
  REQUIRE(unknown.find("hopping") != std::string::npos);

  const std::string section = catch_message(
      []() { parse_config("[quantum]\nn = 2\n"); });
  REQUIRE(section.find("quantum") != std::string::npos);

  const std::string type = catch_message(
      []() { parse_config("[chain]\nn = soon\n"); });
  REQUIRE(type.find("n") != std::string::npos);
}

TEST_CASE("config round trip", "[io]") {
  RunConfig cfg;
  cfg.experiment = Experiment::bounds;
  cfg.n = 13;
  cfg.gamma = 0.375;
  cfg.boundary = "ring";
  cfg.noise = "static";
  cfg.samples = 17;
  cfg.bd_sep = 4;
  cfg.lb_h0 = "heisenberg";
  cfg.seed = 987654321;
  RunConfig back = parse_config(serialise_config(cfg));
  REQUIRE(serialise_config(back) == serialise_config(cfg));
}

TEST_CASE("csv schema", "[io]") {
  const std::string bytes =
      csv_bytes({"t", "a", "b"}, {{0.0, 1.5, -2.0}, {0.5, 0.25, 1e-17}});
  REQUIRE(bytes.substr(0, 6) == "t,a,b\n");
  auto parsed = detail::parse_csv(bytes);
  REQUIRE(parsed.columns == std::vector<std::string>{"t", "a", "b"});
  REQUIRE(parsed.rows.size() == 2);
  REQUIRE(parsed.rows[1][2] == 1e-17);  // %.17g survives a round trip
}

TEST_CASE("heatmap text format", "[io]") {
  ArrayXXr field(2, 3);
  field << 0.0, 0.5, 1.0, 0.25, 0.75, 0.125;
  const std::string bytes = heatmap_text_bytes(field, {0.0, 1.0}, "demo");
  REQUIRE(bytes.front() == '#');
  const auto lines = std::count(bytes.begin(), bytes.end(), '\n');
  REQUIRE(lines == 3);  // header + 2 rows
}

TEST_CASE("pgm mapping endpoints", "[io]") {
  ArrayXXr zero(1, 1);
  zero << 0.0;
  std::string bytes = heatmap_pgm_bytes(zero);
  REQUIRE(bytes.substr(0, 3) == "P5\n");
  REQUIRE(static_cast<unsigned char>(bytes.back()) == 255);  // white

  ArrayXXr constant(2, 2);
  constant.setConstant(3.7);
  bytes = heatmap_pgm_bytes(constant);
  for (int i = 0; i < 4; ++i)
    REQUIRE(static_cast<unsigned char>(bytes[bytes.size() - 1 - i]) == 0);

  ArrayXXr nan_field(1, 1);
  nan_field << std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(heatmap_pgm_bytes(nan_field), Error);
}

TEST_CASE("fnv1a64 test vector", "[io]") {
  REQUIRE(fnv1a64("abc") == 0xe71fa2190541574bull);
}

TEST_CASE("bounds run writes curves and regime", "[io]") {
  TempDir tmp;
  RunConfig cfg;
  cfg.experiment = Experiment::bounds;
  cfg.n = 6;
  cfg.gamma = 20.0;
  cfg.t_max = 1.0;
  cfg.samples = 11;
  cfg.output = (tmp.path / "bounds").string();
  RunRecord rec = run(cfg);
  REQUIRE(rec.output_checksums.count("bounds_curves.csv") == 1);
  REQUIRE(rec.output_checksums.count("regime.json") == 1);
  REQUIRE(fs::exists(tmp.path / "bounds" / "run.json"));
  auto parsed = detail::parse_csv(read_file(tmp.path / "bounds" /
                                            "bounds_curves.csv"));
  REQUIRE(parsed.columns.front() == "t");
  REQUIRE(parsed.rows.size() == 11);
}

TEST_CASE("identical runs produce identical checksums", "[io]") {
  TempDir tmp;
  RunConfig cfg;
  cfg.experiment = Experiment::ensemble;
  cfg.n = 8;
  cfg.gamma = 0.3;
  cfg.t_max = 1.0;
  cfg.samples = 6;
  cfg.trajectories = 40;
  cfg.seed = 2024;
  cfg.output = (tmp.path / "a").string();
  RunRecord a = run(cfg);
  cfg.threads = 2;  // thread count must not matter
  cfg.output = (tmp.path / "b").string();
  RunRecord b = run(cfg);
  REQUIRE(a.output_checksums == b.output_checksums);
}

TEST_CASE("analyze extracts a front and fits it", "[io]") {
  TempDir tmp;
  // ballistic field from the exact evaluator, written as a field CSV
  RunConfig gen;
  gen.experiment = Experiment::exact;
  gen.n = 101;
  gen.gamma = 0.0;
  gen.noise = "none";
  gen.t_max = 20.0;
  gen.samples = 21;
  gen.density_source_site = 51;
  gen.output = (tmp.path / "gen").string();
  run(gen);

  RunConfig an;
  an.experiment = Experiment::analyze;
  an.an_input = (tmp.path / "gen" / "density_diag.csv").string();
  an.an_kind = "field";
  an.an_fit_t_min = 5.0;
  an.output = (tmp.path / "an").string();
  RunRecord rec = run(an);
  REQUIRE(rec.output_checksums.count("front_radius.csv") == 1);
  REQUIRE(rec.output_checksums.count("exponent_fit.json") == 1);
  const std::string fit = read_file(tmp.path / "an" / "exponent_fit.json");
  REQUIRE(fit.find("\"status\": \"ok\"") != std::string::npos);
}

TEST_CASE("analyze reports saturation instead of fitting", "[io]") {
  TempDir tmp;
  std::vector<std::vector<double>> rows;
  for (int i = 0; i <= 20; ++i) rows.push_back({0.5 * i, 0.0});
  const fs::path p = tmp.path / "flat.csv";
  write_file(p, csv_bytes({"t", "front_radius"}, rows));

  RunConfig an;
  an.experiment = Experiment::analyze;
  an.an_input = p.string();
  an.an_kind = "series";
  an.an_fit_t_min = 1.0;
  an.output = (tmp.path / "an").string();
  run(an);
  const std::string fit = read_file(tmp.path / "an" / "exponent_fit.json");
  REQUIRE(fit.find("\"status\": \"no-fit\"") != std::string::npos);
}
