#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "wisense/cli_support.hpp"

using namespace wisense::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is.good());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path p;
  TempDir() {
    p = fs::temp_directory_path() / "wisense_cli_test";
    fs::remove_all(p);
    fs::create_directories(p);
  }
  ~TempDir() { fs::remove_all(p); }
};

}  // namespace

TEST_CASE("config parses keys, comments and whitespace") {
  auto cfg = RunConfig::parse_text(
      "# leading comment\n"
      "sim.seed = 7\n"
      "\n"
      "  sim.noise_std=0.02  # trailing comment\n"
      "train.mode=temporal\n");
  CHECK(cfg.get_int("sim.seed", 1) == 7);
  CHECK(cfg.get_double("sim.noise_std", 0.0) == doctest::Approx(0.02));
  CHECK(cfg.get_string("train.mode", "memoryless") == "temporal");
}

TEST_CASE("config rejects malformed and duplicate lines") {
  CHECK_THROWS_AS(RunConfig::parse_text("just words\n"), config_error);
  CHECK_THROWS_AS(RunConfig::parse_text("=value\n"), config_error);
  CHECK_THROWS_AS(RunConfig::parse_text("a=1\na=2\n"), config_error);
}

TEST_CASE("typed getters validate their values") {
  auto cfg = RunConfig::parse_text("a=xyz\nb=1.5\nc=maybe\n");
  CHECK_THROWS_AS(cfg.get_double("a", 0.0), config_error);
  CHECK_THROWS_AS(cfg.get_int("b", 0), config_error);
  CHECK_THROWS_AS(cfg.get_bool("c", false), config_error);
  auto ok = RunConfig::parse_text("f=true\ng=0\n");
  CHECK(ok.get_bool("f", false));
  CHECK_FALSE(ok.get_bool("g", true));
}

TEST_CASE("unknown keys are rejected, accessed keys are not") {
  auto cfg = RunConfig::parse_text("sim.seed=3\nsim.typo=1\n");
  cfg.get_int("sim.seed", 1);
  CHECK_THROWS_WITH_AS(cfg.reject_unknown(),
                       "unknown config key(s): 'sim.typo'", config_error);
  cfg.get_int("sim.typo", 0);
  CHECK_NOTHROW(cfg.reject_unknown());
}

TEST_CASE("dump contains defaults materialized by getters") {
  auto cfg = RunConfig::parse_text("sim.seed=3\n");
  cfg.get_double("sim.noise_std", 0.01);
  const std::string d = cfg.dump();
  CHECK(d.find("# wisense ") == 0);
  CHECK(d.find("sim.seed=3\n") != std::string::npos);
  CHECK(d.find("sim.noise_std=0.01") != std::string::npos);
}

TEST_CASE("output dir marker lifecycle") {
  TempDir tmp;
  const std::string run = (tmp.p / "run1").string();
  auto cfg = RunConfig::parse_text("a=1\n");
  cfg.get_int("a", 0);
  {
    OutputDir out(run);
    CHECK(fs::exists(fs::path(run) / "run.incomplete"));
    std::ofstream(out.file("data.csv")) << "x\n1\n";
    out.commit(cfg);
  }
  CHECK_FALSE(fs::exists(fs::path(run) / "run.incomplete"));
  const std::string resolved = slurp(run + "/config.resolved");
  CHECK(resolved.find("a=1\n") != std::string::npos);
  CHECK(resolved.find(kToolVersion) != std::string::npos);
}

TEST_CASE("csv round trip is byte stable") {
  TempDir tmp;
  const std::string p1 = (tmp.p / "a.csv").string();
  const std::string p2 = (tmp.p / "b.csv").string();
  std::vector<std::string> header{"t", "err"};
  std::vector<std::vector<std::string>> rows{
      {"0", format_double(0.125)}, {"1", format_double(1.0 / 3.0)}};
  write_csv(p1, header, rows);
  write_csv(p2, header, rows);
  CHECK(slurp(p1) == slurp(p2));

  auto t = read_csv(p1);
  REQUIRE(t.header == header);
  REQUIRE(t.rows.size() == 2);
  CHECK(std::stod(t.rows[1][1]) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  CHECK_THROWS(write_csv(p1, header, {{"only-one-cell"}}));
}

TEST_CASE("svg plot is deterministic and structurally sane") {
  TempDir tmp;
  const std::string p1 = (tmp.p / "a.svg").string();
  const std::string p2 = (tmp.p / "b.svg").string();
  std::vector<PlotSeries> series{
      {"memoryless", {{0, 0.4}, {1, 0.38}, {2, 0.35}}},
      {"temporal", {{0, 0.4}, {1, 0.3}, {2, 0.22}}}};
  svg_line_plot(p1, "error", "timestamp", "meters", series);
  svg_line_plot(p2, "error", "timestamp", "meters", series);
  const std::string svg = slurp(p1);
  CHECK(svg == slurp(p2));
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.rfind("</svg>\n") == svg.size() - 7);
  CHECK(svg.find("memoryless") != std::string::npos);
  CHECK(svg.find("temporal") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("timestamp") != std::string::npos);
  CHECK(svg.find("meters") != std::string::npos);

  CHECK_THROWS(svg_line_plot(p1, "t", "x", "y", {}));
  CHECK_THROWS(svg_line_plot(p1, "t", "x", "y", {{"empty", {}}}));
}
