#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "feigen/cli.hpp"
#include "feigen/errors.hpp"
#include "feigen/io.hpp"

using namespace feigen;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("feigen_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "feigenlab");
  return cli_dispatch(args);
}

RunManifest manifest(const fs::path& dir) { return manifest_from_json(json::parse(read_text(dir / "manifest.json"))); }

}  // namespace

TEST_CASE("level ranges") {
  CHECK(parse_level_range("0..4") == std::pair{0, 4});
  CHECK(parse_level_range("3") == std::pair{3, 3});
  CHECK_THROWS(parse_level_range("4..1"));
  CHECK_THROWS(parse_level_range("a..b"));
  CHECK_THROWS(parse_level_range("1..2x"));
}

TEST_CASE("sequence expressions") {
  CHECK(evaluate_sequence_expr("2^-m", 3) == doctest::Approx(0.125));
  CHECK(evaluate_sequence_expr("1/m", 4) == doctest::Approx(0.25));
  CHECK(evaluate_sequence_expr("2^3^2", 0) == doctest::Approx(512.0));
  CHECK(evaluate_sequence_expr("-2^2", 0) == doctest::Approx(-4.0));
  CHECK(evaluate_sequence_expr("(1 + m) * 0.5", 3) == doctest::Approx(2.0));
  CHECK(evaluate_sequence_expr("log(exp(m)) + sqrt(4)", 1.5) == doctest::Approx(3.5));
  CHECK_THROWS(evaluate_sequence_expr("2 +", 1));
  CHECK_THROWS(evaluate_sequence_expr("foo(m)", 1));
  CHECK_THROWS(evaluate_sequence_expr("(m", 1));
}

TEST_CASE("exit codes") {
  const auto dir = scratch("exit");
  CHECK(run({}) == 2);
  CHECK(run({"--help"}) == 0);
  CHECK(run({"stats", "--no-such-flag"}) == 2);
  CHECK(run({"--config", (dir / "missing.ini").string(), "stats"}) == 2);
  CHECK(run({"trichotomy", "--synthetic", "eta=1/m", "xi=1/m", "--out", (dir / "bal").string()}) == 0);
  CHECK(fs::exists(dir / "bal" / "manifest.json"));
  CHECK(read_text(dir / "bal" / "report.txt").find("Balanced") != std::string::npos);
  // neither --synthetic nor --input
  CHECK(run({"trichotomy", "--out", (dir / "none").string()}) == 1);
  // a zero entry is outside (0, 1]
  CHECK(run({"trichotomy", "--synthetic", "eta=0*m", "xi=1/m", "--out", (dir / "zero").string()}) == 1);
  CHECK(run({"solve-fixedpoint", "--order", "1", "--out", (dir / "fp").string()}) == 1);
}

TEST_CASE("config file with flag override") {
  const auto dir = scratch("config");
  write_text(dir / "run.ini", "[trichotomy]\nlevels=1..6\nC=4\n");
  REQUIRE(run({"trichotomy", "--config", (dir / "run.ini").string(), "--C", "5", "--synthetic", "eta=2^-m",
               "xi=0.3+0*m", "--out", (dir / "out").string()}) == 0);
  const auto j = json::parse(read_text(dir / "out" / "results.json"));
  const std::string cfg = manifest(dir / "out").config;
  CHECK(cfg.find("levels=\"1..6\"") != std::string::npos);
  CHECK(cfg.find("C=5") != std::string::npos);
  CHECK(j.dump().find("Lean") != std::string::npos);
}

TEST_CASE("stats runs are reproducible and replayable") {
  const auto dir = scratch("stats");
  const std::vector<std::string> args{"stats", "--levels", "0..2", "--samples", "2000", "--seed", "5", "--workers", "1"};
  auto a = args, b = args;
  a.insert(a.end(), {"--out", (dir / "a").string()});
  b.insert(b.end(), {"--out", (dir / "b").string()});
  b[b.size() - 3] = "4";
  REQUIRE(run(a) == 0);
  REQUIRE(run(b) == 0);
  const auto ma = manifest(dir / "a"), mb = manifest(dir / "b");
  CHECK(ma.digests.count("results.csv") == 1);
  CHECK(ma.digests == mb.digests);
  CHECK(ma.seeds == std::vector<std::uint64_t>{5});

  CHECK(run({"replay", (dir / "a" / "manifest.json").string(), "--out", (dir / "c").string(), "--workers", "3"}) == 0);
  CHECK(manifest(dir / "c").digests == ma.digests);

  // a tampered digest makes the replay fail
  auto j = json::parse(read_text(dir / "a" / "manifest.json"));
  j["digests"]["results.csv"] = sha256_hex("tampered");
  write_text(dir / "a" / "manifest.json", j.dump(2));
  CHECK(run({"replay", (dir / "a" / "manifest.json").string(), "--out", (dir / "d").string()}) == 1);
}
