#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "feigen/errors.hpp"
#include "feigen/io.hpp"

using namespace feigen;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("feigen_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("csv quoting") {
  CsvWriter w({"a", "b"});
  w.row({"plain", "with,comma"});
  w.row({"say \"hi\"", "two\nlines"});
  CHECK(w.str() == "a,b\r\nplain,\"with,comma\"\r\n\"say \"\"hi\"\"\",\"two\nlines\"\r\n");
  CHECK_THROWS(w.row({"only one"}));
}

TEST_CASE("numbers round-trip through text") {
  for (double v : {0.1, 1.0 / 3.0, -1.4011551890920506, 4.669201609102990, 1e-300, 6.02214076e23})
    CHECK(std::stod(fmt_num(v)) == v);
  CHECK(fmt_num(2.0) == "2");
}

TEST_CASE("sha256 test vectors") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const auto dir = scratch("sha");
  write_text(dir / "x.txt", "abc");
  CHECK(sha256_file(dir / "x.txt") == sha256_hex("abc"));
  CHECK(read_text(dir / "x.txt") == "abc");
  write_text(dir / "manifest.json", "{}");
  const auto d = digest_directory(dir);
  CHECK(d.size() == 1);
  CHECK(d.at("x.txt") == sha256_hex("abc"));
}

TEST_CASE("pgm layout") {
  const auto dir = scratch("pgm");
  // row 0 is the bottom of the window and is written last
  write_pgm(dir / "r.pgm", 2, 2, {1, 2, 3, 4});
  const std::string s = read_text(dir / "r.pgm");
  const std::string header = "P5\n2 2\n255\n";
  REQUIRE(s.size() == header.size() + 4);
  CHECK(s.substr(0, header.size()) == header);
  CHECK(s.substr(header.size()) == std::string("\x03\x04\x01\x02", 4));
  CHECK_THROWS(write_pgm(dir / "bad.pgm", 3, 2, {1, 2, 3}));
}

TEST_CASE("fixed point json round trip") {
  FixedPointSolution s;
  s.degree = 2;
  s.order = 4;
  s.alpha = -0.3995352805231344;
  s.coeffs = {-1.5276329970363, 0.1048151947438, 0.0267056705340};
  s.residual = 1e-15;
  s.newton_steps = 6;
  const auto back = fixed_point_from_json(json::parse(to_json(s).dump()));
  CHECK(back.degree == s.degree);
  CHECK(back.order == s.order);
  CHECK(back.alpha == s.alpha);
  CHECK(back.coeffs == s.coeffs);
  CHECK(back.residual == s.residual);
}

TEST_CASE("manifest json round trip") {
  RunManifest m;
  m.command = "stats";
  m.config = "[stats]\nseed=3\n";
  m.seeds = {3, std::numeric_limits<std::uint64_t>::max()};
  m.version = "1.0.0";
  m.wall_seconds = 1.25;
  m.digests = {{"results.csv", sha256_hex("x")}, {"results.json", sha256_hex("y")}};
  const auto back = manifest_from_json(json::parse(to_json(m).dump()));
  CHECK(back.command == m.command);
  CHECK(back.config == m.config);
  CHECK(back.seeds == m.seeds);
  CHECK(back.version == m.version);
  CHECK(back.wall_seconds == m.wall_seconds);
  CHECK(back.digests == m.digests);
}

TEST_CASE("estimate json") {
  Estimate e{0.25, 0.2, 0.3, 1000};
  const auto j = to_json(e);
  CHECK(j.at("value").get<double>() == 0.25);
  CHECK(j.dump().find("0.25") != std::string::npos);
}

TEST_CASE("non-finite numbers become null") {
  const auto j = to_json(Estimate{std::nan(""), 0.0, 1.0, 0});
  CHECK(j.at("value").is_null());
}
