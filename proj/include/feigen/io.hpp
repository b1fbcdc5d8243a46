#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "feigen/conformal_measure.hpp"
#include "feigen/dimension.hpp"
#include "feigen/domain_nest.hpp"
#include "feigen/escape_stats.hpp"
#include "feigen/fibonacci.hpp"
#include "feigen/fixed_point.hpp"
#include "feigen/poincare.hpp"
#include "feigen/trichotomy.hpp"

namespace feigen {

using json = nlohmann::ordered_json;

// Round-trip decimal text (17 significant digits).
std::string fmt_num(double v);

// RFC 4180 writer; cells are quoted only when they need it.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  CsvWriter& row(const std::vector<std::string>& cells);
  std::string str() const { return out_; }

 private:
  std::size_t width_;
  std::string out_;
  void append(const std::vector<std::string>& cells);
};

json to_json(const Estimate& e);
json to_json(const LinearFit& f);
json to_json(const FixedPointSolution& s);
FixedPointSolution fixed_point_from_json(const json& j);
json to_json(const DomainNest& nest);
json to_json(const LevelStats& s);
json to_json(const ExpLemmaReport& r);
json to_json(const SeriesAccount& a, const DivergenceDiagnostic& d);
json to_json(const TrichotomyVerdict& v);
json to_json(const BoxCount& b);
json to_json(const ScalingFit& f);
json to_json(const PrincipalNest& nest, const GeometryReport& g);

std::string level_stats_csv(const std::vector<LevelStats>& stats);
std::string atoms_csv(const AtomicMeasure& mu);

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

// 8-bit binary PGM.
void write_pgm(const std::filesystem::path& path, int width, int height, const std::vector<std::uint8_t>& pixels);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

struct RunManifest {
  std::string command;
  std::string config;  // effective configuration, INI text
  std::vector<std::uint64_t> seeds;
  std::string version;
  double wall_seconds = 0.0;
  std::map<std::string, std::string> digests;  // file name -> SHA-256
};

json to_json(const RunManifest& m);
RunManifest manifest_from_json(const json& j);

// Hashes every regular file in dir except manifest.json.
std::map<std::string, std::string> digest_directory(const std::filesystem::path& dir);

}  // namespace feigen
