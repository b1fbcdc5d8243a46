#include "feigen/io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "feigen/errors.hpp"

namespace feigen {

std::string fmt_num(double v) { return fmt::format("{:.17g}", v); }

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) { append(header); }

CsvWriter& CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw PreconditionError("CSV row width does not match the header");
  append(cells);
  return *this;
}

void CsvWriter::append(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ += ',';
    const std::string& c = cells[i];
    if (c.find_first_of(",\"\r\n") == std::string::npos) {
      out_ += c;
    } else {
      out_ += '"';
      for (char ch : c) {
        if (ch == '"') out_ += '"';
        out_ += ch;
      }
      out_ += '"';
    }
  }
  out_ += "\r\n";
}

namespace {

json num(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

json complex_json(cplx z) { return json::array({num(z.real()), num(z.imag())}); }

}  // namespace

json to_json(const Estimate& e) {
  return json{{"value", num(e.value)}, {"ci_low", num(e.ci_low)}, {"ci_high", num(e.ci_high)}, {"n_samples", e.n_samples}};
}

json to_json(const LinearFit& f) {
  return json{{"slope", num(f.slope)},
              {"intercept", num(f.intercept)},
              {"r_squared", num(f.r_squared)},
              {"slope_stderr", num(f.slope_stderr)},
              {"points", f.points}};
}

json to_json(const FixedPointSolution& s) {
  return json{{"degree", s.degree}, {"order", s.order}, {"alpha", s.alpha}, {"coeffs", s.coeffs}, {"residual", s.residual}};
}

FixedPointSolution fixed_point_from_json(const json& j) {
  FixedPointSolution s;
  s.degree = j.at("degree").get<int>();
  s.order = j.at("order").get<int>();
  s.alpha = j.at("alpha").get<double>();
  s.coeffs = j.at("coeffs").get<std::vector<double>>();
  s.residual = j.at("residual").get<double>();
  if (static_cast<int>(s.coeffs.size()) != s.order - 1) throw PreconditionError("fixed point JSON: order and coefficient count disagree");
  return s;
}

json to_json(const DomainNest& nest) {
  json levels = json::array();
  for (const auto& L : nest.levels())
    levels.push_back(json{{"n", L.n}, {"period", L.period}, {"v_radius", L.v_radius}, {"closest_return", complex_json(L.closest_return)}});
  return json{{"c", complex_json(nest.map().c)},
              {"degree", nest.map().d},
              {"kappa_shape", nest.shape_factor()},
              {"levels", levels}};
}

json to_json(const LevelStats& s) {
  return json{{"m", s.m},
              {"n", s.n},
              {"eta", to_json(s.eta)},
              {"xi", to_json(s.xi)},
              {"rho", to_json(s.rho)},
              {"kappa", to_json(s.kappa)},
              {"tau_min", num(s.tau_min)},
              {"upsilon_min", num(s.upsilon_min)},
              {"xi_censored_fraction", s.xi_censored_fraction},
              {"samples", s.samples},
              {"seed", s.seed},
              {"horizon", s.horizon}};
}

json to_json(const ExpLemmaReport& r) {
  json rows = json::array();
  for (const auto& w : r.rows)
    rows.push_back(json{{"n", w.n},
                        {"ratio", num(w.ratio)},
                        {"ratio_low", num(w.ratio_low)},
                        {"ratio_high", num(w.ratio_high)},
                        {"xi", num(w.xi)},
                        {"c_min", num(w.c_min)},
                        {"c0_min", num(w.c0_min)}});
  return json{{"rows", rows}, {"C", num(r.c)}, {"C0", num(r.c0)}, {"feasible", r.feasible}};
}

json to_json(const SeriesAccount& a, const DivergenceDiagnostic& d) {
  json sums = json::array();
  for (double s : a.partial_sums) sums.push_back(num(s));
  return json{{"delta", a.delta},
              {"depth", a.depth},
              {"base_point", complex_json(a.base_point)},
              {"partial_sums", sums},
              {"pruned_bound", num(a.pruned_mass_bound)},
              {"verdict", to_string(d.verdict)},
              {"growth", num(d.growth)}};
}

json to_json(const TrichotomyVerdict& v) {
  json ratio = json::array();
  for (double r : v.ratio_log) ratio.push_back(num(r));
  return json{{"class", to_string(v.regime)},
              {"eta_fit", to_json(v.eta_fit)},
              {"xi_fit", to_json(v.xi_fit)},
              {"inverse_eta_fit", to_json(v.inverse_eta_fit)},
              {"ratio_log", ratio},
              {"calibration_C", v.calibration_C},
              {"notes", v.notes}};
}

json to_json(const BoxCount& b) {
  return json{{"grid_sizes", b.grid_sizes}, {"counts", b.counts}, {"slope", num(b.slope)}, {"stderr", num(b.stderr_)},
              {"fit", to_json(b.fit)}};
}

json to_json(const ScalingFit& f) {
  return json{{"sigma", num(f.sigma)}, {"stderr", num(f.stderr_)}, {"radii", f.radii}, {"masses", f.masses},
              {"dropped", f.dropped}, {"fit", to_json(f.fit)}};
}

json to_json(const PrincipalNest& nest, const GeometryReport& g) {
  json levels = json::array();
  for (int n = 0; n <= nest.depth(); ++n) {
    json L{{"n", n}, {"half_width", nest.half_widths[static_cast<std::size_t>(n)].str(36, std::ios_base::scientific)}};
    if (n < nest.depth()) {
      const auto& b = nest.side_branches[static_cast<std::size_t>(n)];
      L["return_time"] = nest.return_times[static_cast<std::size_t>(n)];
      L["side_branch"] = json{{"lo", b.lo}, {"hi", b.hi}, {"time", b.time}};
    }
    levels.push_back(L);
  }
  return json{{"ell", nest.ell},
              {"levels", levels},
              {"ratios", g.ratios},
              {"gaps", g.gaps},
              {"verdict", to_string(g.verdict)},
              {"min_ratio_last_half", g.min_ratio_last_half}};
}

std::string level_stats_csv(const std::vector<LevelStats>& stats) {
  CsvWriter csv({"m", "n", "samples", "seed", "horizon", "eta", "eta_lo", "eta_hi", "xi", "xi_lo", "xi_hi",
                 "xi_censored", "rho", "rho_lo", "rho_hi", "kappa", "kappa_lo", "kappa_hi", "tau_min", "upsilon_min"});
  for (const auto& s : stats)
    csv.row({std::to_string(s.m), std::to_string(s.n), std::to_string(s.samples), std::to_string(s.seed),
             std::to_string(s.horizon), fmt_num(s.eta.value), fmt_num(s.eta.ci_low), fmt_num(s.eta.ci_high),
             fmt_num(s.xi.value), fmt_num(s.xi.ci_low), fmt_num(s.xi.ci_high), fmt_num(s.xi_censored_fraction),
             fmt_num(s.rho.value), fmt_num(s.rho.ci_low), fmt_num(s.rho.ci_high), fmt_num(s.kappa.value),
             fmt_num(s.kappa.ci_low), fmt_num(s.kappa.ci_high), fmt_num(s.tau_min), fmt_num(s.upsilon_min)});
  return csv.str();
}

std::string atoms_csv(const AtomicMeasure& mu) {
  CsvWriter csv({"re", "im", "weight", "depth"});
  for (const auto& a : mu.atoms)
    csv.row({fmt_num(a.point.real()), fmt_num(a.point.imag()), fmt_num(a.weight), std::to_string(a.depth)});
  return csv.str();
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << content;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_pgm(const std::filesystem::path& path, int width, int height, const std::vector<std::uint8_t>& pixels) {
  if (width <= 0 || height <= 0 || pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw PreconditionError("raster size does not match its dimensions");
  std::string data = fmt::format("P5\n{} {}\n255\n", width, height);
  // row 0 of the raster is the bottom of the window; PGM rows run top-down
  for (int r = height - 1; r >= 0; --r)
    data.append(reinterpret_cast<const char*>(pixels.data()) + static_cast<std::size_t>(r) * static_cast<std::size_t>(width),
                static_cast<std::size_t>(width));
  write_text(path, data);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_text(path)); }

json to_json(const RunManifest& m) {
  json digests = json::object();
  for (const auto& [file, hash] : m.digests) digests[file] = hash;
  return json{{"command", m.command},
              {"config", m.config},
              {"seeds", m.seeds},
              {"version", m.version},
              {"wall_seconds", m.wall_seconds},
              {"digests", digests}};
}

RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.config = j.at("config").get<std::string>();
  m.seeds = j.value("seeds", std::vector<std::uint64_t>{});
  m.version = j.value("version", std::string{});
  m.wall_seconds = j.value("wall_seconds", 0.0);
  const json digests = j.value("digests", json::object());
  for (const auto& [file, hash] : digests.items()) m.digests[file] = hash.get<std::string>();
  return m;
}

std::map<std::string, std::string> digest_directory(const std::filesystem::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().filename() == "manifest.json") continue;
    out[entry.path().filename().string()] = sha256_file(entry.path());
  }
  return out;
}

}  // namespace feigen
