#include "feigen/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "feigen/errors.hpp"
#include "feigen/io.hpp"
#include "feigen/parallel.hpp"

namespace feigen {

namespace fs = std::filesystem;

std::pair<int, int> parse_level_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    std::size_t used = 0;
    if (dots == std::string::npos) {
      const int v = std::stoi(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return {v, v};
    }
    const std::string lo = text.substr(0, dots), hi = text.substr(dots + 2);
    const int a = std::stoi(lo, &used);
    if (used != lo.size()) throw std::invalid_argument(text);
    const int b = std::stoi(hi, &used);
    if (used != hi.size()) throw std::invalid_argument(text);
    if (b < a) throw std::invalid_argument(text);
    return {a, b};
  } catch (const std::logic_error&) {
    throw PreconditionError(fmt::format("bad level range '{}', expected a..b", text));
  }
}

namespace {

// expr := term (('+'|'-') term)*, term := unary (('*'|'/') unary)*,
// unary := '-' unary | power, power := atom ('^' unary)?
class ExprParser {
 public:
  ExprParser(const std::string& s, double m) : s_(s), m_(m) {}

  double run() {
    const double v = expr();
    skip();
    if (pos_ != s_.size()) fail();
    return v;
  }

 private:
  const std::string& s_;
  double m_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail() const { throw PreconditionError(fmt::format("cannot parse expression '{}'", s_)); }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  double expr() {
    double v = term();
    for (;;) {
      if (eat('+')) v += term();
      else if (eat('-')) v -= term();
      else return v;
    }
  }

  double term() {
    double v = unary();
    for (;;) {
      if (eat('*')) v *= unary();
      else if (eat('/')) v /= unary();
      else return v;
    }
  }

  double unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    const double base = atom();
    if (eat('^')) return std::pow(base, unary());
    return base;
  }

  double atom() {
    skip();
    if (eat('(')) {
      const double v = expr();
      if (!eat(')')) fail();
      return v;
    }
    if (pos_ >= s_.size()) fail();
    if (std::isalpha(static_cast<unsigned char>(s_[pos_]))) {
      std::size_t end = pos_;
      while (end < s_.size() && std::isalpha(static_cast<unsigned char>(s_[end]))) ++end;
      const std::string name = s_.substr(pos_, end - pos_);
      pos_ = end;
      if (name == "m") return m_;
      if (!eat('(')) fail();
      const double arg = expr();
      if (!eat(')')) fail();
      if (name == "log") return std::log(arg);
      if (name == "exp") return std::exp(arg);
      if (name == "sqrt") return std::sqrt(arg);
      fail();
    }
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail();
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::logic_error&) {
      throw PreconditionError(fmt::format("bad number '{}' in list '{}'", item, s));
    }
  }
  return out;
}

std::int64_t as_count(double v, const char* what) {
  if (!(v >= 1.0) || v > 9e15 || v != std::floor(v)) throw PreconditionError(fmt::format("{} must be a positive integer", what));
  return static_cast<std::int64_t>(v);
}

// Minimal CSV reader for files this tool writes.
std::vector<std::map<std::string, std::string>> read_csv(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  std::vector<std::string> header;
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (header.empty()) {
      header = cells;
      continue;
    }
    if (cells.size() != header.size()) throw PreconditionError(fmt::format("{}: ragged row", path.string()));
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < cells.size(); ++i) row[header[i]] = cells[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

double cell(const std::map<std::string, std::string>& row, const std::string& key) {
  const auto it = row.find(key);
  if (it == row.end()) throw PreconditionError(fmt::format("CSV column '{}' missing", key));
  return std::stod(it->second);
}

struct Common {
  std::string out;
  std::size_t workers = default_workers();
};

// Defaults are recorded exactly so that the manifest snapshot replays.
template <typename T>
CLI::Option* opt(CLI::App* sub, const std::string& name, T& value, const std::string& help = "") {
  auto* o = sub->add_option(name, value, help);
  if constexpr (std::is_floating_point_v<T>) o->default_str(fmt_num(value));
  else o->capture_default_str();
  return o;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--out", c.out, "run directory (default runs/<command>)");
  opt(sub, "--workers", c.workers, "worker threads (default $FEIGEN_WORKERS or all cores)")->check(CLI::PositiveNumber);
}

class Run {
 public:
  Run(CLI::App* sub, const Common& common)
      : sub_(sub), command_(sub->get_name()), start_(std::chrono::steady_clock::now()) {
    dir_ = common.out.empty() ? fs::path("runs") / command_ : fs::path(common.out);
    fs::create_directories(dir_);
  }

  void seed(std::uint64_t s) { seeds_.push_back(s); }

  void write(const std::string& name, const std::string& content) {
    write_text(dir_ / name, content);
    files_.push_back(name);
  }

  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  void pgm(const std::string& name, int width, int height, const std::vector<std::uint8_t>& pixels) {
    write_pgm(dir_ / name, width, height, pixels);
    files_.push_back(name);
  }

  void finish() {
    RunManifest m;
    m.command = command_;
    m.config = "[" + command_ + "]\n" + sub_->config_to_str(true, false);
    m.seeds = seeds_;
    m.version = FEIGEN_VERSION;
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    for (const auto& f : files_) m.digests[f] = sha256_file(dir_ / f);
    write_text(dir_ / "manifest.json", to_json(m).dump(2) + "\n");
    std::cout << "run directory: " << dir_.string() << "\n";
  }

 private:
  CLI::App* sub_;
  std::string command_;
  std::chrono::steady_clock::time_point start_;
  fs::path dir_;
  std::vector<std::uint64_t> seeds_;
  std::vector<std::string> files_;
};

struct MapArgs {
  double c = kFeigenbaumC2;
  double c_imag = 0.0;
  int degree = 2;

  FamilyMap map() const { return FamilyMap(cplx(c, c_imag), degree); }
};

void add_map(CLI::App* sub, MapArgs& m, double default_c) {
  m.c = default_c;
  opt(sub, "--c", m.c, "real part of the parameter");
  opt(sub, "--c-imag", m.c_imag, "imaginary part of the parameter");
  opt(sub, "--degree", m.degree, "even critical degree");
}

std::string verdict_text(const TrichotomyVerdict& v) {
  return fmt::format("class {}  C={}  eta rate {:.4g} (R2 {:.3f})  xi rate {:.4g} (R2 {:.3f})  1/eta slope {:.4g} (R2 {:.3f})\n",
                     to_string(v.regime), v.calibration_C, v.eta_fit.slope, v.eta_fit.r_squared, v.xi_fit.slope,
                     v.xi_fit.r_squared, v.inverse_eta_fit.slope, v.inverse_eta_fit.r_squared);
}

// Verdicts at the calibration C and at 3, 10, 30, plus the plain-text page.
std::pair<json, std::string> trichotomy_summary(const std::vector<int>& levels, const std::vector<double>& eta,
                                                const std::vector<double>& xi, double C) {
  const auto main = classify(eta, xi, C);
  json j = to_json(main);
  std::string text = "trichotomy report\n\nm        eta                  xi\n";
  for (std::size_t i = 0; i < levels.size(); ++i) text += fmt::format("{:<4} {:<22.17g} {:<22.17g}\n", levels[i], eta[i], xi[i]);
  text += "\n" + verdict_text(main);
  json stability = json::array();
  bool stable = true;
  for (double alt : {3.0, 10.0, 30.0}) {
    const auto v = classify(eta, xi, alt);
    stability.push_back(json{{"C", alt}, {"class", to_string(v.regime)}});
    stable = stable && v.regime == main.regime;
    text += verdict_text(v);
  }
  j["stability"] = stability;
  j["stable_over_C"] = stable;
  try {
    const auto th = theta_bound_fit(eta, xi);
    j["theta"] = json{{"theta", th.theta}, {"fit", to_json(th.fit)}};
    text += fmt::format("theta {:.6g} (R2 {:.3f})\n", th.theta, th.fit.r_squared);
  } catch (const Error& e) {
    j["theta"] = nullptr;
    text += fmt::format("theta fit unavailable: {}\n", e.what());
  }
  text += fmt::format("verdict {} over C in {{3, 10, 30}}\n", stable ? "stable" : "NOT stable");
  if (!main.notes.empty()) text += "notes: " + main.notes + "\n";
  return {j, text};
}

std::vector<LevelStats> level_stats_from_csv(const fs::path& path) {
  std::vector<LevelStats> out;
  for (const auto& row : read_csv(path)) {
    LevelStats s;
    s.m = static_cast<int>(cell(row, "m"));
    s.n = static_cast<int>(cell(row, "n"));
    s.samples = static_cast<std::int64_t>(cell(row, "samples"));
    auto est = [&](const std::string& k) {
      Estimate e;
      e.value = cell(row, k);
      e.ci_low = cell(row, k + "_lo");
      e.ci_high = cell(row, k + "_hi");
      e.n_samples = s.samples;
      return e;
    };
    s.eta = est("eta");
    s.xi = est("xi");
    s.rho = est("rho");
    s.kappa = est("kappa");
    s.xi_censored_fraction = cell(row, "xi_censored");
    s.tau_min = cell(row, "tau_min");
    s.upsilon_min = cell(row, "upsilon_min");
    out.push_back(s);
  }
  return out;
}

// Moves --config to the front so it may follow the subcommand name.
std::vector<std::string> hoist_config(std::vector<std::string> args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      std::vector<std::string> moved{args[i], args[i + 1]};
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      args.insert(args.begin() + 1, moved.begin(), moved.end());
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      std::string a = args[i];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      args.insert(args.begin() + 1, a);
      break;
    }
  }
  return args;
}

}  // namespace

double evaluate_sequence_expr(const std::string& expr, double m) { return ExprParser(expr, m).run(); }

int cli_dispatch(const std::vector<std::string>& raw_args) {
  const std::vector<std::string> args = hoist_config(raw_args);

  CLI::App app{"Numerical experiments on Feigenbaum Julia sets"};
  app.name(args.empty() ? "feigenlab" : fs::path(args[0]).filename().string());
  app.set_version_flag("--version", FEIGEN_VERSION);
  app.set_config("--config", "", "INI file with [command] sections; flags override it");
  app.require_subcommand(1);
  std::function<int()> action;

  // find-param
  auto* fp = app.add_subcommand("find-param", "superstable, doubling-limit or Fibonacci parameters");
  Common fp_common;
  add_common(fp, fp_common);
  std::string fp_kind = "doubling";
  int fp_degree = 2;
  std::int64_t fp_period = 2;
  double fp_lo = -1.2, fp_hi = -0.8, fp_tol = 1e-10, fp_ell = 2.0;
  int fp_depth = 12, fp_levels = 40;
  std::int64_t fp_horizon = 40;
  opt(fp, "--kind", fp_kind)->check(CLI::IsMember({"superstable", "doubling", "fibonacci"}));
  opt(fp, "--degree", fp_degree);
  opt(fp, "--period", fp_period, "superstable period");
  opt(fp, "--lo", fp_lo, "superstable bracket");
  opt(fp, "--hi", fp_hi, "superstable bracket");
  opt(fp, "--tol", fp_tol, "doubling-limit gap tolerance");
  opt(fp, "--max-levels", fp_levels, "doubling cascade cap");
  opt(fp, "--ell", fp_ell, "Fibonacci critical order");
  opt(fp, "--depth", fp_depth, "Fibonacci kneading depth");
  opt(fp, "--horizon", fp_horizon, "iterations scanned for closest returns");
  fp->callback([&] {
    action = [&] {
      Run run(fp, fp_common);
      json j{{"kind", fp_kind}};
      if (fp_kind == "superstable") {
        const double c = find_superstable(fp_degree, fp_period, fp_lo, fp_hi);
        j["degree"] = fp_degree;
        j["period"] = fp_period;
        j["c"] = c;
        std::cout << fmt::format("superstable period {}: c = {:.17g}\n", fp_period, c);
      } else if (fp_kind == "doubling") {
        const auto L = find_doubling_limit(fp_degree, fp_tol, fp_levels);
        CsvWriter csv({"k", "period", "c"});
        for (std::size_t k = 0; k < L.superstable.size(); ++k)
          csv.row({std::to_string(k), std::to_string(std::int64_t{1} << k), fmt_num(L.superstable[k])});
        run.write("results.csv", csv.str());
        j["degree"] = fp_degree;
        j["c"] = L.c;
        j["superstable"] = L.superstable;
        std::cout << fmt::format("doubling limit: c = {:.17g} ({} superstable levels)\n", L.c, L.superstable.size());
      } else {
        const quad a = find_fibonacci_parameter<quad>(fp_ell, fp_depth, quad(1e-30));
        const auto returns = closest_returns(RealUnimodalMap<quad>{fp_ell, a}, fp_horizon);
        j["ell"] = fp_ell;
        j["a"] = a.str(36, std::ios_base::scientific);
        j["a_double"] = static_cast<double>(a);
        j["closest_returns"] = returns;
        std::cout << fmt::format("Fibonacci parameter ell={}: a = {}\n", fp_ell, a.str(20));
      }
      run.write_json("results.json", j);
      run.finish();
      return 0;
    };
  });

  // solve-fixedpoint
  auto* sf = app.add_subcommand("solve-fixedpoint", "Cvitanovic-Feigenbaum fixed point by collocation");
  Common sf_common;
  add_common(sf, sf_common);
  int sf_degree = 2, sf_order = 20;
  double sf_tol = 1e-10;
  opt(sf, "--degree", sf_degree);
  opt(sf, "--order", sf_order, "number of collocation unknowns");
  opt(sf, "--tol", sf_tol, "residual tolerance");
  sf->callback([&] {
    action = [&] {
      Run run(sf, sf_common);
      const auto sol = solve_cvitanovic(sf_degree, sf_order, sf_tol);
      CsvWriter csv({"k", "coefficient"});
      for (std::size_t k = 0; k < sol.coeffs.size(); ++k) csv.row({std::to_string(k + 1), fmt_num(sol.coeffs[k])});
      run.write("results.csv", csv.str());
      run.write_json("results.json", to_json(sol));
      std::cout << fmt::format("alpha = {:.17g}  residual = {:.3g}  newton steps = {}\n", sol.alpha, sol.residual,
                               sol.newton_steps);
      run.finish();
      return 0;
    };
  });

  // build-nest
  auto* bn = app.add_subcommand("build-nest", "renormalization domains U^n, V^n");
  Common bn_common;
  add_common(bn, bn_common);
  MapArgs bn_map;
  add_map(bn, bn_map, kFeigenbaumC2);
  int bn_depth = 6;
  double bn_shape = 0.5, bn_nice = 0;
  std::int64_t bn_horizon = 1000;
  std::uint64_t bn_seed = 1;
  opt(bn, "--depth", bn_depth);
  opt(bn, "--shape", bn_shape, "kappa in r_n = |a_n| / kappa");
  opt(bn, "--nice-samples", bn_nice, "boundary samples for the nice-property check (0 skips)");
  opt(bn, "--horizon", bn_horizon, "nice-property horizon");
  opt(bn, "--seed", bn_seed);
  bn->callback([&] {
    action = [&] {
      Run run(bn, bn_common);
      const auto nest = build_nest(bn_map.map(), RenormSchedule::doubling(bn_depth), bn_depth, bn_shape);
      json j = to_json(nest);
      CsvWriter csv({"n", "period", "v_radius", "closest_re", "closest_im", "nice_violation", "nice_lo", "nice_hi"});
      json nice = json::array();
      for (const auto& L : nest.levels()) {
        std::vector<std::string> row{std::to_string(L.n), std::to_string(L.period), fmt_num(L.v_radius),
                                     fmt_num(L.closest_return.real()), fmt_num(L.closest_return.imag())};
        if (bn_nice > 0) {
          const auto e = check_nice_property(nest, L.n, as_count(bn_nice, "--nice-samples"), bn_horizon, bn_seed);
          row.insert(row.end(), {fmt_num(e.value), fmt_num(e.ci_low), fmt_num(e.ci_high)});
          nice.push_back(to_json(e));
        } else {
          row.insert(row.end(), {"", "", ""});
        }
        csv.row(row);
      }
      if (bn_nice > 0) {
        j["nice_violation"] = nice;
        run.seed(bn_seed);
      }
      run.write("results.csv", csv.str());
      run.write_json("results.json", j);
      std::cout << fmt::format("{} levels, r_0 = {:.6g}, r_{} = {:.6g}\n", nest.depth() + 1, nest.radius(0), nest.depth(),
                               nest.radius(nest.depth()));
      run.finish();
      return 0;
    };
  });

  // stats
  auto* st = app.add_subcommand("stats", "Monte Carlo eta, xi, rho, kappa between nest levels");
  Common st_common;
  add_common(st, st_common);
  MapArgs st_map;
  add_map(st, st_map, kFeigenbaumC2);
  std::string st_levels = "0..4";
  bool st_all_pairs = false, st_no_kappa = false;
  double st_samples = 1e5, st_shape = 0.5;
  std::uint64_t st_seed = 1;
  std::int64_t st_horizon = 100000;
  opt(st, "--levels", st_levels, "level range a..b, pairs (a, n) for a < n <= b");
  st->add_flag("--all-pairs", st_all_pairs, "every pair a <= m < n <= b");
  opt(st, "--samples", st_samples, "samples per estimate");
  opt(st, "--seed", st_seed);
  opt(st, "--horizon", st_horizon, "step cap per orbit, in units of the level period");
  opt(st, "--shape", st_shape, "kappa in r_n = |a_n| / kappa");
  st->add_flag("--no-kappa", st_no_kappa, "skip the kappa estimator");
  st->callback([&] {
    action = [&] {
      const auto [a, b] = parse_level_range(st_levels);
      if (a < 0 || b <= a) throw PreconditionError("--levels needs 0 <= a < b");
      Run run(st, st_common);
      run.seed(st_seed);
      const auto nest = build_nest(st_map.map(), RenormSchedule::doubling(b), b, st_shape);
      SamplingOptions opt;
      opt.samples = as_count(st_samples, "--samples");
      opt.seed = st_seed;
      opt.horizon = st_horizon;
      opt.workers = st_common.workers;
      std::vector<LevelStats> stats;
      for (int m = a; m < b; ++m) {
        for (int n = m + 1; n <= b; ++n) {
          stats.push_back(compute_level_stats(nest, m, n, opt, !st_no_kappa));
          const auto& s = stats.back();
          std::cout << fmt::format("m={} n={}  eta {:.6g}  xi {:.6g}  rho {:.6g}  kappa {:.6g}\n", m, n, s.eta.value,
                                   s.xi.value, s.rho.value, s.kappa.value);
        }
        if (!st_all_pairs) break;
      }
      json j{{"nest", to_json(nest)}, {"stats", json::array()}, {"exp_lemma", json::array()}};
      for (const auto& s : stats) j["stats"].push_back(to_json(s));
      for (int m = a; m < b; ++m) {
        std::vector<LevelStats> row;
        for (const auto& s : stats)
          if (s.m == m) row.push_back(s);
        if (row.size() < 3) continue;
        const auto rep = verify_exp_lemma(row);
        json r = to_json(rep);
        r["m"] = m;
        j["exp_lemma"].push_back(r);
        std::cout << fmt::format("exp lemma m={}: {} (C = {:.4g}, C0 = {:.4g})\n", m,
                                 rep.feasible ? "feasible" : "infeasible", rep.c, rep.c0);
      }
      run.write("results.csv", level_stats_csv(stats));
      run.write_json("results.json", j);
      run.finish();
      return 0;
    };
  });

  // poincare
  auto* pc = app.add_subcommand("poincare", "truncated Poincare series and delta_cr bracket");
  Common pc_common;
  add_common(pc, pc_common);
  MapArgs pc_map;
  add_map(pc, pc_map, 0.0);
  double pc_z = 4.0, pc_z_imag = 0.0, pc_delta = 1.0, pc_prune = 0.0;
  int pc_depth = 12;
  std::string pc_bracket;
  opt(pc, "--z", pc_z, "base point, real part");
  opt(pc, "--z-imag", pc_z_imag, "base point, imaginary part");
  opt(pc, "--delta", pc_delta);
  opt(pc, "--depth", pc_depth, "preimage tree depth J");
  opt(pc, "--prune", pc_prune, "drop branches lighter than this");
  pc->add_option("--bracket", pc_bracket, "comma-separated delta grid for the delta_cr bracket");
  pc->callback([&] {
    action = [&] {
      Run run(pc, pc_common);
      const auto map = pc_map.map();
      const cplx z(pc_z, pc_z_imag);
      const auto acc = poincare_partial_sums(map, z, pc_delta, pc_depth, pc_prune, pc_common.workers);
      const auto diag = divergence_diagnostic(acc);
      CsvWriter csv({"j", "level_mass", "partial_sum"});
      for (int k = 0; k <= acc.depth; ++k)
        csv.row({std::to_string(k), fmt_num(acc.level_mass[static_cast<std::size_t>(k)]),
                 fmt_num(acc.partial_sums[static_cast<std::size_t>(k)])});
      json j = to_json(acc, diag);
      std::cout << fmt::format("delta {}: S_J = {:.17g}, {} (growth {:.6g})\n", pc_delta, acc.partial_sums.back(),
                               to_string(diag.verdict), diag.growth);
      if (!pc_bracket.empty()) {
        const auto br = bound_delta_cr(map, z, pc_depth, parse_list(pc_bracket), pc_prune, pc_common.workers);
        json verdicts = json::array();
        for (const auto& [d, v] : br.verdicts) verdicts.push_back(json{{"delta", d}, {"verdict", to_string(v)}});
        j["bracket"] = json{{"low", br.low},
                            {"high", br.high},
                            {"low_is_grid_floor", br.low_is_grid_floor},
                            {"high_is_grid_ceiling", br.high_is_grid_ceiling},
                            {"verdicts", verdicts}};
        std::cout << fmt::format("delta_cr in [{}, {}]\n", br.low, br.high);
      }
      run.write("results.csv", csv.str());
      run.write_json("results.json", j);
      run.finish();
      return 0;
    };
  });

  // measure
  auto* ms = app.add_subcommand("measure", "cut-off conformal measure and covariance check");
  Common ms_common;
  add_common(ms, ms_common);
  MapArgs ms_map;
  add_map(ms, ms_map, -2.0);
  double ms_delta = 1.0, ms_cut = 0.1, ms_extent = 2.1, ms_side = 0.1;
  int ms_depth = 12;
  opt(ms, "--delta", ms_delta);
  opt(ms, "--cut", ms_cut, "cut-off radius r around the critical point");
  opt(ms, "--depth", ms_depth, "maximal preimage depth J");
  opt(ms, "--check-extent", ms_extent, "half-width of the covariance grid");
  opt(ms, "--check-side", ms_side, "covariance box side (0 skips the check)");
  ms->callback([&] {
    action = [&] {
      Run run(ms, ms_common);
      const auto map = ms_map.map();
      const auto mu = build_cutoff_measure(map, ms_delta, ms_cut, ms_depth);
      json j{{"delta", mu.delta},
             {"cut_radius", mu.cut_radius},
             {"max_depth", mu.max_depth},
             {"atoms", mu.atoms.size()},
             {"normalizer", mu.normalizer},
             {"total_mass", mu.total_mass},
             {"skipped_critical", mu.skipped_critical}};
      std::cout << fmt::format("{} atoms, normalizer {:.17g}\n", mu.atoms.size(), mu.normalizer);
      if (ms_side > 0) {
        const auto rep = check_covariance(mu, map, ms_delta, covariance_grid(ms_extent, ms_side));
        j["covariance"] = json{{"max_residual", rep.max_residual},
                               {"boxes_checked", rep.boxes_checked},
                               {"skipped_near_zero", rep.skipped_near_zero},
                               {"frontier_boxes", rep.frontier_boxes},
                               {"contains_zero", rep.contains_zero}};
        std::cout << fmt::format("covariance residual {:.3g} over {} boxes\n", rep.max_residual, rep.boxes_checked);
      }
      run.write("results.csv", atoms_csv(mu));
      run.write_json("results.json", j);
      run.finish();
      return 0;
    };
  });

  // trichotomy
  auto* tr = app.add_subcommand("trichotomy", "Lean / Balanced / Black-hole classification");
  Common tr_common;
  add_common(tr, tr_common);
  std::vector<std::string> tr_synthetic;
  std::string tr_input, tr_levels = "1..10";
  double tr_C = 10.0;
  tr->add_option("--synthetic", tr_synthetic, "sequences as eta=EXPR xi=EXPR in the variable m");
  tr->add_option("--input", tr_input, "results.csv of a stats run with --all-pairs");
  opt(tr, "--levels", tr_levels, "levels m for synthetic sequences");
  opt(tr, "--C", tr_C, "calibration constant");
  tr->callback([&] {
    action = [&] {
      if (tr_synthetic.empty() == tr_input.empty()) throw PreconditionError("give exactly one of --synthetic or --input");
      std::vector<int> levels;
      std::vector<double> eta, xi;
      if (!tr_synthetic.empty()) {
        std::string eta_expr, xi_expr;
        for (const auto& item : tr_synthetic) {
          const auto eq = item.find('=');
          const std::string key = eq == std::string::npos ? "" : item.substr(0, eq);
          if (key == "eta") eta_expr = item.substr(eq + 1);
          else if (key == "xi") xi_expr = item.substr(eq + 1);
          else throw PreconditionError(fmt::format("bad synthetic sequence '{}'", item));
        }
        if (eta_expr.empty() || xi_expr.empty()) throw PreconditionError("--synthetic needs eta=... and xi=...");
        const auto [a, b] = parse_level_range(tr_levels);
        for (int m = a; m <= b; ++m) {
          levels.push_back(m);
          eta.push_back(evaluate_sequence_expr(eta_expr, m));
          xi.push_back(evaluate_sequence_expr(xi_expr, m));
        }
      } else {
        for (const auto& s : level_stats_from_csv(tr_input)) {
          if (s.n != s.m + 1) continue;
          levels.push_back(s.m);
          eta.push_back(s.eta.value);
          xi.push_back(s.xi.value);
        }
      }
      Run run(tr, tr_common);
      auto [j, text] = trichotomy_summary(levels, eta, xi, tr_C);
      run.write_json("results.json", j);
      run.write("report.txt", text);
      std::cout << to_string(classify(eta, xi, tr_C).regime) << "\n";
      run.finish();
      return 0;
    };
  });

  // boxdim
  auto* bx = app.add_subcommand("boxdim", "box-counting dimension of the Julia set");
  Common bx_common;
  add_common(bx, bx_common);
  MapArgs bx_map;
  add_map(bx, bx_map, 0.0);
  std::string bx_window = "0.25,0.25,1";
  int bx_min_grid = 64, bx_max_grid = 2048, bx_sub = 2;
  std::int64_t bx_iters = 5000;
  bool bx_full_square = false;
  opt(bx, "--window", bx_window, "x0,y0,side of the square window");
  opt(bx, "--min-grid", bx_min_grid, "coarsest cells per side (power of two)");
  opt(bx, "--max-grid", bx_max_grid, "finest cells per side (power of two)");
  opt(bx, "--iters", bx_iters, "escape iterations");
  opt(bx, "--subsamples", bx_sub, "s, giving s x s samples per cell");
  bx->add_flag("--full-square", bx_full_square, "count a set that fills the window");
  bx->callback([&] {
    action = [&] {
      const auto w = parse_list(bx_window);
      if (w.size() != 3 || !(w[2] > 0)) throw PreconditionError("--window needs x0,y0,side with side > 0");
      if (bx_min_grid < 1 || bx_max_grid < bx_min_grid) throw PreconditionError("need 1 <= --min-grid <= --max-grid");
      const Window window{w[0], w[1], w[2]};
      std::vector<double> res;
      for (long k = bx_min_grid; k <= bx_max_grid; k *= 2) res.push_back(window.side / static_cast<double>(k));
      Run run(bx, bx_common);
      const BoxCount b =
          bx_full_square
              ? box_dimension([](cplx) { return PointSample{true, 0.0}; }, window, res, bx_sub, bx_common.workers)
              : box_dimension(bx_map.map(), window, res, bx_iters, bx_sub, bx_common.workers);
      CsvWriter csv({"eps", "count"});
      for (std::size_t i = 0; i < b.grid_sizes.size(); ++i) csv.row({fmt_num(b.grid_sizes[i]), std::to_string(b.counts[i])});
      run.write("results.csv", csv.str());
      run.write_json("results.json", to_json(b));
      run.pgm("raster.pgm", b.raster_width, b.raster_width, b.raster);
      std::cout << fmt::format("box dimension {:.4f} +- {:.4f}\n", b.slope, b.stderr_);
      run.finish();
      return 0;
    };
  });

  // scaling
  auto* sc = app.add_subcommand("scaling", "local scaling exponent of a cut-off measure");
  Common sc_common;
  add_common(sc, sc_common);
  MapArgs sc_map;
  add_map(sc, sc_map, -2.0);
  double sc_delta = 1.0, sc_cut = 0.001, sc_largest = 0.5;
  std::string sc_center = "beta";
  int sc_depth = 12;
  opt(sc, "--delta", sc_delta);
  opt(sc, "--cut", sc_cut);
  opt(sc, "--depth", sc_depth);
  opt(sc, "--largest", sc_largest, "largest disk radius");
  opt(sc, "--center", sc_center, "disk centre: re,im or beta (the repelling fixed point of z^2+c)");
  sc->callback([&] {
    action = [&] {
      Run run(sc, sc_common);
      const auto mu = build_cutoff_measure(sc_map.map(), sc_delta, sc_cut, sc_depth);
      cplx center;
      if (sc_center == "beta") {
        if (sc_map.degree != 2) throw PreconditionError("--center beta needs degree 2");
        center = 0.5 + std::sqrt(0.25 - cplx(sc_map.c, sc_map.c_imag));
      } else {
        const auto xy = parse_list(sc_center);
        if (xy.size() != 2) throw PreconditionError("--center needs re,im or beta");
        center = cplx(xy[0], xy[1]);
      }
      const auto radii = scaling_radii(mu, sc_largest);
      const auto fit = scaling_exponent(mu, center, radii);
      json j = to_json(fit);
      j["center"] = json::array({center.real(), center.imag()});
      try {
        const auto lc = log_correction_fit(mu, center, radii);
        j["log_correction"] = json{{"fit", to_json(lc.fit)}, {"consistent", lc.consistent}, {"dropped", lc.dropped}};
      } catch (const Error& e) {
        j["log_correction"] = json{{"error", e.what()}};
      }
      CsvWriter csv({"r", "mass"});
      for (double r : radii) csv.row({fmt_num(r), fmt_num(measure_of_disk(mu, center, r))});
      run.write("results.csv", csv.str());
      run.write_json("results.json", j);
      std::cout << fmt::format("sigma = {:.6g} +- {:.3g}\n", fit.sigma, fit.stderr_);
      run.finish();
      return 0;
    };
  });

  // fibonacci
  auto* fb = app.add_subcommand("fibonacci", "real Fibonacci maps: principal nest and escape statistics");
  Common fb_common;
  add_common(fb, fb_common);
  double fb_ell = 2.0, fb_samples = 0.0;
  int fb_depth = 10;
  std::uint64_t fb_seed = 1;
  std::int64_t fb_horizon = 100000;
  opt(fb, "--ell", fb_ell, "critical order");
  opt(fb, "--depth", fb_depth, "principal nest depth");
  opt(fb, "--samples", fb_samples, "samples for real escape statistics (0 skips)");
  opt(fb, "--seed", fb_seed);
  opt(fb, "--horizon", fb_horizon);
  fb->callback([&] {
    action = [&] {
      Run run(fb, fb_common);
      const quad a = find_fibonacci_parameter<quad>(fb_ell, fb_depth + 2, quad(1e-32));
      const RealUnimodalMap<quad> fq{fb_ell, a};
      const auto nest = build_principal_nest(fq, fb_depth);
      const auto geo = geometry_diagnostics(nest);
      json j = to_json(nest, geo);
      j["a"] = a.str(36, std::ios_base::scientific);
      CsvWriter csv({"n", "half_width", "return_time", "side_lo", "side_hi", "side_time", "ratio", "gap"});
      for (int n = 0; n <= nest.depth(); ++n) {
        const auto i = static_cast<std::size_t>(n);
        std::vector<std::string> row{std::to_string(n), fmt_num(nest.half_width(n))};
        if (n < nest.depth()) {
          const auto& br = nest.side_branches[i];
          row.insert(row.end(), {std::to_string(nest.return_times[i]), fmt_num(br.lo), fmt_num(br.hi),
                                 std::to_string(br.time), fmt_num(geo.ratios[i]),
                                 i < geo.gaps.size() ? fmt_num(geo.gaps[i]) : ""});
        } else {
          row.insert(row.end(), {"", "", "", "", "", ""});
        }
        csv.row(row);
      }
      run.write("results.csv", csv.str());
      std::cout << fmt::format("ell {}: a = {}  geometry {}\n", fb_ell, a.str(20), to_string(geo.verdict));
      if (fb_samples > 0) {
        run.seed(fb_seed);
        const RealUnimodalMap<double> fd{fb_ell, static_cast<double>(a)};
        SamplingOptions opt;
        opt.samples = as_count(fb_samples, "--samples");
        opt.seed = fb_seed;
        opt.horizon = fb_horizon;
        opt.workers = fb_common.workers;
        CsvWriter sc({"m", "n", "eta", "eta_lo", "eta_hi", "xi", "xi_lo", "xi_hi", "rho", "xi_censored"});
        std::vector<double> eta, xi;
        bool zero_seen = false;
        for (int n = 1; n < nest.depth(); ++n) {
          const auto s = real_escape_stats(fd, nest, 0, n, opt);
          sc.row({"0", std::to_string(n), fmt_num(s.eta.value), fmt_num(s.eta.ci_low),
                  fmt_num(s.eta.ci_high), fmt_num(s.xi.value), fmt_num(s.xi.ci_low), fmt_num(s.xi.ci_high),
                  fmt_num(s.rho), fmt_num(s.xi_censored_fraction)});
          // classification stops at the first level without events
          zero_seen = zero_seen || !(s.eta.value > 0 && s.xi.value > 0);
          if (!zero_seen) {
            eta.push_back(s.eta.value);
            xi.push_back(s.xi.value);
          }
        }
        run.write("stats.csv", sc.str());
        const auto wild = wild_attractor_indicator(fd, nest, std::max(1, nest.depth() - 1), opt.samples, opt.horizon, fb_seed,
                                                   fb_common.workers);
        j["wild_indicator"] = to_json(wild);
        try {
          const auto v = classify(eta, xi);
          j["trichotomy"] = to_json(v);
          std::cout << "trichotomy: " << to_string(v.regime) << "\n";
        } catch (const Error& e) {
          j["trichotomy"] = json{{"error", e.what()}};
          std::cout << "trichotomy: not classifiable (" << e.what() << ")\n";
        }
      }
      run.write_json("results.json", j);
      run.finish();
      return 0;
    };
  });

  // report
  auto* rp = app.add_subcommand("report", "one-page summary of a stats run");
  Common rp_common;
  add_common(rp, rp_common);
  std::string rp_input, rp_omega;
  double rp_C = 10.0;
  rp->add_option("--input", rp_input, "results.csv of a stats run with --all-pairs")->required();
  rp->add_option("--omega", rp_omega, "CSV with columns m, omega (values of omega_m(2))");
  opt(rp, "--C", rp_C);
  rp->callback([&] {
    action = [&] {
      const auto stats = level_stats_from_csv(rp_input);
      std::vector<int> levels;
      std::vector<double> eta, xi;
      std::vector<LevelQuantities> quantities;
      for (const auto& s : stats) {
        if (s.n != s.m + 1) continue;
        levels.push_back(s.m);
        eta.push_back(s.eta.value);
        xi.push_back(s.xi.value);
        quantities.push_back(LevelQuantities{s.m, s.eta.value, s.xi.value, s.rho.value, 0.0});
      }
      Run run(rp, rp_common);
      json j;
      std::string text;
      if (levels.size() >= 4) {
        auto [tj, tt] = trichotomy_summary(levels, eta, xi, rp_C);
        j["trichotomy"] = tj;
        text = tt;
      } else {
        text = fmt::format("trichotomy report\n\nonly {} consecutive levels, classification needs 4\n", levels.size());
      }
      std::map<int, std::vector<LevelStats>> by_m;
      for (const auto& s : stats) by_m[s.m].push_back(s);
      j["exp_lemma"] = json::array();
      for (const auto& [m, row] : by_m) {
        if (row.size() < 3) continue;
        const auto rep = verify_exp_lemma(row);
        json r = to_json(rep);
        r["m"] = m;
        j["exp_lemma"].push_back(r);
        text += fmt::format("exp lemma m={}: {} with C = {:.4g}, C0 = {:.4g}\n", m, rep.feasible ? "feasible" : "infeasible",
                            rep.c, rep.c0);
      }
      if (!rp_omega.empty()) {
        std::map<int, double> omega;
        for (const auto& row : read_csv(rp_omega)) omega[static_cast<int>(cell(row, "m"))] = cell(row, "omega");
        std::vector<LevelQuantities> have;
        for (auto q : quantities)
          if (omega.count(q.m)) {
            q.omega = omega[q.m];
            have.push_back(q);
          }
        const auto rep = omega_consistency_report(have);
        json rows = json::array();
        for (const auto& r : rep.rows) {
          rows.push_back(json{{"m", r.m},
                              {"zero_area_ratio", r.zero_area_ratio},
                              {"zero_area_flag", r.zero_area_flag},
                              {"square_ratio", r.square_ratio ? json(*r.square_ratio) : json(nullptr)},
                              {"square_flag", r.square_flag}});
          text += fmt::format("omega m={}: zero-area ratio {:.4g}{}{}\n", r.m, r.zero_area_ratio,
                              r.zero_area_flag ? " (flagged)" : "",
                              r.square_ratio ? fmt::format(", square ratio {:.4g}{}", *r.square_ratio,
                                                           r.square_flag ? " (flagged)" : "")
                                             : "");
        }
        j["omega_consistency"] = json{{"rows", rows}, {"flagged", rep.flagged}};
      }
      run.write_json("results.json", j);
      run.write("report.txt", text);
      std::cout << text;
      run.finish();
      return 0;
    };
  });

  // replay
  auto* rl = app.add_subcommand("replay", "rerun a manifest and compare output digests");
  std::string rl_manifest, rl_out;
  std::size_t rl_workers = 0;
  rl->add_option("manifest", rl_manifest, "manifest.json of an earlier run")->required()->check(CLI::ExistingFile);
  rl->add_option("--out", rl_out, "directory for the replayed run")->required();
  rl->add_option("--workers", rl_workers, "override the recorded worker count");
  rl->callback([&] {
    action = [&] {
      const auto m = manifest_from_json(json::parse(read_text(rl_manifest)));
      if (m.version != FEIGEN_VERSION)
        std::cerr << fmt::format("warning: manifest written by version {}, running {}\n", m.version, FEIGEN_VERSION);
      fs::create_directories(rl_out);
      const fs::path cfg = fs::path(rl_out) / "replay-config.ini";
      write_text(cfg, m.config);
      std::vector<std::string> sub{args.empty() ? "feigenlab" : args[0], "--config", cfg.string(), m.command, "--out", rl_out};
      if (rl_workers > 0) sub.insert(sub.end(), {"--workers", std::to_string(rl_workers)});
      const int rc = cli_dispatch(sub);
      fs::remove(cfg);
      if (rc != 0) return rc;
      int mismatches = 0;
      for (const auto& [file, digest] : m.digests) {
        const fs::path p = fs::path(rl_out) / file;
        const bool same = fs::exists(p) && sha256_file(p) == digest;
        if (!same) ++mismatches;
        std::cout << fmt::format("{} {}\n", same ? "identical" : "DIFFERS  ", file);
      }
      std::cout << (mismatches == 0 ? "replay reproduced all outputs\n" : "replay differs\n");
      return mismatches == 0 ? 0 : 1;
    };
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    return action ? action() : 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cli_dispatch(int argc, const char* const* argv) {
  return cli_dispatch(std::vector<std::string>(argv, argv + argc));
}

}  // namespace feigen
