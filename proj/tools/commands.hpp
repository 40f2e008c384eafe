#ifndef KSPM_TOOLS_COMMANDS_HPP
#define KSPM_TOOLS_COMMANDS_HPP

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "kspm/config.hpp"
#include "kspm/norms.hpp"
#include "kspm/snapshot_io.hpp"
#include "kspm/verification.hpp"

namespace kspm::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

inline constexpr const char* kArtifactVersion = "1.0.0";

enum ExitCode : int { ok = 0, usage = 1, numerical = 2, verification = 3 };

/// Command-line values that replace configuration keys.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<int> resolution;
  std::optional<std::string> method;
  std::optional<std::string> out;
};

inline std::string num(double v) { return detail::format_double(v); }

/// Rows of comma separated cells, written in one piece.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header) { row(header); }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) text_ += (k ? "," : "") + cells[k];
    text_ += '\n';
  }

  const std::string& text() const noexcept { return text_; }

 private:
  std::string text_;
};

/// Output directory plus the index of everything written into it.
class RunDirectory {
 public:
  RunDirectory(fs::path root, std::string command) : root_(std::move(root)) {
    fs::create_directories(root_);
    manifest_["artifact"] = "kspm";
    manifest_["artifact_version"] = kArtifactVersion;
    manifest_["snapshot_format_version"] = kSnapshotVersion;
    manifest_["command"] = std::move(command);
  }

  json& manifest() { return manifest_; }

  void write_text(const std::string& name, const std::string& text) {
    std::ofstream out(root_ / name, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + (root_ / name).string());
    out << text;
    if (!out) throw FormatError("failed writing " + (root_ / name).string());
    manifest_["outputs"].push_back({{"file", name}, {"bytes", text.size()}});
  }

  json write_field(const std::string& name, const Field& f) {
    fs::create_directories((root_ / name).parent_path());
    write_snapshot(f, root_ / name);
    return {{"file", name}, {"bytes", snapshot_bytes(f.grid())}};
  }

  /// Writes manifest.json; wall-clock and thread count sit under "runtime".
  void finish(double seconds, unsigned threads) {
    manifest_["runtime"] = {{"wall_clock_seconds", seconds}, {"threads", threads}};
    std::ofstream out(root_ / "manifest.json", std::ios::trunc);
    out << manifest_.dump(2) << '\n';
    if (!out) throw FormatError("failed writing " + (root_ / "manifest.json").string());
  }

 private:
  fs::path root_;
  json manifest_;
};

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read configuration file " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Reads the configuration, applies the command-line overrides and checks
/// the realized initial data.
inline RunConfig load_config(const fs::path& path, const Overrides& o) {
  RunConfig c = parse_config(read_text(path));
  std::vector<std::string> errors;
  if (o.seed) c.ensemble.base_seed = *o.seed;
  if (o.paths) c.ensemble.num_paths = *o.paths;
  if (o.resolution) c.ensemble.resolution = *o.resolution;
  if (o.method) {
    if (*o.method == "direct") c.ensemble.method = Method::direct;
    else if (*o.method == "picard") c.ensemble.method = Method::picard;
    else errors.push_back("--method: '" + *o.method + "' is not one of direct, picard");
  }
  if (o.out) c.output = *o.out;
  for (auto& v : c.ensemble.violations()) errors.push_back(std::move(v));
  if (errors.empty()) {
    const Grid g = c.ensemble.grid();
    const ModelParams& p = c.ensemble.params;
    for (const auto* ic : {&c.ensemble.u0, &c.ensemble.v0}) {
      const char* which = ic == &c.ensemble.u0 ? "u0" : "v0";
      try {
        if (ic->realize(g, p.gamma, p.r_u).min() < 0.0) {
          errors.push_back(std::string(which) + " must be nonnegative (" + which + " >= 0)");
        }
      } catch (const std::exception& e) {
        errors.push_back(std::string(which) + ": " + e.what());
      }
    }
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

inline json config_echo(const RunConfig& c) {
  json j = json::object();
  for (const auto& [key, value] : config_entries(c)) j[key] = value;
  return j;
}

inline json seeds_json(const EnsembleConfig& e, std::size_t paths) {
  json list = json::array();
  for (std::size_t i = 0; i < paths; ++i) {
    const auto [su, sv] = path_seeds(e.base_seed, i);
    list.push_back({{"path", i}, {"w1", su}, {"w2", sv}});
  }
  return {{"base", e.base_seed}, {"paths", list}};
}

inline void begin(RunDirectory& dir, const RunConfig& c, std::size_t paths) {
  const Grid g = c.ensemble.grid();
  dir.manifest()["config"] = config_echo(c);
  dir.manifest()["grid"] = {{"nx", g.nx()}, {"ny", g.ny()}, {"domain", "[0,1]x[0,1]"}};
  dir.manifest()["seeds"] = seeds_json(c.ensemble, paths);
  dir.write_text("config.txt", to_text(c));
}

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline Csv functionals_csv(const PathFunctionals& f) {
  Csv csv({"metric", "value"});
  csv.row({"q1", num(f.q1)});
  csv.row({"q1_alt", num(f.q1_alt)});
  csv.row({"q2", num(f.q2)});
  csv.row({"q3", num(f.q3)});
  csv.row({"q3_alt", num(f.q3_alt)});
  csv.row({"q4", num(f.q4)});
  csv.row({"u_l2_final", num(f.u_l2_final)});
  csv.row({"mass_initial", num(f.mass_initial)});
  csv.row({"mass_final", num(f.mass_final)});
  csv.row({"min_u", num(f.min_u)});
  csv.row({"min_v", num(f.min_v)});
  csv.row({"max_v", num(f.max_v)});
  csv.row({"clip_count", std::to_string(f.clip_count)});
  csv.row({"steps", std::to_string(f.steps)});
  return csv;
}

inline void report_failure(const std::string& what) { std::cerr << "kspm: numerical failure: " << what << '\n'; }

/// One path with snapshots, snapshots.csv and summary.csv.
inline int simulate(const RunConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  const EnsembleConfig& e = c.ensemble;
  RunDirectory dir(c.output, "simulate");
  begin(dir, c, 1);
  const SpectralBasis basis(e.grid());
  PathResult r;
  try {
    r = simulate_path(e, basis, 0);
  } catch (const NumericalFailure& err) {
    dir.manifest()["failures"] = {{"count", 1}, {"messages", {err.what()}}};
    dir.finish(seconds_since(start), 1);
    report_failure(err.what());
    return numerical;
  }
  const PathTrajectory& t = r.trajectory;
  const PathFunctionals f = path_functionals(basis, t, e.params);

  Csv snaps({"index", "step", "time", "mass_u", "min_u", "max_u", "min_v", "max_v", "u_file", "v_file"});
  json index = json::array();
  for (std::size_t k = 0; k < t.times.size(); ++k) {
    const Field& u = t.u_path[k];
    const Field& v = t.v_path[k];
    char stem[32];
    std::snprintf(stem, sizeof stem, "%05zu.kspm", k);
    std::string uf, vf;
    json entry = {{"index", k}, {"step", t.steps[k]}, {"time", t.times[k]}};
    if (c.write_fields) {
      uf = std::string("fields/u_") + stem;
      vf = std::string("fields/v_") + stem;
      entry["u"] = dir.write_field(uf, u);
      entry["v"] = dir.write_field(vf, v);
    }
    index.push_back(entry);
    snaps.row({std::to_string(k), std::to_string(t.steps[k]), num(t.times[k]), num(integral(u)), num(u.min()),
               num(u.max()), num(v.min()), num(v.max()), uf, vf});
  }
  dir.manifest()["snapshots"] = index;
  dir.write_text("snapshots.csv", snaps.text());

  Csv summary = functionals_csv(f);
  summary.row({"method", to_string(e.method)});
  summary.row({"integrator", to_string(e.integrator)});
  summary.row({"t_final", num(t.times.back())});
  summary.row({"total_steps", std::to_string(t.total_steps)});
  summary.row({"mass_relative_drift", num(f.mass_initial != 0.0 ? f.mass_final / f.mass_initial - 1.0 : 0.0)});
  summary.row({"clip_fraction", num(t.diagnostics.clip_fraction())});
  summary.row({"max_cfl_ratio", num(t.diagnostics.max_cfl_ratio)});
  if (e.u0.kind == InitialCondition::Kind::barenblatt) {
    const Barenblatt exact = Barenblatt::with_mass(e.u0.mass, e.params.gamma, e.params.r_u);
    summary.row({"barenblatt_l1_error", num(exact.l1_error(t.u_path.back(), e.u0.t0 + t.times.back()))});
  }
  if (r.fixed_point) {
    summary.row({"picard_iterations", std::to_string(r.fixed_point->iterations)});
    summary.row({"picard_converged", r.fixed_point->converged ? "true" : "false"});
    summary.row({"picard_final_distance", num(r.fixed_point->distances.back())});
  }
  dir.write_text("summary.csv", summary.text());
  dir.manifest()["failures"] = {{"count", 0}, {"messages", json::array()}};
  dir.finish(seconds_since(start), 1);
  return ok;
}

inline void estimate_row(Csv& csv, const std::string& name, const Estimate& est, std::size_t n) {
  csv.row({name, num(est.mean), num(est.se), std::to_string(n)});
}

/// Monte Carlo moments with standard errors plus per-path values.
inline int ensemble(const RunConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  const EnsembleConfig& e = c.ensemble;
  RunDirectory dir(c.output, "ensemble");
  begin(dir, c, e.num_paths);
  const unsigned threads = worker_count(e.num_paths);
  const MomentEstimates m = run_ensemble(e, threads);
  const std::size_t n = m.accepted.size();

  Csv moments({"quantity", "mean", "se", "paths"});
  estimate_row(moments, "q1", m.q1, n);
  estimate_row(moments, "q1_alt", m.q1_alt, n);
  estimate_row(moments, "q2", m.q2, n);
  estimate_row(moments, "q3", m.q3, n);
  estimate_row(moments, "q3_alt", m.q3_alt, n);
  estimate_row(moments, "q4", m.q4, n);
  estimate_row(moments, "u_l2_final", m.u_l2_final, n);
  for (const auto& [name, value] : std::vector<std::pair<std::string, double>>{
           {"u0_lg", m.u0_lg}, {"u0_hm1_sq", m.u0_hm1_sq}, {"v0_l4", m.v0_l4}, {"v0_l4_4", m.v0_l4_4},
           {"min_u", m.min_u}, {"min_v", m.min_v}, {"max_v", m.max_v}, {"clip_fraction", m.clip_fraction}}) {
    moments.row({name, num(value), "", std::to_string(n)});
  }
  moments.row({"failures", std::to_string(m.failures), "", std::to_string(m.paths_requested)});
  moments.row({"picard_nonconverged", std::to_string(m.picard_nonconverged), "", std::to_string(n)});
  dir.write_text("moments.csv", moments.text());

  Csv per_path({"path", "q1", "q1_alt", "q2", "q3", "q3_alt", "q4", "u_l2_final", "mass_initial", "mass_final",
                "min_u", "min_v", "max_v", "clip_count", "steps"});
  for (std::size_t k = 0; k < n; ++k) {
    const PathFunctionals& f = m.per_path[k];
    per_path.row({std::to_string(m.accepted[k]), num(f.q1), num(f.q1_alt), num(f.q2), num(f.q3), num(f.q3_alt),
                  num(f.q4), num(f.u_l2_final), num(f.mass_initial), num(f.mass_final), num(f.min_u), num(f.min_v),
                  num(f.max_v), std::to_string(f.clip_count), std::to_string(f.steps)});
  }
  dir.write_text("per_path.csv", per_path.text());
  dir.manifest()["failures"] = {{"count", m.failures}, {"messages", m.failure_messages}};
  dir.finish(seconds_since(start), threads);
  if (m.failed()) {
    report_failure(std::to_string(m.failures) + " of " + std::to_string(m.paths_requested) + " paths failed");
    return numerical;
  }
  return ok;
}

/// Picard iteration on path 0, compared with the direct solve of the same path.
inline int fixed_point(RunConfig c) {
  const auto start = std::chrono::steady_clock::now();
  c.ensemble.method = Method::picard;
  if (c.ensemble.integrator == Integrator::heun) {
    throw ConfigError({"fixed-point: integrator heun requires method direct"});
  }
  const EnsembleConfig& e = c.ensemble;
  RunDirectory dir(c.output, "fixed-point");
  begin(dir, c, 1);
  const SpectralBasis basis(e.grid());
  PathResult picard, direct;
  try {
    picard = simulate_path(e, basis, 0);
    EnsembleConfig d = e;
    d.method = Method::direct;
    direct = simulate_path(d, basis, 0);
  } catch (const NumericalFailure& err) {
    dir.manifest()["failures"] = {{"count", 1}, {"messages", {err.what()}}};
    dir.finish(seconds_since(start), 1);
    report_failure(err.what());
    return numerical;
  }
  const FixedPointReport& r = *picard.fixed_point;
  Csv iterations({"iteration", "distance", "ratio"});
  for (std::size_t k = 0; k < r.distances.size(); ++k) {
    const double ratio = k > 0 && r.distances[k - 1] > 0.0 ? r.distances[k] / r.distances[k - 1] : 0.0;
    iterations.row({std::to_string(k + 1), num(r.distances[k]), k > 0 ? num(ratio) : ""});
  }
  dir.write_text("iterations.csv", iterations.text());

  Csv summary({"metric", "value"});
  summary.row({"iterations", std::to_string(r.iterations)});
  summary.row({"converged", r.converged ? "true" : "false"});
  summary.row({"monotone", r.monotone ? "true" : "false"});
  summary.row({"tolerance", num(r.tolerance)});
  summary.row({"final_distance", num(r.distances.back())});
  summary.row({"gap_to_direct", num(xnorm_distance(basis, picard.trajectory.u_path, direct.trajectory.u_path))});
  summary.row({"steps", std::to_string(picard.trajectory.total_steps)});
  dir.write_text("summary.csv", summary.text());
  dir.manifest()["failures"] = {{"count", r.converged ? 0 : 1},
                                {"messages", r.converged ? json::array() : json::array({"picard did not converge"})}};
  dir.finish(seconds_since(start), 1);
  if (!r.converged) {
    report_failure("Picard iteration did not reach tolerance " + num(r.tolerance) + " in " +
                   std::to_string(r.iterations) + " iterations");
    return numerical;
  }
  return ok;
}

/// Quick invariant suite; prints one line per check.
inline int verify_suite(const std::optional<std::string>& out) {
  const auto start = std::chrono::steady_clock::now();
  const auto results = run_verification();
  Csv csv({"check", "passed", "detail"});
  bool all = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    csv.row({r.name, r.passed ? "true" : "false", "\"" + r.detail + "\""});
    all = all && r.passed;
  }
  if (out) {
    RunDirectory dir(*out, "verify");
    dir.write_text("verify.csv", csv.text());
    dir.manifest()["failures"] = {{"count", static_cast<int>(!all)}};
    dir.finish(seconds_since(start), 1);
  }
  return all ? ok : verification;
}

/// Evaluates norm requests on one snapshot file.
inline int norms(const std::string& field_path, const std::vector<std::string>& requests,
                 const std::optional<std::string>& out) {
  std::vector<NormRequest> parsed;
  for (const auto& text : requests) parsed.push_back(NormRequest::parse(text));
  const Field f = read_snapshot(field_path);
  const SpectralBasis basis(f.grid());
  Csv csv({"norm", "value"});
  for (const auto& r : parsed) csv.row({r.label(), num(r.evaluate(basis, f))});
  if (out) {
    RunDirectory dir(*out, "norms");
    dir.manifest()["field"] = field_path;
    dir.manifest()["grid"] = {{"nx", f.grid().nx()}, {"ny", f.grid().ny()}};
    dir.write_text("norms.csv", csv.text());
    dir.finish(0.0, 1);
  } else {
    std::cout << csv.text();
  }
  return ok;
}

}  // namespace kspm::cli

#endif  // KSPM_TOOLS_COMMANDS_HPP
