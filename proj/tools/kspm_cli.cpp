#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

using namespace kspm;
using namespace kspm::cli;

struct Options {
  std::string config;
  Overrides overrides;
  std::optional<std::string> out;
  std::string field;
  std::vector<std::string> norms{"lp:1", "lp:2", "hs:-1", "hs:1", "grad:2", "h1:4"};
};

void add_run_flags(CLI::App* cmd, Options& o, bool with_paths) {
  cmd->add_option("--config", o.config, "configuration file (key = value lines)")->required();
  cmd->add_option("--out", o.overrides.out, "output directory (overrides the output key)");
  cmd->add_option("--seed", o.overrides.seed, "base seed (overrides the seed key)");
  cmd->add_option("--resolution", o.overrides.resolution, "cells per direction");
  cmd->add_option("--method", o.overrides.method, "direct or picard");
  if (with_paths) cmd->add_option("--paths", o.overrides.paths, "number of Monte Carlo paths");
}

int run(int argc, char** argv) {
  CLI::App app{"Stochastic porous-medium Keller-Segel solver"};
  app.require_subcommand(1);
  Options o;
  auto* simulate_cmd = app.add_subcommand("simulate", "integrate one path and write snapshots");
  auto* ensemble_cmd = app.add_subcommand("ensemble", "Monte Carlo moment estimates");
  auto* fixed_cmd = app.add_subcommand("fixed-point", "Picard iteration report for one path");
  auto* verify_cmd = app.add_subcommand("verify", "run the invariant suite");
  auto* norms_cmd = app.add_subcommand("norms", "evaluate norms of a snapshot file");
  add_run_flags(simulate_cmd, o, false);
  add_run_flags(ensemble_cmd, o, true);
  add_run_flags(fixed_cmd, o, false);
  verify_cmd->add_option("--out", o.out, "also write verify.csv here");
  norms_cmd->add_option("--field", o.field, "snapshot file")->required();
  norms_cmd->add_option("--norm", o.norms, "lp:P, hs:S, bessel:S:P, grad:P or h1:P (repeatable)");
  norms_cmd->add_option("--out", o.out, "write norms.csv here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage;
  }

  try {
    if (*verify_cmd) return verify_suite(o.out);
    if (*norms_cmd) return norms(o.field, o.norms, o.out);
    const RunConfig c = load_config(o.config, o.overrides);
    if (*simulate_cmd) return simulate(c);
    if (*ensemble_cmd) return ensemble(c);
    return fixed_point(c);
  } catch (const ConfigError& e) {
    for (const auto& msg : e.errors()) std::cerr << "kspm: config error: " << msg << '\n';
    return usage;
  } catch (const InvalidArgument& e) {
    std::cerr << "kspm: " << e.what() << '\n';
    return usage;
  } catch (const FormatError& e) {
    std::cerr << "kspm: " << e.what() << '\n';
    return usage;
  } catch (const NumericalFailure& e) {
    report_failure(e.what());
    return numerical;
  } catch (const std::exception& e) {
    std::cerr << "kspm: " << e.what() << '\n';
    return usage;
  }
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
