#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using ctap::cli::RunConfig;

void add_schedule_flags(CLI::App* sub, RunConfig& c) {
  sub->add_option("--omega0-tp", c.omega0_tp, "peak hopping rate times T_p")->capture_default_str();
  sub->add_option("--tau-tp", c.tau_tp, "pulse separation in units of T_p")->capture_default_str();
  sub->add_option("--sigma", c.sigma, "omega3 amplitude relative to omega0 (tri)");
  sub->add_option("--schedule", c.schedule_file, "pulse schedule JSON overriding the preset");
}

void add_common_flags(CLI::App* sub, RunConfig& c) {
  sub->add_option("--model", c.model, "model name")->capture_default_str();
  sub->add_option("--n", c.n, "boson number N")->capture_default_str();
  sub->add_option("--dt", c.dt, "fixed RK4 step in T_p (0 = automatic)")->capture_default_str();
  sub->add_option("--output-dir", c.output_dir, "output directory (default $CTAP_OUTPUT_DIR or .)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CTAP lattice simulations and factorization oracles"};
  app.require_subcommand(1);
  RunConfig c;

  auto* run = app.add_subcommand("run", "propagate a model and write traces and a summary");
  add_common_flags(run, c);
  add_schedule_flags(run, c);
  run->add_option("--initial", c.initial, "start site: 1..9 (rect) or n,m (tri, halfsquare)");
  run->add_option("--samples", c.spectrum_samples, "spectrum sample count")->capture_default_str();
  run->add_option("--rates", c.ising_rates, "omega1 omega2 omega3 for ionmap")->expected(3);
  run->add_flag("--amplitudes", c.amplitudes, "also write complex amplitudes");

  auto* oracle = app.add_subcommand("oracle", "compare factorized and direct propagators");
  add_common_flags(oracle, c);
  oracle->add_option("--seed", c.seed, "random schedule seed")->capture_default_str();
  oracle->add_option("--count", c.count, "number of random schedules")->capture_default_str();
  oracle->add_option("--schedule", c.schedule_file, "fixed schedule JSON instead of random draws");

  auto* sweep = app.add_subcommand("sweep", "fidelity and minimum gap over a parameter grid");
  add_common_flags(sweep, c);
  add_schedule_flags(sweep, c);
  sweep->add_option("--initial", c.initial, "start site");
  sweep->add_option("--param", c.param, "omega0-tp, tau-tp or sigma")->capture_default_str();
  sweep->add_option("--values", c.grid, "grid values")->delimiter(',')->required();
  sweep->add_option("--samples", c.spectrum_samples, "spectrum sample count")->capture_default_str();

  auto* spectrum = app.add_subcommand("spectrum", "continuity-tracked three-level spectrum");
  add_common_flags(spectrum, c);
  add_schedule_flags(spectrum, c);
  spectrum->add_option("--samples", c.spectrum_samples, "sample count")->capture_default_str();

  auto* ionmap = app.add_subcommand("ionmap", "Ising coupling matrix of the linearized lattice");
  ionmap->add_option("--n", c.n, "boson number N")->capture_default_str();
  ionmap->add_option("--rates", c.ising_rates, "omega1 omega2 omega3")->expected(3);
  ionmap->add_option("--output-dir", c.output_dir, "output directory");

  auto* dark = app.add_subcommand("darkstate", "dark-state residuals on random rates");
  add_common_flags(dark, c);
  dark->add_option("--seed", c.seed, "rate seed")->capture_default_str();
  dark->add_option("--count", c.count, "number of rate tuples")->capture_default_str();

  c.model = "rect";
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : ctap::cli::kExitValidation;
  }

  if (run->parsed()) return ctap::cli::cmd_run(c);
  if (oracle->parsed()) return ctap::cli::cmd_oracle(c);
  if (sweep->parsed()) return ctap::cli::cmd_sweep(c);
  if (spectrum->parsed()) {
    c.model = "spectrum";
    return ctap::cli::cmd_spectrum(c);
  }
  if (ionmap->parsed()) return ctap::cli::cmd_ionmap(c);
  if (dark->parsed()) return ctap::cli::cmd_darkstate(c);
  return ctap::cli::kExitValidation;
}
