// decohere: run decoherence scenarios, print presets, run the analytic battery.
//
//   decohere run --scenario fig1 [--config FILE] [--seed N] [--env-seed N]
//                [--dt X] [--steps N] [--record-every N] [--out FILE]
//   decohere validate [--seed N] [--samples N] [--inject X]
//   decohere preset NAME
//
// Exit codes: 0 success, 1 invalid input or failed checks, 2 invariant violation.

#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "decohere/harness.hpp"

namespace h = decohere::harness;

namespace {

int run(const std::string& scenario, const std::string& config_path, const std::optional<std::uint64_t>& seed,
        const std::optional<std::uint64_t>& env_seed, const std::optional<double>& dt,
        const std::optional<std::size_t>& steps, const std::optional<std::size_t>& record_every,
        const std::optional<std::string>& out) {
  auto cfg = h::preset(scenario);
  if (!config_path.empty()) cfg = h::load_config(config_path, cfg);
  if (seed) cfg.seed = *seed;
  if (env_seed) cfg.env_seed = *env_seed;
  if (dt) cfg.dt = *dt;
  if (steps) cfg.steps = *steps;
  if (record_every) cfg.record_every = *record_every;
  if (out) cfg.out = *out;

  const auto res = h::run_scenario(cfg);
  const auto& first = res.trajectory.records.front();
  const auto& last = res.trajectory.records.back();
  std::printf("%s: %zu records, t_end=%g, wall %.1fs\n", cfg.scenario.c_str(), res.trajectory.records.size(),
              last.t, res.wall_seconds);
  std::printf("  q_d %.6g -> %.6g   min_pt_eig %.6g -> %.6g   neg_count %zu\n", first.q_d, last.q_d,
              first.min_pt_eig, last.min_pt_eig, last.neg_count);
  std::printf("  q_d fit: exp r2 %.4f, gauss r2 %.4f -> %s\n", res.fit.exp_r2, res.fit.gauss_r2,
              h::to_string(res.fit.verdict));
  if (!cfg.out.empty())
    std::printf("  wrote %s and %s\n", cfg.out.c_str(), h::summary_path(cfg.out).string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pure-mixed entanglement and decoherence laboratory"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Evolve a scenario and write its trajectory CSV and JSON summary");
  std::string scenario = "custom", config_path;
  std::optional<std::uint64_t> seed, env_seed;
  std::optional<double> dt;
  std::optional<std::size_t> steps, record_every;
  std::optional<std::string> out;
  run_cmd->add_option("--scenario", scenario, "Preset to start from")
      ->check(CLI::IsMember(h::preset_names()));
  run_cmd->add_option("--config", config_path, "key = value file applied over the preset")->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", seed, "Coupling-matrix seed");
  run_cmd->add_option("--env-seed", env_seed, "Environment-state seed");
  run_cmd->add_option("--dt", dt, "Time step");
  run_cmd->add_option("--steps", steps, "Number of steps");
  run_cmd->add_option("--record-every", record_every, "Steps between records");
  run_cmd->add_option("--out", out, "Trajectory CSV path (summary goes next to it as .json)");

  auto* val_cmd = app.add_subcommand("validate", "Run the analytic-vs-numerical check battery");
  h::ValidateOptions vopt;
  val_cmd->add_option("--seed", vopt.seed, "Random-parameter seed");
  val_cmd->add_option("--samples", vopt.samples, "Random parameter sets per check");
  val_cmd->add_option("--inject", vopt.inject_perturbation, "Off-diagonal perturbation added to rho*");

  auto* preset_cmd = app.add_subcommand("preset", "Print a preset as a config file");
  std::string preset_name;
  preset_cmd->add_option("name", preset_name)->required()->check(CLI::IsMember(h::preset_names()));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) return run(scenario, config_path, seed, env_seed, dt, steps, record_every, out);
    if (*val_cmd) {
      const auto report = h::validate_suite(vopt);
      std::cout << report.table();
      return report.all_passed() ? 0 : 1;
    }
    if (*preset_cmd) {
      std::cout << h::serialize_config(h::preset(preset_name));
      return 0;
    }
  } catch (const decohere::InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
