// wgldos command-line driver: spectrum, modes, rates, map, validate.
// Exit codes: 0 success, 1 validation or physics error, 2 config or usage error.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "json.hpp"
#include "output.hpp"
#include "wgldos/errors.hpp"

namespace {

using wgldos::cli::Overrides;
using wgldos::cli::RunConfig;

std::string kind_of(const std::exception& e) {
  if (dynamic_cast<const wgldos::ConfigError*>(&e)) return "config";
  if (dynamic_cast<const wgldos::NoModeError*>(&e)) return "no_mode";
  if (dynamic_cast<const wgldos::GeometryError*>(&e)) return "geometry";
  if (dynamic_cast<const wgldos::RangeError*>(&e)) return "range";
  if (dynamic_cast<const wgldos::SingularityError*>(&e)) return "singularity";
  if (dynamic_cast<const wgldos::DomainError*>(&e)) return "domain";
  if (dynamic_cast<const wgldos::NumericalError*>(&e)) return "numerical";
  if (dynamic_cast<const wgldos::UsageError*>(&e)) return "usage";
  if (dynamic_cast<const wgldos::InconsistencyError*>(&e)) return "inconsistency";
  return "internal";
}

int report(const std::exception& e, const std::string& command, const std::string& out_dir) {
  nlohmann::json err{{"kind", kind_of(e)}, {"message", e.what()}, {"command", command}};
  if (const auto* c = dynamic_cast<const wgldos::cli::ConfigError*>(&e)) {
    err["message"] = c->bare_message();
    if (c->line() > 0) {
      err["line"] = c->line();
      err["column"] = c->column();
    }
  }
  const nlohmann::json doc{{"error", err}, {"version", wgldos::cli::kVersion}};
  std::cerr << doc.dump() << '\n';
  if (command == "modes" && !out_dir.empty() && kind_of(e) != "config") {
    try {
      wgldos::cli::write_file(out_dir, "modes.json", doc.dump(2) + "\n");
    } catch (const std::exception&) {
    }
  }
  return dynamic_cast<const wgldos::ConfigError*>(&e) ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Emission rates of a dipole near a plasmonic waveguide"};
  app.set_version_flag("--version", wgldos::cli::kVersion);
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  int workers = 0;
  double tol = 0.0;
  bool lossless = false;
  bool quick = false;

  auto add_run_options = [&](CLI::App* sub) {
    sub->add_option("--config", config, "TOML config (or .json)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides [run].out_dir)");
    sub->add_option("--workers", workers, "worker threads (overrides [run].workers)")->check(CLI::PositiveNumber);
    sub->add_option("--tol", tol, "panel tolerance (overrides [spectrum].tol)")->check(CLI::PositiveNumber);
    sub->add_flag("--lossless", lossless, "drop the imaginary part of the guide permittivity");
  };
  CLI::App* spectrum = app.add_subcommand("spectrum", "k_z-resolved partial 2D-LDOS per emitter");
  CLI::App* modes = app.add_subcommand("modes", "guided mode fitted from the first emitter's spectrum");
  CLI::App* rates = app.add_subcommand("rates", "decay channels for every emitter");
  CLI::App* map = app.add_subcommand("map", "2D-LDOS variation over a grid at k_SPP");
  for (CLI::App* sub : {spectrum, modes, rates, map}) add_run_options(sub);
  CLI::App* validate = app.add_subcommand("validate", "built-in oracle suite");
  validate->add_option("--out", out_dir, "also write validate.json here");
  validate->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  validate->add_flag("--quick", quick, "4 nm mesh instead of 2 nm");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "validate") return wgldos::cli::cmd_validate(out_dir, quick, workers > 0 ? workers : 1) ? 0 : 1;
    Overrides ov;
    if (!out_dir.empty()) ov.out_dir = out_dir;
    if (workers > 0) ov.workers = workers;
    if (tol > 0.0) ov.tol = tol;
    ov.lossless = lossless;
    const RunConfig cfg = wgldos::cli::load_config(config, ov);
    out_dir = cfg.out_dir;
    if (command == "spectrum") wgldos::cli::cmd_spectrum(cfg);
    if (command == "modes") wgldos::cli::cmd_modes(cfg);
    if (command == "rates") wgldos::cli::cmd_rates(cfg);
    if (command == "map") wgldos::cli::cmd_map(cfg);
  } catch (const std::exception& e) {
    return report(e, command, out_dir);
  }
  return 0;
}
