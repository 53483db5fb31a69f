// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "maplace/cli.hpp"

namespace maplace::cli {

namespace {

struct CommandArgs {
  std::string output;
  std::string positions;
  std::optional<double> u;
  std::optional<double> r;
  bool enforce_spacing = false;
  std::string sweep = "N";
  std::string values;
  bool values_given = false;
  std::string designs = "proposed,proposed-asymptotic,two-edge,sparse-ula,ula,exhaustive";
};

void emit_error(std::ostream& err, const std::string& code, const std::string& message, int status) {
  nlohmann::ordered_json j;
  j["status"] = "error";
  j["code"] = code;
  j["message"] = message;
  j["exit_status"] = status;
  err << j.dump() << '\n';
}

/// Writes to `path` when given, otherwise to `fallback`.
template <typename Fn>
void with_output(const std::string& path, std::ostream& fallback, Fn&& fn) {
  if (path.empty()) {
    fn(fallback);
    return;
  }
  std::ofstream file(path);
  if (!file) throw ConfigError("cannot open output file '" + path + "'");
  fn(file);
  if (!file) throw ConfigError("failed writing '" + path + "'");
}

std::string selected_design(const ExperimentConfig& config, const CommandArgs& args) {
  return args.positions.empty() ? config.design : "positions-file";
}

int cmd_design(const ExperimentConfig& config, const CommandArgs& args, std::ostream& out) {
  const std::string design = selected_design(config, args);
  const auto built = build_geometry(config, design, args.positions);
  const auto report = make_report(config, design, built);
  if (!args.output.empty())
    with_output(args.output, out, [&](std::ostream& os) { write_positions(os, built.geometry.positions()); });
  write_report(out, report, config.format, &built.geometry.positions());
  return kExitOk;
}

int cmd_evaluate(const ExperimentConfig& config, const CommandArgs& args, std::ostream& out) {
  const std::string design = selected_design(config, args);
  const auto built = build_geometry(config, design, args.positions);
  if (args.enforce_spacing) {
    const auto& x = built.geometry.positions();
    const auto k = built.geometry.first_spacing_violation(config.lambda() / 2);
    if (k >= 0)
      fail(ErrorCode::SpacingViolation, "positions " + format_number(x[k]) + " and " + format_number(x[k + 1]) +
                                            " (indices " + std::to_string(k) + ", " + std::to_string(k + 1) +
                                            ") are closer than lambda/2");
  }
  if (args.u.has_value() != args.r.has_value()) throw ConfigError("--u and --r must be given together");
  auto report = make_report(config, design, built);
  if (args.u) {
    const SourcePositiond s(*args.u, *args.r);
    auto params = config.params();
    params.antennas = report.n;
    report.source = s;
    report.source_speb = speb(built.geometry, params, s);
  }
  write_report(out, report, config.format);
  return kExitOk;
}

int cmd_heatmap(const ExperimentConfig& config, const CommandArgs& args, std::ostream& out) {
  const std::string design = selected_design(config, args);
  const auto built = build_geometry(config, design, args.positions);
  auto params = config.params();
  params.antennas = long(built.geometry.size());
  const double kap = kappa(params);
  const auto grid = config.grid();
  with_output(args.output, out, [&](std::ostream& os) {
    os << "u,r_m,p1_m,p2_m,speb_m2,log10_speb\n";
    for (const auto& s : grid.points()) {
      double v = 0;
      try {
        v = speb(built.geometry, kap, s);
      } catch (const Error&) {
        continue;
      }
      os << format_number(s.u()) << ',' << format_number(s.r()) << ',' << format_number(s.p1()) << ','
         << format_number(s.p2()) << ',' << format_number(v) << ',' << format_number(std::log10(v)) << '\n';
    }
  });
  return kExitOk;
}

std::vector<double> default_sweep(const std::string& variable) {
  if (variable == "snr_db") return {-5, 0, 5, 10, 15, 20};
  if (variable == "N") return {8, 12, 16, 20, 24, 28, 32};
  return {5, 10, 15, 20, 25, 30};
}

ExperimentConfig apply_sweep(ExperimentConfig config, const std::string& variable, double value) {
  if (variable == "snr_db") {
    config.snr_db = value;
  } else if (variable == "N") {
    if (value != std::round(value)) throw ConfigError("N sweep values must be integers");
    config.antennas = std::lround(value);
  } else {
    config.half_aperture.reset();
    config.aperture_wavelengths = value;
  }
  config.validate();
  return config;
}

int cmd_benchmark(const ExperimentConfig& config, CommandArgs args, std::ostream& out) {
  if (args.sweep == "snr-db") args.sweep = "snr_db";
  if (args.sweep == "n") args.sweep = "N";
  if (args.sweep != "snr_db" && args.sweep != "N" && args.sweep != "a")
    throw ConfigError("sweep variable must be one of snr_db, N, a");
  const auto values = args.values_given ? parse_number_list(args.values) : default_sweep(args.sweep);
  std::vector<std::string> designs;
  {
    std::stringstream ss(args.designs);
    std::string d;
    while (std::getline(ss, d, ','))
      if (!d.empty()) designs.push_back(d);
  }
  for (const auto& d : designs)
    if (d == "positions-file" || std::find(design_names().begin(), design_names().end(), d) == design_names().end())
      throw ConfigError("benchmark cannot run design '" + d + "'");

  with_output(args.output, out, [&](std::ostream& os) {
    os << "design,sweep_variable,sweep_value,worst_case_speb_m2,worst_case_rmse_m,status\n";
    for (double v : values) {
      for (const auto& d : designs) {
        os << d << ',' << args.sweep << ',' << format_number(v) << ',';
        try {
          const auto cfg = apply_sweep(config, args.sweep, v);
          const auto report = make_report(cfg, d, build_geometry(cfg, d));
          os << format_number(report.worst.worst_case_speb) << ','
             << format_number(std::sqrt(report.worst.worst_case_speb)) << ",ok\n";
        } catch (const std::exception& e) {
          os << ",," << csv_escape(e.what()) << '\n';
        }
      }
    }
  });
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  CommandArgs args;

  CLI::App app{"Movable-antenna placement for near-field sensing", "maplace"};
  app.set_config("--config", "", "Flat key = value file; command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1, 1);

  auto* wl = app.add_option("--wavelength", cfg.wavelength, "Wavelength [m]");
  auto* fr = app.add_option("--frequency", cfg.frequency, "Carrier frequency [Hz] (default 28e9)");
  wl->excludes(fr);
  auto* ha = app.add_option("--half-aperture,--half_aperture", cfg.half_aperture, "Half aperture a [m]");
  auto* aw = app.add_option("--aperture-wavelengths,--aperture_wavelengths", cfg.aperture_wavelengths, "a / lambda when --half-aperture is unset")
                 ->capture_default_str();
  ha->excludes(aw);
  app.add_option("-n,--antennas", cfg.antennas, "Number of antennas N")->capture_default_str();
  app.add_option("--snapshots", cfg.snapshots, "Snapshots T")->capture_default_str();
  app.add_option("--snr-db,--snr_db", cfg.snr_db, "Received SNR [dB]")->capture_default_str();
  app.add_option("--n-u,--n_u", cfg.n_u, "Angular grid resolution")->capture_default_str();
  app.add_option("--n-r,--n_r", cfg.n_r, "Radial grid resolution")->capture_default_str();
  app.add_option("--u-max,--u_max", cfg.u_max, "Largest |u| in the region")->capture_default_str();
  app.add_option("--design", cfg.design, "proposed | proposed-asymptotic | ula | sparse-ula | two-edge | exhaustive")
      ->capture_default_str();
  app.add_option("--format", cfg.format, "Report format: json | csv")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Seed for randomized runs")->capture_default_str();
  app.add_option("--pitch", cfg.pitch, "Exhaustive-search candidate pitch [m] (default lambda/2)");
  app.add_flag("--symmetry-prune,--symmetry_prune,!--no-symmetry-prune", cfg.symmetry_prune, "Enumerate centro-symmetric subsets only")
      ->capture_default_str();
  app.add_option("--budget", cfg.budget, "Exhaustive-search budget (subsets x grid points)")->capture_default_str();
  app.add_option("--max-n,--max_n", cfg.max_n, "Largest N accepted by the exhaustive design")->capture_default_str();

  auto* design = app.add_subcommand("design", "Synthesize a geometry and report its worst-case SPEB");
  design->add_option("-o,--output", args.output, "Positions file to write");
  design->add_option("--positions", args.positions, "Use positions from a file instead of --design");

  auto* evaluate = app.add_subcommand("evaluate", "Worst-case SPEB of a geometry");
  evaluate->add_option("--positions", args.positions, "Positions file (one coordinate per line, metres)");
  evaluate->add_option("--u", args.u, "Also evaluate SPEB at this u");
  evaluate->add_option("--r", args.r, "... and this range [m]");
  evaluate->add_flag("--enforce-spacing", args.enforce_spacing, "Reject adjacent spacing below lambda/2");

  auto* heatmap = app.add_subcommand("heatmap", "SPEB over the region grid as CSV");
  heatmap->add_option("--positions", args.positions, "Positions file");
  heatmap->add_option("-o,--output", args.output, "CSV file (default stdout)");

  auto* benchmark = app.add_subcommand("benchmark", "Worst-case SPEB of every design across a sweep, long-form CSV");
  benchmark->add_option("--sweep", args.sweep, "snr_db | N | a (a in wavelengths)")->capture_default_str();
  auto* values = benchmark->add_option("--values", args.values, "Comma-separated sweep values");
  benchmark->add_option("--designs", args.designs, "Comma-separated designs")->capture_default_str();
  benchmark->add_option("-o,--output", args.output, "CSV file (default stdout)");

  for (auto* sub : {design, evaluate, heatmap, benchmark}) sub->fallthrough();

  try {
    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    emit_error(err, "ConfigError", e.what(), kExitConfig);
    return kExitConfig;
  }
  args.values_given = values->count() > 0;

  try {
    cfg.validate();
    if (design->parsed()) return cmd_design(cfg, args, out);
    if (evaluate->parsed()) return cmd_evaluate(cfg, args, out);
    if (heatmap->parsed()) return cmd_heatmap(cfg, args, out);
    return cmd_benchmark(cfg, args, out);
  } catch (const ConfigError& e) {
    emit_error(err, "ConfigError", e.what(), kExitConfig);
    return kExitConfig;
  } catch (const Error& e) {
    const int status = e.code() == ErrorCode::SearchSpaceTooLarge ? kExitBudget : kExitGeometry;
    emit_error(err, std::string(error_name(e.code())), e.what(), status);
    return status;
  } catch (const std::exception& e) {
    emit_error(err, "InternalError", e.what(), kExitOther);
    return kExitOther;
  }
}

}  // namespace maplace::cli
