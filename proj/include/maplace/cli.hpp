// SPDX-License-Identifier: Apache-2.0
//
// Command-line frontend: experiment configuration, flat-file IO and the
// design / evaluate / heatmap / benchmark commands.
#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "maplace/crb.hpp"
#include "maplace/design.hpp"
#include "maplace/geometry.hpp"
#include "maplace/search.hpp"

namespace maplace::cli {

inline constexpr double kSpeedOfLight = 2.99792458e8;

enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitConfig = 2,
  kExitGeometry = 3,
  kExitBudget = 4,
};

/// Bad or inconsistent configuration (exit status 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::optional<double> wavelength;       // m
  std::optional<double> frequency;        // Hz; default 28 GHz when neither is set
  std::optional<double> half_aperture;    // m
  double aperture_wavelengths = 25;       // a / lambda, used when half_aperture is unset
  long antennas = 25;
  long snapshots = 1024;
  double snr_db = 5;
  long n_u = 201;
  long n_r = 201;
  double u_max = 0.999;
  std::string design = "proposed";
  std::string format = "json";
  unsigned long long seed = 0;
  std::optional<double> pitch;            // exhaustive candidate pitch, default lambda/2
  bool symmetry_prune = true;
  double budget = 5e7;
  long max_n = 12;

  double lambda() const;
  double a() const;
  void validate() const;

  SensingParamsd params() const;
  NearFieldRegiond region() const;
  RegionGridd grid() const;
};

inline const std::vector<std::string>& design_names() {
  static const std::vector<std::string> names{"proposed", "proposed-asymptotic", "ula", "sparse-ula",
                                              "two-edge", "exhaustive",          "positions-file"};
  return names;
}

/// Shortest decimal string that reads back to the same double.
std::string format_number(double x);

/// Positions file: one coordinate per line in metres, 17 significant digits.
void write_positions(std::ostream& os, const VectorX<double>& positions);
std::vector<double> read_positions(std::istream& is);
std::vector<double> read_positions_file(const std::string& path);

/// Comma-separated list of numbers; an empty string gives an empty list.
std::vector<double> parse_number_list(const std::string& text);

std::string csv_escape(const std::string& field);

struct BuiltGeometry {
  ArrayGeometryd geometry;
  std::optional<ClusterSizes> clusters;
};

/// Geometry for a registry design (positions-file needs `positions_path`).
BuiltGeometry build_geometry(const ExperimentConfig& config, const std::string& design,
                             const std::string& positions_path = {});

/// Report record: everything except positions is a scalar.
struct Report {
  std::string design;
  long n = 0;
  double a_m = 0;
  double lambda_m = 0;
  double snr_db = 0;
  DesignReportd worst{"", 0, SourcePositiond(0, 1), 0, 0, 0, 0};
  double q_star = 0;
  double gamma = 0;
  std::optional<ClusterSizes> clusters;
  std::optional<SourcePositiond> source;  // evaluate --u/--r
  std::optional<double> source_speb;
};

Report make_report(const ExperimentConfig& config, const std::string& design, const BuiltGeometry& built);

void write_report(std::ostream& os, const Report& report, const std::string& format,
                  const VectorX<double>* positions = nullptr);

/// Entry point shared by the executable and the tests; `args` excludes argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace maplace::cli
