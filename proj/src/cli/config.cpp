// SPDX-License-Identifier: Apache-2.0
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "maplace/cli.hpp"

namespace maplace::cli {

namespace {

bool positive(double x) { return std::isfinite(x) && x > 0; }

double parse_double(const std::string& text, const std::string& what) {
  std::size_t b = text.find_first_not_of(" \t\r");
  std::size_t e = text.find_last_not_of(" \t\r");
  if (b == std::string::npos) throw ConfigError("empty " + what);
  const char* first = text.data() + b;
  const char* last = text.data() + e + 1;
  if (*first == '+') ++first;
  double v = 0;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) throw ConfigError("cannot parse " + what + " '" + text + "'");
  return v;
}

}  // namespace

double ExperimentConfig::lambda() const {
  if (wavelength && frequency) throw ConfigError("give either wavelength or frequency, not both");
  if (wavelength) return *wavelength;
  return kSpeedOfLight / frequency.value_or(28e9);
}

double ExperimentConfig::a() const { return half_aperture ? *half_aperture : aperture_wavelengths * lambda(); }

void ExperimentConfig::validate() const {
  const double l = lambda();
  if (!positive(l)) throw ConfigError("wavelength must be positive");
  if (frequency && !positive(*frequency)) throw ConfigError("frequency must be positive");
  if (!positive(a())) throw ConfigError("half aperture must be positive");
  if (antennas < 2) throw ConfigError("n must be at least 2");
  if (snapshots < 1) throw ConfigError("snapshots must be positive");
  if (!std::isfinite(snr_db)) throw ConfigError("snr_db must be finite");
  if (n_u < 1 || n_r < 1) throw ConfigError("grid resolutions must be positive");
  if (!(u_max >= 0 && u_max < 1)) throw ConfigError("u_max must lie in [0, 1)");
  if (format != "csv" && format != "json") throw ConfigError("format must be csv or json");
  if (pitch && !positive(*pitch)) throw ConfigError("pitch must be positive");
  if (!(budget > 0)) throw ConfigError("budget must be positive");
  bool known = false;
  for (const auto& d : design_names()) known = known || d == design;
  if (!known) throw ConfigError("unknown design '" + design + "'");
}

SensingParamsd ExperimentConfig::params() const {
  return SensingParamsd::from_snr_db(lambda(), snapshots, snr_db, antennas);
}

NearFieldRegiond ExperimentConfig::region() const { return NearFieldRegiond(a(), lambda(), u_max); }

RegionGridd ExperimentConfig::grid() const { return RegionGridd(region(), n_u, n_r); }

std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_positions(std::ostream& os, const VectorX<double>& positions) {
  char buf[64];
  for (Eigen::Index k = 0; k < positions.size(); ++k) {
    const auto res = std::to_chars(buf, buf + sizeof buf, positions[k], std::chars_format::general, 17);
    os.write(buf, res.ptr - buf);
    os.put('\n');
  }
}

std::vector<double> read_positions(std::istream& is) {
  std::vector<double> out;
  std::string line;
  long lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_double(line, "position on line " + std::to_string(lineno)));
  }
  return out;
}

std::vector<double> read_positions_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open positions file '" + path + "'");
  return read_positions(in);
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  if (text.find_first_not_of(" \t") == std::string::npos) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item, "list value"));
  return out;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

BuiltGeometry build_geometry(const ExperimentConfig& config, const std::string& design,
                             const std::string& positions_path) {
  const long n = config.antennas;
  const double a = config.a();
  const double l = config.lambda();
  if (design == "proposed" || design == "proposed-asymptotic") {
    const double fraction = design == "proposed" ? optimal_q(gamma_param(a, l)) / 2 : 0.25;
    return {discrete_deployment(n, a, l, fraction), deployment_clusters(n, fraction)};
  }
  if (design == "ula") return {baseline_ula(n, l, a), std::nullopt};
  if (design == "sparse-ula") return {baseline_sparse_ula(n, a, l), std::nullopt};
  if (design == "two-edge") return {baseline_two_edge(n, a, l), std::nullopt};
  if (design == "exhaustive") {
    if (n > config.max_n)
      fail(ErrorCode::SearchSpaceTooLarge,
           "n = " + std::to_string(n) + " exceeds max-n = " + std::to_string(config.max_n) + " for exhaustive search");
    ExhaustiveOptions<double> opts{config.pitch.value_or(l / 2), config.symmetry_prune, config.budget};
    auto res = exhaustive_search(n, a, l, config.params(), config.grid(), opts);
    return {std::move(res.geometry), std::nullopt};
  }
  if (design == "positions-file") {
    if (positions_path.empty()) throw ConfigError("design positions-file needs --positions");
    return {ArrayGeometryd(read_positions_file(positions_path), a, l), std::nullopt};
  }
  throw ConfigError("unknown design '" + design + "'");
}

Report make_report(const ExperimentConfig& config, const std::string& design, const BuiltGeometry& built) {
  Report r;
  r.design = design;
  r.n = long(built.geometry.size());
  r.a_m = config.a();
  r.lambda_m = config.lambda();
  r.snr_db = config.snr_db;
  auto params = config.params();
  params.antennas = r.n;
  r.worst = worst_case_speb(built.geometry, params, config.grid(), 0, design);
  r.gamma = gamma_param(r.a_m, r.lambda_m);
  r.q_star = optimal_q(r.gamma);
  r.clusters = built.clusters;
  return r;
}

void write_report(std::ostream& os, const Report& r, const std::string& format, const VectorX<double>* positions) {
  const double rmse = std::sqrt(r.worst.worst_case_speb);
  if (format == "json") {
    nlohmann::ordered_json j;
    j["design"] = r.design;
    j["n"] = r.n;
    j["a_m"] = r.a_m;
    j["lambda_m"] = r.lambda_m;
    j["snr_db"] = r.snr_db;
    j["worst_case_speb_m2"] = r.worst.worst_case_speb;
    j["worst_case_rmse_m"] = rmse;
    j["worst_u"] = r.worst.worst_case_source.u();
    j["worst_r_m"] = r.worst.worst_case_source.r();
    j["q_star"] = r.q_star;
    j["gamma"] = r.gamma;
    j["clusters"] = r.clusters ? nlohmann::ordered_json::array({r.clusters->left, r.clusters->center, r.clusters->right})
                               : nlohmann::ordered_json(nullptr);
    j["grid_points"] = r.worst.grid_points;
    j["evaluated_points"] = r.worst.evaluated_points;
    if (r.source) {
      j["source_u"] = r.source->u();
      j["source_r_m"] = r.source->r();
      j["source_speb_m2"] = *r.source_speb;
    }
    if (positions) j["positions_m"] = std::vector<double>(positions->data(), positions->data() + positions->size());
    os << j.dump(2) << '\n';
    return;
  }
  os << "design,n,a_m,lambda_m,snr_db,worst_case_speb_m2,worst_case_rmse_m,worst_u,worst_r_m,q_star,gamma,"
        "clusters,source_u,source_r_m,source_speb_m2\n";
  os << csv_escape(r.design) << ',' << r.n << ',' << format_number(r.a_m) << ',' << format_number(r.lambda_m) << ','
     << format_number(r.snr_db) << ',' << format_number(r.worst.worst_case_speb) << ',' << format_number(rmse) << ','
     << format_number(r.worst.worst_case_source.u()) << ',' << format_number(r.worst.worst_case_source.r()) << ','
     << format_number(r.q_star) << ',' << format_number(r.gamma) << ',';
  if (r.clusters) os << r.clusters->left << '/' << r.clusters->center << '/' << r.clusters->right;
  os << ',';
  if (r.source)
    os << format_number(r.source->u()) << ',' << format_number(r.source->r()) << ',' << format_number(*r.source_speb);
  else
    os << ",,";
  os << '\n';
}

}  // namespace maplace::cli
