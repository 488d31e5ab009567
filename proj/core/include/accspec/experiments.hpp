#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "accspec/csv_io.hpp"
#include "accspec/window_kernel.hpp"

namespace accspec {

/// One JSON document describing an experiment. Every field has a default, so
/// "{}" is a valid config (Gaussian window, diag(0.5, 0.5), Ball(0, 3)).
struct ExperimentConfig {
  std::string window = "gaussian";
  std::array<std::array<double, 2>, 2> lattice{{{0.5, 0.0}, {0.0, 0.5}}};  // row-major, columns are basis vectors
  std::string mask = "ball:0,0,3";
  double r = 1.0;
  std::optional<double> b_fixed;  // unset: B = B_est * b_inflation
  double b_inflation = 1.01;
  std::map<std::string, double> tolerances;
  std::string output_dir = "accspec-out";
  TightWindowOptions tight;
  int probe_count = 16;
  std::uint64_t seed = 20240611;
  std::vector<double> deltas{0.1, 0.25, 0.5};
  int sample_points = 50;
  bool allow_nontight = false;
  std::size_t max_gram = 4000;
  bool corrupt_phase = false;  // test hook, see LatticeKernel::set_corrupt_phase

  static std::map<std::string, double> default_tolerances();
  double tol(const std::string& name) const;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path);
  nlohmann::json to_json() const;
};

/// Report plus the files a command wants written next to report.json.
struct CommandResult {
  nlohmann::json report;
  bool pass = false;
  std::vector<std::pair<std::string, CsvTable>> tables;
  std::vector<std::pair<std::string, std::string>> texts;
};

CommandResult cmd_identities(const ExperimentConfig& cfg);
CommandResult cmd_sharpness(const ExperimentConfig& cfg, std::vector<double> radii = {});
CommandResult cmd_reconstruct(const ExperimentConfig& cfg);
CommandResult cmd_hyperuniformity(const ExperimentConfig& cfg, std::vector<double> radii = {});
CommandResult cmd_perimeter_compare(const ExperimentConfig& cfg, std::vector<double> radii = {});

/// Resolves "gaussian", "hermite:n", "file:path" and "tight(<spec>)".
Window resolve_window(const std::string& spec, const Lattice2& lat, const TightWindowOptions& tight);

/// Writes report.json and the command's side files into dir (created if
/// needed).
void write_outputs(const CommandResult& result, const std::string& dir);

/// Runs a command by name and writes its outputs. Library errors become an
/// error report. Returns 0 when every check passes, 1 when a check fails and
/// 2 on error.
int run_command(const std::string& command, const ExperimentConfig& cfg, const std::vector<double>& radii,
                const std::string& out_dir);

/// Error report for failures that happen before a config exists.
nlohmann::json error_report(const std::string& command, const nlohmann::json& config_echo, const std::string& code,
                            const std::string& message);

}  // namespace accspec
