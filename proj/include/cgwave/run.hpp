#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cgwave/char_solver.hpp"
#include "cgwave/initial_data.hpp"
#include "cgwave/report.hpp"
#include "json.hpp"

namespace cgw {

enum class Command { solve, valuation, singsupp, contraction, example3d, all };

Command parse_command(const std::string& name);
std::string to_string(Command c);

struct AnalysisSettings {
  double cell_h = 1.0 / 16;
  int max_order = 4;
  double tol = default_slope_tol;
  double X = 2.0;
  double diff_step = 0.25;
  double zero_rel = 1e-10;
  double dilation_cells = 2.0;  // soundness dilation in units of cell_h
  double exterior_tol = 1e-8;
};

struct ContractionSettings {
  std::size_t pairs = 20;
  double T = 0.5;
  double a = 0.5;
  EpsilonLadder ladder = EpsilonLadder::dyadic(2, 7);
  SpacingRule h_rule = SpacingRule::proportional(16);
  double bound_slack = 0.02;
};

/// Synthetic eps^b·g(x) on [-1, 1], or a saved net directory.
struct ValuationSettings {
  std::string net = "synthetic";
  double b = 2.0;
  std::string g = "sin";  // sin, cos, gauss
  EpsilonLadder ladder = EpsilonLadder::dyadic(4, 12);
  std::size_t levels = 3;
  double h = 1.0 / 256;
};

struct RadialSettings {
  double R = 2.0;
  double nodes_per_sqrt_eps = 64;
  int accuracy = 6;
  EpsilonLadder residual_ladder = EpsilonLadder::geometric(0.25, 0.25, 4);
  EpsilonLadder singsupp_ladder = EpsilonLadder::dyadic(2, 20);
  std::vector<Interval> cells = {{0.0, 0.25}, {0.25, 0.5}, {0.5, 1.0}, {1.0, 2.0}, {0.5, 2.0}};
  double tol = 0.05;
  int max_order = 3;
};

struct OutputSettings {
  bool save_nets = true;
  double net_spacing = 1.0 / 64;  // saved nets keep nodes about this far apart
};

struct RunConfig {
  Command command = Command::all;
  SolveConfig solve;
  DataSpec data;
  std::string mollifier = "bump";
  AnalysisSettings analysis;
  ContractionSettings contraction;
  ValuationSettings valuation;
  RadialSettings radial;
  OutputSettings output;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;

  void validate() const;
};

/// Unknown keys, wrong types and invalid values raise ConfigError.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& file);
nlohmann::json to_json(const RunConfig& cfg);
/// Canonical text: every field, fixed key order.
std::string serialize(const RunConfig& cfg);

struct RunOutcome {
  int status = 0;  // 0 ok, 2 config error, 3 numerical failure
  Manifest manifest;
  nlohmann::json summary;
  std::string message;
};

/// Runs the command, writes artifacts and manifest.json into cfg.output_dir.
RunOutcome run(const RunConfig& cfg);

}  // namespace cgw
