#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cgwave/char_solver.hpp"
#include "cgwave/sing_analysis.hpp"
#include "cgwave/verify3d.hpp"
#include "json.hpp"

namespace cgw {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& file);

/// Columns iter,epsilon,sup_change,d_tilde; one row per iteration and ladder entry.
void write_trace_csv(const std::filesystem::path& file, const EpsilonLadder& ladder,
                     const std::vector<TraceRow>& trace);
/// Columns epsilon,iterations,converged_at,final_change.
void write_runs_csv(const std::filesystem::path& file, const std::vector<EpsilonRun>& runs);
/// Columns t_lo,t_hi,x_lo,x_hi,verdict,worst_slope,witness_order.
void write_map_csv(const std::filesystem::path& file, const SingularityMap& map);
/// Columns epsilon,sup_residual,h_r.
void write_radial_csv(const std::filesystem::path& file, const RadialResidual& r);
/// Columns r_lo,r_hi,verdict,worst_slope,witness_order.
void write_radial_verdicts_csv(const std::filesystem::path& file,
                               const std::vector<RadialVerdict>& v);
/// Columns pair,exponent,d_pair,d_image,ratio.
void write_contraction_csv(const std::filesystem::path& file, const ContractionReport& r);

void write_json(const std::filesystem::path& file, const nlohmann::json& j);

/// Diverging color for a slope: red below 0, blue above, white at 0; |slope| ≥ 2 saturates.
std::string slope_color(double slope);

std::string svg_heatmap(const SingularityMap& map, const LightConeGeometry& geom);
void emit_svg_heatmap(const std::filesystem::path& file, const SingularityMap& map,
                      const LightConeGeometry& geom);

/// Balanced elements, a root <svg> with numeric width and height; `why` gets the first problem.
bool svg_well_formed(const std::string& text, std::string* why = nullptr);

struct ManifestEntry {
  std::string path;  // relative to the output directory
  std::uintmax_t bytes = 0;
  std::string sha256;
};

struct Manifest {
  std::string command;
  std::uint64_t seed = 0;
  std::string config_sha256;
  std::vector<ManifestEntry> files;

  /// Adds every regular file below dir except manifest.json, sorted by path.
  void scan(const std::filesystem::path& dir);
  nlohmann::json to_json() const;
  void write(const std::filesystem::path& dir) const;
};

}  // namespace cgw
