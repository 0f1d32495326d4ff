#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cgwave/net.hpp"

namespace cgw {

constexpr double zero_floor = 1e-300;
constexpr double default_slope_tol = 0.15;

enum class Flavor { standard, directional };

/// A compact set written as a finite union of closed boxes.
using BoxUnion = std::vector<Box>;

bool contained_in_union(const Box& b, const BoxUnion& u, double tol = 1e-12);

/// Exhausting sets K_n (and K±_n for the directional flavor); index n also caps the
/// derivative order at n.
struct RegionLadder {
  Flavor flavor = Flavor::standard;
  std::vector<BoxUnion> regions;
  std::vector<BoxUnion> plus_regions;   // avoid Γ- = {x = -t}
  std::vector<BoxUnion> minus_regions;  // avoid Γ+ = {x = t}
  double horizon = 0.0;                 // T, used for the Γ checks

  std::size_t size() const { return regions.size(); }
  int max_order(std::size_t n) const { return static_cast<int>(n); }

  /// Nesting and, for the directional flavor, Γ-avoidance; throws BadRegionLadder.
  void validate() const;

  static RegionLadder standard(std::vector<Box> nested);
  static RegionLadder constant(const Box& K, std::size_t levels);

  /// K_n = [0,T]×[-R,R]; K+_n keeps |x+t| ≥ delta_n, K-_n keeps |x-t| ≥ delta_n, as
  /// staircases of t-steps sigma. delta_n = max(delta0·2^-n, delta_min).
  static RegionLadder directional(double T, double R, std::size_t levels, double delta0 = 0.5,
                                  double delta_min = 0.125, double sigma = 1.0 / 16);
};

struct SeminormProfile {
  Flavor flavor = Flavor::standard;
  EpsilonLadder ladder;
  std::vector<std::vector<double>> values;  // values[n][k]

  std::size_t levels() const { return values.size(); }
};

struct ValuationEstimate {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
  std::size_t window_lo = 0;
  std::size_t window_hi = 0;  // inclusive
  std::size_t points = 0;
  bool saturated = false;

  static constexpr double infinity = std::numeric_limits<double>::infinity();
};

struct Window {
  bool automatic = true;
  std::size_t lo = 0, hi = 0;  // inclusive, used when not automatic

  static Window autowindow() { return {}; }
  static Window range(std::size_t lo, std::size_t hi) { return {false, lo, hi}; }
};

/// Least-squares slope of log(values) against log(eps) over the window.
ValuationEstimate fit_valuation(const EpsilonLadder& ladder, const std::vector<double>& values,
                                Window window = {});

ValuationEstimate estimate_valuation(const SeminormProfile& profile, std::size_t n,
                                     Window window = {});

double ultra_pseudo_seminorm(const ValuationEstimate& v);

SeminormProfile seminorm_profile(const Net& u, const RegionLadder& ladder, int stride = 1);

struct UltraMetricReport {
  Flavor flavor = Flavor::standard;
  std::vector<double> p_values;
  std::vector<ValuationEstimate> valuations;
  double distance = 0.0;
  std::size_t truncation = 0;
  double tail_bound() const { return std::ldexp(1.0, -static_cast<int>(truncation) - 1); }
};

/// Series Σ_{n≤n_max} 2^{-n-1} min(p_n,1) (standard) or Σ 2^{-n-1} p_n (directional).
UltraMetricReport distance_from_profile(const SeminormProfile& profile, std::size_t n_max,
                                        Window window = {});

UltraMetricReport sharp_distance(const Net& u, const Net& v, const RegionLadder& ladder,
                                 std::size_t n_max = 6, int stride = 1);

struct SlopeVerdict {
  bool passed = true;
  std::vector<std::string> labels;
  std::vector<ValuationEstimate> slopes;

  double worst_slope() const;
};

/// Mixed partial ∂t^t ∂x^x; 1-D nets use x only.
struct MixedOrder {
  int t = 0;
  int x = 0;
};

SlopeVerdict bounded_type(const Net& u, const Box& K, const std::vector<int>& x_orders,
                          double tol = default_slope_tol);
SlopeVerdict bounded_type(const Net& u, const Box& K, const std::vector<MixedOrder>& orders,
                          double tol = default_slope_tol);
/// Bounded type of a per-epsilon sup series.
SlopeVerdict bounded_type(const EpsilonLadder& ladder, const std::vector<double>& sups,
                          double tol = default_slope_tol);

SlopeVerdict is_negligible(const Net& u, const RegionLadder& regions, double a_max,
                           double tol = default_slope_tol);

void write_profile_csv(const std::filesystem::path& file, const SeminormProfile& p);
void write_valuation_csv(const std::filesystem::path& file,
                         const std::vector<ValuationEstimate>& rows);
std::string report_json(const UltraMetricReport& r);

}  // namespace cgw
