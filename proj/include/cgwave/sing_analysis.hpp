#pragma once

#include <array>
#include <string>
#include <vector>

#include "cgwave/asymptotics.hpp"
#include "cgwave/char_solver.hpp"
#include "cgwave/seminorm_stream.hpp"
#include "cgwave/sweep.hpp"

namespace cgw {

using Point = std::array<double, 2>;  // (t, x)
using Polygon = std::vector<Point>;   // convex, vertices in order; two points for a segment

double polygon_distance(const Polygon& a, const Polygon& b);

/// Γ± = {x = ±t, 0 ≤ t ≤ T}, or the bands {|x ∓ t| ≤ b} when b > 0.
struct LightConeGeometry {
  double T = 1.0;
  double b = 0.0;

  static LightConeGeometry lines(double T) { return {T, 0.0}; }
  static LightConeGeometry bands(double T, double b) { return {T, b}; }

  bool is_band() const { return b > 0; }
  Polygon plus() const;
  Polygon minus() const;
  double distance(const Box& cell) const;
  double distance_plus(const Box& cell) const;
  double distance_minus(const Box& cell) const;
};

/// D+^i D-^j U; (0,0) is U, (i,0) comes from D+^{i-1} W/√2 and (i,j≥1) from D+^i D-^{j-1} V/√2.
struct Combo {
  int i = 0, j = 0;
  int order() const { return i + j; }
  std::string label() const;
};
std::vector<Combo> combos(int max_order);

struct ClassificationSpec {
  double T = 1.0;
  double X = 2.0;  // cells tile [cell_h, T-cell_h] × [-X+cell_h, X-cell_h]
  double cell_h = 1.0 / 16;
  int max_order = 4;
  double tol = default_slope_tol;
  double diff_step = 0.25;  // lattice differences use a step of about diff_step·eps
  double zero_rel = 1e-10;  // sups ≤ zero_rel·sup|field|·Σ|w| count as numerical zeros

  void validate() const;
  int stride(double eps, double h) const { return stride_for(diff_step * eps, h); }
  Index rows() const;
  Index cols() const;
  Box cell(Index r, Index c) const;
};

struct CellVerdict {
  Box cell;
  bool singular = false;
  double worst_slope = ValuationEstimate::infinity;
  std::string witness;
  int witness_order = -1;
  std::vector<double> worst_by_order;  // min slope over combos of order ≤ m
  double distance = 0.0;               // to the singular set of the geometry
  bool fit_failed = false;
};

struct SingularityMap {
  ClassificationSpec spec;
  LightConeGeometry geometry;
  std::vector<CellVerdict> cells;  // row-major: t ascending, then x ascending

  std::size_t singular_count() const;
  bool singular_at_order(std::size_t cell, int order) const;
};

/// Per-cell sups of every combo for one epsilon, fed by lattice rows (t ascending).
class ClassifyObserver : public SweepObserver {
 public:
  ClassifyObserver(const DiagonalLattice& lattice, const ClassificationSpec& spec, int stride);
  void on_slice(const SliceView& s) override;

  /// sups[combo][cell] with numerical zeros cleared
  std::vector<std::vector<double>> sups() const;
  const std::vector<std::vector<double>>& raw_sups() const { return sups_; }
  double noise_floor(std::size_t combo) const;

 private:
  struct Term {
    Index drow, dcol;
    double w;
  };
  struct Plan {
    int field;  // 0 U, 1 V, 2 W
    std::vector<Term> terms;
    double weight_sum = 0.0;
  };
  void process(Index c);
  const double* ring(const std::vector<double>& buf, Index i) const {
    return buf.data() + (i % capacity_) * lat_.nx;
  }

  DiagonalLattice lat_;
  ClassificationSpec spec_;
  std::vector<Combo> combos_;
  std::vector<Plan> plans_;
  Index reach_ = 0, capacity_ = 1;
  std::vector<double> V_, W_, U_;
  double field_max_[3] = {0.0, 0.0, 0.0};
  std::vector<Index> lo_, hi_;  // active range per ring slot
  Index rows_seen_ = 0;
  Index cell_row0_ = 0;  // lattice row of t = cell_h
  std::vector<std::pair<Index, Index>> col_nodes_;  // node range of each cell column
  std::vector<std::vector<double>> sups_;
  std::vector<double> val_, tmp_;
};

SingularityMap assemble_map(const EpsilonLadder& ladder,
                            const std::vector<std::vector<std::vector<double>>>& sups_per_eps,
                            const ClassificationSpec& spec, const LightConeGeometry& geom);

/// Materialized classification; the lattice x-range must cover [-X, X].
SingularityMap classify_cells(const Net& U, const CharacteristicPair& pair,
                              const LightConeGeometry& geom, const ClassificationSpec& spec);
SingularityMap band_classify(const Net& U, const CharacteristicPair& pair,
                             const LightConeGeometry& geom, const ClassificationSpec& spec);

/// Soundness read as a bracket: cells meeting the singular set are singular, cells at
/// distance ≥ dilation are regular; in between either verdict is accepted.
struct SoundnessReport {
  std::size_t missed = 0;          // touching cells classified regular
  std::size_t false_alarms = 0;    // far cells classified singular
  std::size_t outside_dilation = 0;  // singular cells beyond the dilation
  std::size_t singular_on_plus = 0, singular_on_minus = 0;
  bool sound() const { return missed == 0 && false_alarms == 0; }
  bool confined() const { return outside_dilation == 0; }
};
SoundnessReport check_soundness(const SingularityMap& map, double dilation);

/// Three-term μ̃_n of one lattice net.
SeminormProfile directional_profile(const Net& field, const RegionLadder& regions, int stride = 1);

struct PairProfiles {
  SeminormProfile V, W;
};
PairProfiles directional_profile(const CharacteristicPair& pair, const RegionLadder& regions,
                                 int stride = 1);

/// Streams V and W of the final iterate into row-subsampled directional accumulators.
class PropertyObserver : public SweepObserver {
 public:
  PropertyObserver(const DiagonalLattice& lattice, const RegionLadder& regions, int stride);
  void on_slice(const SliceView& s) override;
  DirectionalAccumulator V, W;
};

/// Boundedness, one-sided regularity and exterior vanishing of a solved pair.
struct PropertyAudit {
  SlopeVerdict bounded;   // sup |V|, |W| on K_n
  SlopeVerdict plus;      // D+^α on K+_n
  SlopeVerdict minus;     // D-^α on K-_n
  std::vector<double> exterior;  // sup outside the cone, per eps
  double exterior_tol = 1e-8;
  bool passed() const;
};
PropertyAudit audit_properties(const EpsilonLadder& ladder,
                               const std::vector<const PropertyObserver*>& per_eps,
                               const std::vector<double>& exterior_sups, double tol,
                               double exterior_tol = 1e-8);

/// Streamed solve of every ladder entry feeding the cell classifier, the exterior audits and
/// the property accumulators in one sweep per epsilon.
struct SingsuppRun {
  SingularityMap map;
  std::vector<EpsilonRun> runs;
  std::vector<double> membership;  // per eps, sup of the one-sided integral outside the cone
  std::vector<double> exterior;    // per eps, sup |V|, |W| outside the cone
  PropertyAudit audit;
};
SingsuppRun singsupp_streaming(const SolveConfig& cfg, const SolveInput& in,
                               const ClassificationSpec& spec, const LightConeGeometry& geom);

}  // namespace cgw
