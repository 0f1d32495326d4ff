#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "cgwave/asymptotics.hpp"
#include "cgwave/initial_data.hpp"
#include "cgwave/lattice.hpp"
#include "cgwave/sweep.hpp"

namespace cgw {

struct PicardSettings {
  std::size_t max_iters = 40;
  double stop_distance = 1e-2;  // per-eps sup change threshold is stop_distance·eps²
  std::size_t initial_iters = 4;
};

struct SolveConfig {
  double T = 1.0;
  double a = 1.0;
  double margin = 1.0;  // lattice covers |x| ≤ a + T + margin
  NonlinearityId f = NonlinearityId::square;
  double E_exponent = 1.0;
  EpsilonLadder ladder = EpsilonLadder::dyadic(5, 12);
  SpacingRule h_rule = SpacingRule::proportional(16);
  PicardSettings picard;
  double trace_step = 1.0 / 64;  // physical step of the D± differences in d̃
  std::size_t n_max = 6;

  void validate() const;
  DiagonalLattice lattice(double eps) const;
  double coupling(double eps) const;
  double threshold(double eps) const { return picard.stop_distance * eps * eps; }
};

/// Lattices and characteristic data per ladder entry.
struct SolveInput {
  EpsilonLadder ladder;
  std::vector<DiagonalLattice> lattices;
  std::vector<LatticeData> data;
};

SolveInput prepare_input(const SolveConfig& cfg, const DataSpec& spec, const Mollifier& moll);

struct CharacteristicPair {
  Net V, W;
  double a = 0.0;
  double T = 0.0;
};

enum class Sign { plus, minus };

/// Zero grid on one lattice; lattice_net stacks one per ladder entry.
GridFunction lattice_grid(const DiagonalLattice& L);
Net lattice_net(const SolveInput& in);

/// B±(t,x) = ∫_0^t A(τ, x ∓ (t-τ)) dτ by the trapezoid rule along lattice diagonals.
/// Values outside the lattice count as zero.
Net line_integral(const Net& A, Sign sign);

/// Cumulative trapezoid of (W-V)/2 from the left lattice edge at every t-slice.
Net inner_integral(const CharacteristicPair& pair);

/// U from a pair: the same integral taken from the nearer lattice end (equal on ℳ, and
/// exactly zero beyond the support on both sides).
Net reconstruct_U(const CharacteristicPair& pair);

CharacteristicPair free_evolution(const SolveInput& in, double a, double T);

CharacteristicPair apply_F(const CharacteristicPair& pair, const SolveConfig& cfg,
                           const SolveInput& in);

struct TraceRow {
  std::size_t iter = 0;  // distance between iterate iter and iter-1
  std::vector<double> sup_change;  // per eps
  double d_tilde = 0.0;
  UltraMetricReport V, W;
};

struct EpsilonRun {
  double eps = 0.0;
  std::size_t iterations = 0;
  std::size_t converged_at = 0;
  std::vector<double> change;
};

struct PicardResult {
  CharacteristicPair pair;
  Net U;
  std::vector<EpsilonRun> runs;
  std::vector<TraceRow> trace;
};

/// Observers for one epsilon; called again with a larger K if the first pass did not converge.
using ObserverFactory =
    std::function<std::vector<SweepObserver*>(std::size_t k, std::size_t iterations)>;

/// Streamed Picard solve of one ladder entry with adaptive iteration count.
EpsilonRun solve_epsilon(const SolveConfig& cfg, std::size_t k, const SolveInput& in,
                         const ObserverFactory& observers, std::size_t min_iterations = 0);

/// Streamed solve of every entry; all entries share one K so the trace covers every level.
struct StreamedSolve {
  std::vector<EpsilonRun> runs;
  std::vector<TraceRow> trace;
};
StreamedSolve solve_streaming(const SolveConfig& cfg, const SolveInput& in,
                              const ObserverFactory& observers, bool with_trace);

/// Materialized solve (small problems): pair, U and the d̃ trace.
PicardResult picard_solve(const SolveConfig& cfg, const SolveInput& in, bool with_trace = true);

/// Repeated apply_F on materialized nets; reference for the streamed solver.
PicardResult picard_global(const SolveConfig& cfg, const SolveInput& in, std::size_t iterations);

/// Explicit characteristic marching (Heun predictor-corrector per t-step).
CharacteristicPair marching_reference(const SolveConfig& cfg, const SolveInput& in);

struct MembershipReport {
  std::vector<double> exterior_sups;  // per eps, sup |∫(W-V)/2| over |x| > t + a + eps
  ValuationEstimate decay;
  bool decay_known = false;
  bool member = false;
  double margin = 0.0;  // tol / max sup, > 1 when the absolute test passes
};

MembershipReport membership_M(const CharacteristicPair& pair, double tol = 1e-8);

/// Exterior audits of one streamed epsilon over |x| > t + a + eps: the one-sided
/// cumulative integral of (W-V)/2 and the fields themselves.
class AuditObserver : public SweepObserver {
 public:
  AuditObserver(const DiagonalLattice& lattice, double a, double eps);
  void on_slice(const SliceView& s) override;

  double membership = 0.0;
  double exterior_U = 0.0, exterior_V = 0.0, exterior_W = 0.0;

 private:
  DiagonalLattice lat_;
  double a_, eps_;
  std::vector<double> acc_;
};

/// Copies V, W, U of the final iterate into lattice grids, keeping every `step`-th node.
class GridObserver : public SweepObserver {
 public:
  GridObserver(const DiagonalLattice& lattice, Index step = 1);
  void on_slice(const SliceView& s) override;

  GridFunction V, W, U;

 private:
  Index step_;
};

/// Directional region ladder used by d̃; covers the support cone.
RegionLadder trace_regions(const SolveConfig& cfg);

struct ContractionReport {
  std::size_t pairs_tested = 0;
  std::vector<double> ratios;
  std::vector<double> d_pairs, d_images;
  std::vector<double> exponents;  // perturbation exponent c per pair
  double bound = 0.0;
  double max_ratio = 0.0;
};

/// Pairs p = free evolution of data + eps^c·(random smooth bump in U0), c ∈ {0, 1/2, 1}.
ContractionReport contraction_test(const SolveConfig& cfg, const DataSpec& spec,
                                   const Mollifier& moll, std::size_t pairs, std::uint64_t seed);

}  // namespace cgw
