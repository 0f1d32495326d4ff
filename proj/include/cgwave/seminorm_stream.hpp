#pragma once

#include <vector>

#include "cgwave/asymptotics.hpp"
#include "cgwave/lattice.hpp"

namespace cgw {

/// Directional seminorms of one lattice field fed row by row (t ascending):
///   sup_{K+_n} sup_{1≤α≤n} |D+^α f| + sup_{K-_n} sup_{1≤α≤n} |D-^α f| + sup_{K_n} |f|.
/// Derivatives use lattice stride `stride` and are taken only where the stencil fits.
/// With stride_rows_only the derivative centers sit on rows that are multiples of the
/// stride (every column still counts), so only 2·radius+1 rows are buffered.
class DirectionalAccumulator {
 public:
  DirectionalAccumulator(const DiagonalLattice& lattice, const RegionLadder& regions,
                         int stride, bool stride_rows_only = false);

  void push_row(const double* row);
  Index rows_seen() const { return next_row_; }

  /// The three-term value for each level n.
  std::vector<double> values() const;
  std::vector<double> plain() const { return plain_; }
  /// sup over K±_n of |D±^α f| for α = 1..6, indexed [n][α-1].
  const std::vector<std::vector<double>>& plus_sups() const { return plus_; }
  const std::vector<std::vector<double>>& minus_sups() const { return minus_; }

 private:
  struct Span {
    Index lo, hi;
  };
  std::vector<Span> spans_at(const BoxUnion& u, double t) const;
  void process_center(Index c, int alpha);
  const double* row(Index r) const { return ring_.data() + (r % capacity_) * lat_.nx; }

  DiagonalLattice lat_;
  RegionLadder regions_;
  int stride_;
  int max_alpha_;
  Index capacity_;
  Index row_step_ = 1, ring_step_ = 1;
  Index next_row_ = 0, stored_ = 0;
  std::vector<double> ring_;
  std::vector<double> plain_;
  std::vector<std::vector<double>> plus_, minus_;
  std::vector<double> scratch_;
};

}  // namespace cgw
