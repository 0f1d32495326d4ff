#pragma once

#include <vector>

#include "cgwave/asymptotics.hpp"
#include "cgwave/grid.hpp"
#include "cgwave/ladder.hpp"

namespace cgw {

/// u^eps(r) = (r² + eps)^(-1/2) on the staggered nodes r_j = (j + 1/2)·h_r.
/// values[k] holds nodes j = 0..count[k]+2 so stencils of radius 3 fit at r ≤ R; nodes left
/// of r = 0 come from the even extension.
struct RadialNet {
  EpsilonLadder ladder;
  double R = 1.0;
  std::vector<double> h;
  std::vector<Index> count;  // nodes with r_j ≤ R
  std::vector<std::vector<double>> values;

  std::size_t size() const { return ladder.size(); }
  double r(std::size_t k, Index j) const { return (double(j) + 0.5) * h[k]; }
  double at(std::size_t k, Index j) const {
    return values[k][std::size_t(j < 0 ? -1 - j : j)];
  }
};

double radial_profile(double eps, double r);
/// Closed form of -Δu^eps = -(u'' + 2u'/r); equals 3·eps·u^5.
double radial_minus_laplacian(double eps, double r);

/// h_r = sqrt(eps)/nodes_per_sqrt_eps; GridTooCoarse when h_r > sqrt(eps)/16.
RadialNet make_radial_net(const EpsilonLadder& ladder, double R, double nodes_per_sqrt_eps = 64);

struct RadialResidual {
  int accuracy = 6;
  std::vector<double> eps, h_r, sup_residual;
};

/// sup over r ∈ [h_r, R] of |-Δ_h u - 3E u^5| with E = eps^E_exponent and a central stencil
/// of the given accuracy (2, 4 or 6) for u'' and u'.
RadialResidual radial_residual(const RadialNet& net, int accuracy = 6, double E_exponent = 1.0);

struct RadialVerdict {
  Interval cell;
  std::vector<ValuationEstimate> slopes;  // derivative orders 0..max_order
  double worst_slope = ValuationEstimate::infinity;
  int witness_order = -1;
  bool singular = false;
};

/// Bounded-type test of d^k u/dr^k, k ≤ max_order, on each radial interval.
std::vector<RadialVerdict> radial_singsupp(const RadialNet& net, const std::vector<Interval>& cells,
                                           double tol = default_slope_tol, int max_order = 3);

}  // namespace cgw
