#pragma once

#include <cmath>

#include "cgwave/errors.hpp"
#include "cgwave/grid.hpp"

namespace cgw {

/// Nodes (i·h, x_lo + j·h), i = 0..nt-1 covering [0,T], j = 0..nx-1 covering [-X, X].
struct DiagonalLattice {
  double h = 0.0;
  double T = 0.0;
  double x_lo = 0.0;
  Index nt = 0;
  Index nx = 0;

  static Index exact_steps(double length, double h, const char* what) {
    const double q = length / h;
    const double r = std::round(q);
    require(r >= 1 && std::abs(q - r) <= 1e-9 * std::max(1.0, q), ErrorCode::LatticeMismatch,
            std::string(what) + " is not an integer multiple of the lattice step");
    return static_cast<Index>(r);
  }

  static DiagonalLattice make(double h, double T, double half_width) {
    require(h > 0 && T > 0 && half_width > 0, ErrorCode::InvalidArgument,
            "lattice needs positive h, T and width");
    DiagonalLattice L;
    L.h = h;
    L.T = T;
    L.nt = exact_steps(T, h, "horizon") + 1;
    const Index half = exact_steps(half_width, h, "half width");
    L.nx = 2 * half + 1;
    L.x_lo = -double(half) * h;
    return L;
  }

  double t(Index i) const { return double(i) * h; }
  double x(Index j) const { return x_lo + double(j) * h; }
  double x_hi() const { return x(nx - 1); }
  Index center() const { return (nx - 1) / 2; }
  Box box() const { return Box::rect(0.0, T, x_lo, x_hi()); }
};

/// Lattice stride whose physical length is closest to `step` (at least one node).
inline int stride_for(double step, double h) {
  if (step <= 0) return 1;
  return std::max(1, static_cast<int>(std::lround(step / h)));
}

}  // namespace cgw
