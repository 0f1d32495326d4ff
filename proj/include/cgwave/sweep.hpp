#pragma once

#include <cstddef>
#include <vector>

#include "cgwave/lattice.hpp"
#include "cgwave/nonlinearity.hpp"

namespace cgw {

/// f(a) - f(b) written so that no cancellation occurs when d = a - b is small.
double nonlinearity_difference(NonlinearityId f, double a, double b, double d);

/// One epsilon of the characteristic fixed-point problem on a diagonal lattice.
/// Iterate 0 is the free evolution of (start_V0, start_W0); iterate k+1 = F(iterate k) with
/// F built from (V0, W0). All data vectors hold one value per lattice x node.
struct SweepProblem {
  DiagonalLattice lattice;
  double eps = 1.0;
  double coupling = 1.0;  // eps^E
  NonlinearityId f = NonlinearityId::zero;
  const std::vector<double>* V0 = nullptr;
  const std::vector<double>* W0 = nullptr;
  const std::vector<double>* start_V0 = nullptr;  // defaults to V0
  const std::vector<double>* start_W0 = nullptr;
  std::size_t iterations = 1;  // K >= 1
};

/// Rows of one t-slice. V, W, U belong to iterate K; dV[k-1], dW[k-1] hold
/// iterate k minus iterate k-1 for k = 1..K. Entries outside [lo, hi] are zero.
struct SliceView {
  Index i = 0;
  Index lo = 0, hi = 0;
  const double* V = nullptr;
  const double* W = nullptr;
  const double* U = nullptr;
  std::vector<const double*> dV, dW;
};

class SweepObserver {
 public:
  virtual ~SweepObserver() = default;
  virtual void on_slice(const SliceView& slice) = 0;
};

struct SweepResult {
  std::vector<double> change;  // change[k-1] = sup over the lattice of |dV^k|, |dW^k|
  std::size_t iterations = 0;
};

/// Balanced cumulative integral of q over [lo, hi]: ∫ from the left end for x ≤ 0 and
/// -∫ to the right end for x > 0; writes out[lo..hi].
void balanced_integral(const double* q, double* out, Index lo, Index hi, Index center, double h);

SweepResult run_sweep(const SweepProblem& p, const std::vector<SweepObserver*>& observers);

/// Index range of non-zero entries, or {1, 0} when all are zero.
std::pair<Index, Index> support_range(const std::vector<double>& v);

}  // namespace cgw
