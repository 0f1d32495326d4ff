#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>

#include "cgwave/errors.hpp"
#include "cgwave/stencil.hpp"

namespace cgw {

using Index = Eigen::Index;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool empty() const { return hi < lo; }
  bool contains(double v, double tol = 0.0) const { return v >= lo - tol && v <= hi + tol; }
  bool contains(const Interval& o, double tol = 0.0) const {
    return o.lo >= lo - tol && o.hi <= hi + tol;
  }
  Interval intersect(const Interval& o) const { return {std::max(lo, o.lo), std::min(hi, o.hi)}; }
  bool operator==(const Interval&) const = default;
};

/// Closed axis-aligned box in (x) or (t, x).
struct Box {
  int dim = 1;
  Interval t{0.0, 0.0};
  Interval x{0.0, 0.0};

  static Box line(double x_lo, double x_hi) { return {1, {0.0, 0.0}, {x_lo, x_hi}}; }
  static Box rect(double t_lo, double t_hi, double x_lo, double x_hi) {
    return {2, {t_lo, t_hi}, {x_lo, x_hi}};
  }

  bool empty() const { return x.empty() || (dim == 2 && t.empty()); }
  bool contains(const Box& o, double tol = 1e-12) const {
    return x.contains(o.x, tol) && (dim == 1 || t.contains(o.t, tol));
  }
  Box intersect(const Box& o) const { return {dim, t.intersect(o.t), x.intersect(o.x)}; }
  bool operator==(const Box&) const = default;
};

/// Box plus a free-text label; one member of a seminorm region.
struct CompactRegion {
  Box box;
  std::string label;
};

enum class Direction { t, x, plus, minus };

/// Samples of one smooth function on a uniform lattice including both endpoints.
/// Rows are t nodes (a single row for 1-D data), columns are x nodes.
template <typename Scalar>
class BasicGridFunction {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  BasicGridFunction() = default;

  BasicGridFunction(int dim, double t0, double ht, double x0, double hx, Array values)
      : dim_(dim), t0_(t0), ht_(ht), x0_(x0), hx_(hx), values_(std::move(values)) {
    require(dim == 1 || dim == 2, ErrorCode::InvalidArgument, "grid dimension must be 1 or 2");
    require(hx > 0.0 && (dim == 1 || ht > 0.0), ErrorCode::InvalidArgument,
            "grid spacing must be positive");
    require(dim == 2 || values_.rows() == 1, ErrorCode::InvalidArgument,
            "1-D grid holds a single row");
  }

  /// Node count on [lo, hi] at spacing h; the last node is lo + (n-1)h <= hi (+rounding slack).
  static Index node_count(double lo, double hi, double h) {
    return static_cast<Index>(std::floor((hi - lo) / h + 1e-9)) + 1;
  }

  static BasicGridFunction sample(const Box& box, double h,
                                  const std::function<Scalar(double, double)>& fn) {
    return sample(box, h, h, fn);
  }

  static BasicGridFunction sample(const Box& box, double ht, double hx,
                                  const std::function<Scalar(double, double)>& fn) {
    const Index nx = node_count(box.x.lo, box.x.hi, hx);
    const Index nt = box.dim == 2 ? node_count(box.t.lo, box.t.hi, ht) : 1;
    Array v(nt, nx);
    for (Index i = 0; i < nt; ++i) {
      const double t = box.dim == 2 ? box.t.lo + double(i) * ht : 0.0;
      for (Index j = 0; j < nx; ++j) v(i, j) = fn(t, box.x.lo + double(j) * hx);
    }
    return BasicGridFunction(box.dim, box.dim == 2 ? box.t.lo : 0.0, box.dim == 2 ? ht : 0.0,
                             box.x.lo, hx, std::move(v));
  }

  static BasicGridFunction zeros_like(const BasicGridFunction& g) {
    return BasicGridFunction(g.dim_, g.t0_, g.ht_, g.x0_, g.hx_,
                             Array::Zero(g.values_.rows(), g.values_.cols()));
  }

  int dim() const { return dim_; }
  double t0() const { return t0_; }
  double x0() const { return x0_; }
  double ht() const { return ht_; }
  double hx() const { return hx_; }
  Index nt() const { return values_.rows(); }
  Index nx() const { return values_.cols(); }
  double t(Index i) const { return t0_ + double(i) * ht_; }
  double x(Index j) const { return x0_ + double(j) * hx_; }

  Box domain() const {
    Box b;
    b.dim = dim_;
    b.x = {x0_, x(nx() - 1)};
    if (dim_ == 2) b.t = {t0_, t(nt() - 1)};
    return b;
  }

  const Array& values() const { return values_; }
  Array& values() { return values_; }
  Scalar operator()(Index i, Index j) const { return values_(i, j); }
  Scalar& operator()(Index i, Index j) { return values_(i, j); }

  bool same_geometry(const BasicGridFunction& o, double tol = 1e-12) const {
    return dim_ == o.dim_ && nt() == o.nt() && nx() == o.nx() &&
           std::abs(x0_ - o.x0_) <= tol * std::max(1.0, std::abs(x0_)) &&
           std::abs(hx_ - o.hx_) <= tol * hx_ &&
           (dim_ == 1 || (std::abs(t0_ - o.t0_) <= tol * std::max(1.0, std::abs(t0_)) &&
                          std::abs(ht_ - o.ht_) <= tol * ht_));
  }

  bool is_diagonal_lattice() const {
    return dim_ == 2 && std::abs(ht_ - hx_) <= 1e-12 * hx_;
  }

  /// Index range [first, last] of nodes inside the closed interval; empty when first > last.
  std::pair<Index, Index> x_range(const Interval& iv) const { return range(iv, x0_, hx_, nx()); }
  std::pair<Index, Index> t_range(const Interval& iv) const {
    if (dim_ == 1) return {0, 0};
    return range(iv, t0_, ht_, nt());
  }

  bool all_finite() const { return values_.isFinite().all(); }

 private:
  static std::pair<Index, Index> range(const Interval& iv, double origin, double h, Index n) {
    const double tol = 1e-9;
    Index first = static_cast<Index>(std::ceil((iv.lo - origin) / h - tol));
    Index last = static_cast<Index>(std::floor((iv.hi - origin) / h + tol));
    first = std::max<Index>(first, 0);
    last = std::min<Index>(last, n - 1);
    return {first, last};
  }

  int dim_ = 1;
  double t0_ = 0.0;
  double ht_ = 0.0;
  double x0_ = 0.0;
  double hx_ = 1.0;
  Array values_;
};

using GridFunction = BasicGridFunction<double>;

/// Central difference of the given order; the output loses radius*stride nodes on each side
/// of every differentiated axis. For plus/minus the step runs along lattice diagonals and has
/// length sqrt(2)*stride*h, matching the unit directions (t̂ ± x̂)/sqrt(2).
template <typename Scalar>
BasicGridFunction<Scalar> differentiate(const BasicGridFunction<Scalar>& g, Direction dir,
                                        int order, int stride = 1) {
  using Grid = BasicGridFunction<Scalar>;
  require(order >= 0 && order <= max_stencil_order, ErrorCode::InvalidArgument,
          "derivative order must lie in 0..6");
  require(stride >= 1, ErrorCode::InvalidArgument, "stride must be positive");
  if (order == 0) return g;
  const Stencil& st = central_stencil(order);
  const Index reach = Index(st.radius) * stride;
  const bool uses_t = dir != Direction::x;
  const bool uses_x = dir != Direction::t;
  if (g.dim() == 1)
    require(dir == Direction::x, ErrorCode::InvalidArgument, "1-D grids differentiate in x only");
  if (dir == Direction::plus || dir == Direction::minus)
    require(g.is_diagonal_lattice(), ErrorCode::LatticeMismatch,
            "directional derivatives need equal t and x spacing");
  require(g.nx() >= 2 * reach + 1 || !uses_x, ErrorCode::GridTooCoarse,
          "too few x nodes for the stencil");
  require(g.dim() == 1 || g.nt() >= 2 * reach + 1 || !uses_t, ErrorCode::GridTooCoarse,
          "too few t nodes for the stencil");

  const Index di = uses_t ? reach : 0;
  const Index dj = uses_x ? reach : 0;
  const Index nt = g.dim() == 2 ? g.nt() - 2 * di : 1;
  const Index nx = g.nx() - 2 * dj;
  const double step = (dir == Direction::plus || dir == Direction::minus)
                          ? std::sqrt(2.0) * stride * g.hx()
                          : stride * (dir == Direction::t ? g.ht() : g.hx());
  const double scale = 1.0 / std::pow(step, order);
  const Index ti = dir == Direction::x ? 0 : stride;
  const Index tj = dir == Direction::t ? 0 : (dir == Direction::minus ? -stride : stride);

  typename Grid::Array out(nt, nx);
  for (Index i = 0; i < nt; ++i) {
    for (Index j = 0; j < nx; ++j) {
      Scalar acc = 0;
      for (int p = -st.radius; p <= st.radius; ++p) {
        const double w = st.at(p);
        if (w == 0.0) continue;
        acc += Scalar(w) * g(i + di + p * ti, j + dj + p * tj);
      }
      out(i, j) = acc * Scalar(scale);
    }
  }
  const double t0 = g.dim() == 2 ? g.t(di) : 0.0;
  return Grid(g.dim(), t0, g.ht(), g.x(dj), g.hx(), std::move(out));
}

/// Max |value| over nodes inside the closed box.
template <typename Scalar>
double sup_abs(const BasicGridFunction<Scalar>& g, const Box& box) {
  const auto [j0, j1] = g.x_range(box.x);
  const auto [i0, i1] = g.dim() == 2 ? g.t_range(box.t) : std::pair<Index, Index>{0, 0};
  require(j0 <= j1 && i0 <= i1, ErrorCode::EmptyDomain, "box contains no grid node");
  return static_cast<double>(
      g.values().block(i0, j0, i1 - i0 + 1, j1 - j0 + 1).abs().maxCoeff());
}

namespace detail {

/// Four-point Lagrange interpolation with the stencil clamped inside [0, n-1].
template <typename Scalar, typename Fetch>
Scalar cubic_at(double s, Index n, Fetch fetch) {
  if (n == 1) return fetch(0);
  Index base = static_cast<Index>(std::floor(s)) - 1;
  base = std::clamp<Index>(base, 0, std::max<Index>(n - 4, 0));
  const Index m = std::min<Index>(4, n);
  const double nearest = std::round(s);
  if (std::abs(s - nearest) < 1e-12 && nearest >= 0 && nearest <= double(n - 1))
    return fetch(static_cast<Index>(nearest));
  Scalar acc = 0;
  for (Index a = 0; a < m; ++a) {
    double w = 1.0;
    for (Index b = 0; b < m; ++b)
      if (b != a) w *= (s - double(base + b)) / double(a - b);
    acc += Scalar(w) * fetch(base + a);
  }
  return acc;
}

}  // namespace detail

/// Cubic resampling of g onto the nodes of `box` at the given spacings.
template <typename Scalar>
BasicGridFunction<Scalar> resample(const BasicGridFunction<Scalar>& g, const Box& box, double ht,
                                   double hx) {
  using Grid = BasicGridFunction<Scalar>;
  const Index nx = Grid::node_count(box.x.lo, box.x.hi, hx);
  const Index nt = g.dim() == 2 ? Grid::node_count(box.t.lo, box.t.hi, ht) : 1;
  // interpolate along x for every source row, then along t
  typename Grid::Array rows(g.nt(), nx);
  for (Index i = 0; i < g.nt(); ++i)
    for (Index j = 0; j < nx; ++j) {
      const double s = (box.x.lo + double(j) * hx - g.x0()) / g.hx();
      rows(i, j) = detail::cubic_at<Scalar>(s, g.nx(), [&](Index k) { return g(i, k); });
    }
  if (g.dim() == 1) return Grid(1, 0.0, 0.0, box.x.lo, hx, std::move(rows));
  typename Grid::Array out(nt, nx);
  for (Index i = 0; i < nt; ++i) {
    const double s = (box.t.lo + double(i) * ht - g.t0()) / g.ht();
    for (Index j = 0; j < nx; ++j)
      out(i, j) = detail::cubic_at<Scalar>(s, g.nt(), [&](Index k) { return rows(k, j); });
  }
  return Grid(2, box.t.lo, ht, box.x.lo, hx, std::move(out));
}

/// The sub-grid of nodes inside `box` (same nodes, same values).
template <typename Scalar>
BasicGridFunction<Scalar> restrict_to(const BasicGridFunction<Scalar>& g, const Box& box) {
  using Grid = BasicGridFunction<Scalar>;
  const auto [j0, j1] = g.x_range(box.x);
  const auto [i0, i1] = g.dim() == 2 ? g.t_range(box.t) : std::pair<Index, Index>{0, 0};
  require(j0 <= j1 && i0 <= i1, ErrorCode::EmptyDomain, "restriction box holds no node");
  typename Grid::Array v = g.values().block(i0, j0, i1 - i0 + 1, j1 - j0 + 1);
  return Grid(g.dim(), g.dim() == 2 ? g.t(i0) : 0.0, g.ht(), g.x(j0), g.hx(), std::move(v));
}

}  // namespace cgw
