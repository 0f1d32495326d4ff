#pragma once

#include <functional>
#include <vector>

#include "cgwave/grid.hpp"
#include "cgwave/ladder.hpp"
#include "cgwave/nonlinearity.hpp"

namespace cgw {

/// One representative (u^eps) sampled on one grid per ladder entry.
template <typename Scalar>
class RepresentativeNet {
 public:
  using Grid = BasicGridFunction<Scalar>;

  RepresentativeNet() = default;

  RepresentativeNet(EpsilonLadder ladder, std::vector<Grid> grids, Box logical_domain)
      : ladder_(std::move(ladder)), grids_(std::move(grids)), domain_(logical_domain) {
    require(grids_.size() == ladder_.size(), ErrorCode::LadderMismatch,
            "one grid per ladder entry is required");
    require(!domain_.empty(), ErrorCode::EmptyDomain, "logical domain is empty");
    for (std::size_t k = 0; k < grids_.size(); ++k) {
      const Grid& g = grids_[k];
      require(g.dim() == domain_.dim, ErrorCode::InvalidArgument, "grid dimension mismatch");
      const double tol = 1e-9 * std::max(1.0, std::abs(domain_.x.hi) + std::abs(domain_.x.lo));
      require(g.domain().contains(domain_, tol), ErrorCode::InvalidArgument,
              "grid does not cover the logical domain");
      if (k > 0)
        require(g.hx() <= grids_[k - 1].hx() * (1 + 1e-12), ErrorCode::InvalidArgument,
                "spacing must not grow along the ladder");
    }
  }

  const EpsilonLadder& ladder() const { return ladder_; }
  const Box& logical_domain() const { return domain_; }
  std::size_t size() const { return grids_.size(); }
  const Grid& operator[](std::size_t k) const { return grids_[k]; }
  Grid& operator[](std::size_t k) { return grids_[k]; }
  const std::vector<Grid>& grids() const { return grids_; }
  double epsilon(std::size_t k) const { return ladder_[k]; }

 private:
  EpsilonLadder ladder_;
  std::vector<Grid> grids_;
  Box domain_;
};

using Net = RepresentativeNet<double>;

/// Samples fn(eps, t, x) on `domain` at spacing rule(eps); 2-D grids use equal t and x steps.
template <typename Scalar = double>
RepresentativeNet<Scalar> make_net(const EpsilonLadder& ladder, const Box& domain,
                                   const SpacingRule& rule,
                                   const std::function<Scalar(double, double, double)>& fn) {
  std::vector<BasicGridFunction<Scalar>> grids;
  grids.reserve(ladder.size());
  for (double eps : ladder.values()) {
    const double h = rule.h(eps);
    grids.push_back(BasicGridFunction<Scalar>::sample(
        domain, h, [&](double t, double x) { return fn(eps, t, x); }));
  }
  return RepresentativeNet<Scalar>(ladder, std::move(grids), domain);
}

template <typename Scalar>
RepresentativeNet<Scalar> zero_net_like(const RepresentativeNet<Scalar>& u) {
  std::vector<BasicGridFunction<Scalar>> grids;
  for (const auto& g : u.grids()) grids.push_back(BasicGridFunction<Scalar>::zeros_like(g));
  return RepresentativeNet<Scalar>(u.ladder(), std::move(grids), u.logical_domain());
}

enum class BinaryOp { add, sub, mul };

template <typename Scalar>
RepresentativeNet<Scalar> net_binary(BinaryOp op, const RepresentativeNet<Scalar>& u,
                                     const RepresentativeNet<Scalar>& v) {
  using Grid = BasicGridFunction<Scalar>;
  require(u.ladder() == v.ladder(), ErrorCode::LadderMismatch, "nets use different ladders");
  require(u.logical_domain().dim == v.logical_domain().dim, ErrorCode::InvalidArgument,
          "nets differ in dimension");
  const Box box = u.logical_domain().intersect(v.logical_domain());
  require(!box.empty(), ErrorCode::EmptyDomain, "net domains do not intersect");
  std::vector<Grid> out;
  out.reserve(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    const Grid& gu = u[k];
    const Grid& gv = v[k];
    Grid a, b;
    if (gu.same_geometry(gv)) {
      a = gu;
      b = gv;
    } else {
      const double hx = std::min(gu.hx(), gv.hx());
      const double ht = gu.dim() == 2 ? std::min(gu.ht(), gv.ht()) : 0.0;
      a = resample(gu, box, ht, hx);
      b = resample(gv, box, ht, hx);
    }
    typename Grid::Array r;
    switch (op) {
      case BinaryOp::add: r = a.values() + b.values(); break;
      case BinaryOp::sub: r = a.values() - b.values(); break;
      case BinaryOp::mul: r = a.values() * b.values(); break;
    }
    out.emplace_back(a.dim(), a.t0(), a.ht(), a.x0(), a.hx(), std::move(r));
  }
  return RepresentativeNet<Scalar>(u.ladder(), std::move(out), box);
}

template <typename Scalar>
RepresentativeNet<Scalar> operator+(const RepresentativeNet<Scalar>& u,
                                    const RepresentativeNet<Scalar>& v) {
  return net_binary(BinaryOp::add, u, v);
}
template <typename Scalar>
RepresentativeNet<Scalar> operator-(const RepresentativeNet<Scalar>& u,
                                    const RepresentativeNet<Scalar>& v) {
  return net_binary(BinaryOp::sub, u, v);
}
template <typename Scalar>
RepresentativeNet<Scalar> operator*(const RepresentativeNet<Scalar>& u,
                                    const RepresentativeNet<Scalar>& v) {
  return net_binary(BinaryOp::mul, u, v);
}

/// Pointwise map of every value; ladder, grids and domain are kept.
template <typename Scalar, typename Fn>
RepresentativeNet<Scalar> map_values(const RepresentativeNet<Scalar>& u, Fn fn) {
  std::vector<BasicGridFunction<Scalar>> grids = u.grids();
  for (auto& g : grids) g.values() = g.values().unaryExpr(fn);
  return RepresentativeNet<Scalar>(u.ladder(), std::move(grids), u.logical_domain());
}

template <typename Scalar>
RepresentativeNet<Scalar> superpose(NonlinearityId f, const RepresentativeNet<Scalar>& u) {
  return map_values(u, [f](Scalar s) { return apply_nonlinearity<Scalar>(f, s); });
}

template <typename Scalar>
RepresentativeNet<Scalar> scale(const RepresentativeNet<Scalar>& u, Scalar lambda) {
  return map_values(u, [lambda](Scalar s) { return lambda * s; });
}

/// Per-epsilon multiplication by c(eps).
template <typename Scalar>
RepresentativeNet<Scalar> scale_by_epsilon(const RepresentativeNet<Scalar>& u,
                                           const std::function<double(double)>& c) {
  std::vector<BasicGridFunction<Scalar>> grids = u.grids();
  for (std::size_t k = 0; k < grids.size(); ++k) grids[k].values() *= Scalar(c(u.epsilon(k)));
  return RepresentativeNet<Scalar>(u.ladder(), std::move(grids), u.logical_domain());
}

template <typename Scalar>
RepresentativeNet<Scalar> diff(const RepresentativeNet<Scalar>& u, Direction dir, int order,
                               int stride = 1) {
  std::vector<BasicGridFunction<Scalar>> grids;
  grids.reserve(u.size());
  Box box = u.logical_domain();
  for (const auto& g : u.grids()) {
    grids.push_back(differentiate(g, dir, order, stride));
    box = box.intersect(grids.back().domain());
  }
  require(!box.empty(), ErrorCode::GridTooCoarse, "derivative leaves no common domain");
  return RepresentativeNet<Scalar>(u.ladder(), std::move(grids), box);
}

namespace detail {

template <typename Row>
void cumulative_trapezoid(const Row& in, Row& out, double h, double lower, double x0) {
  const Index n = in.size();
  out.resize(n);
  out(0) = 0;
  for (Index j = 1; j < n; ++j) out(j) = out(j - 1) + 0.5 * h * (in(j - 1) + in(j));
  // shift so the integral is anchored at `lower` (linear interpolation inside its cell)
  const double s = (lower - x0) / h;
  Index m = std::clamp<Index>(static_cast<Index>(std::floor(s)), 0, std::max<Index>(n - 2, 0));
  const double frac = s - double(m);
  typename Row::Scalar anchor = out(m);
  if (frac > 1e-12 && n > 1) {
    const auto f_lower = in(m) + (in(m + 1) - in(m)) * frac;
    anchor += 0.5 * frac * h * (in(m) + f_lower);
  }
  out -= anchor;
}

}  // namespace detail

/// Cumulative trapezoid ∫_lower^x u dy at every t row.
template <typename Scalar>
RepresentativeNet<Scalar> integrate_x(const RepresentativeNet<Scalar>& u, double lower) {
  using Grid = BasicGridFunction<Scalar>;
  require(u.logical_domain().x.contains(lower, 1e-12), ErrorCode::OutOfDomain,
          "lower limit lies outside the domain");
  std::vector<Grid> grids;
  for (const Grid& g : u.grids()) {
    typename Grid::Array out(g.nt(), g.nx());
    Eigen::Array<Scalar, Eigen::Dynamic, 1> row, acc;
    for (Index i = 0; i < g.nt(); ++i) {
      row = g.values().row(i).transpose();
      detail::cumulative_trapezoid(row, acc, g.hx(), lower, g.x0());
      out.row(i) = acc.transpose();
    }
    grids.emplace_back(g.dim(), g.t0(), g.ht(), g.x0(), g.hx(), std::move(out));
  }
  return RepresentativeNet<Scalar>(u.ladder(), std::move(grids), u.logical_domain());
}

/// The 1-D net at the t-row of each grid nearest to t.
template <typename Scalar>
RepresentativeNet<Scalar> slice_t(const RepresentativeNet<Scalar>& u, double t) {
  using Grid = BasicGridFunction<Scalar>;
  if (u.logical_domain().dim == 1) return u;
  require(u.logical_domain().t.contains(t, 1e-12), ErrorCode::OutOfDomain,
          "slice time lies outside the domain");
  std::vector<Grid> grids;
  for (const Grid& g : u.grids()) {
    const Index i = std::clamp<Index>(static_cast<Index>(std::lround((t - g.t0()) / g.ht())), 0,
                                      g.nt() - 1);
    typename Grid::Array row = g.values().row(i);
    grids.emplace_back(1, 0.0, 0.0, g.x0(), g.hx(), std::move(row));
  }
  return RepresentativeNet<Scalar>(u.ladder(), std::move(grids),
                                   Box::line(u.logical_domain().x.lo, u.logical_domain().x.hi));
}

/// The 1-D net of the t-row nearest to t_slice, integrated from `lower`.
template <typename Scalar>
RepresentativeNet<Scalar> integrate_x(const RepresentativeNet<Scalar>& u, double lower,
                                      double t_slice) {
  return integrate_x(slice_t(u, t_slice), lower);
}

template <typename Scalar>
RepresentativeNet<Scalar> restrict_to(const RepresentativeNet<Scalar>& u, const Box& box) {
  require(u.logical_domain().contains(box), ErrorCode::OutOfDomain,
          "restriction box leaves the domain");
  std::vector<BasicGridFunction<Scalar>> grids;
  for (const auto& g : u.grids()) grids.push_back(restrict_to(g, box));
  return RepresentativeNet<Scalar>(u.ladder(), std::move(grids), box);
}

/// Max |u| over the nodes inside K, one value per ladder entry.
template <typename Scalar>
std::vector<double> sup_on(const RepresentativeNet<Scalar>& u, const Box& K) {
  require(!K.empty(), ErrorCode::EmptyDomain, "region is empty");
  require(u.logical_domain().contains(K), ErrorCode::OutOfDomain,
          "region lies outside the logical domain");
  std::vector<double> out;
  out.reserve(u.size());
  for (const auto& g : u.grids()) out.push_back(sup_abs(g, K));
  return out;
}

template <typename Scalar>
std::vector<double> sup_on(const RepresentativeNet<Scalar>& u, const CompactRegion& K) {
  return sup_on(u, K.box);
}

}  // namespace cgw
