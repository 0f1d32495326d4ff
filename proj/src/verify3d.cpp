#include "cgwave/verify3d.hpp"

#include <algorithm>
#include <cmath>

#include "cgwave/errors.hpp"
#include "cgwave/parallel.hpp"
#include "cgwave/stencil.hpp"

namespace cgw {

namespace {

constexpr Index ghost = 3;

std::pair<Index, Index> node_range(const RadialNet& net, std::size_t k, const Interval& iv) {
  const double h = net.h[k];
  Index first = static_cast<Index>(std::ceil(iv.lo / h - 0.5 - 1e-9));
  Index last = static_cast<Index>(std::floor(iv.hi / h - 0.5 + 1e-9));
  first = std::max<Index>(first, 0);
  last = std::min<Index>(last, net.count[k] - 1);
  return {first, last};
}

}  // namespace

double radial_profile(double eps, double r) { return 1.0 / std::sqrt(r * r + eps); }

double radial_minus_laplacian(double eps, double r) {
  return 3.0 * eps * std::pow(r * r + eps, -2.5);
}

RadialNet make_radial_net(const EpsilonLadder& ladder, double R, double nodes_per_sqrt_eps) {
  require(R > 0, ErrorCode::InvalidArgument, "radial extent must be positive");
  require(nodes_per_sqrt_eps >= 16, ErrorCode::GridTooCoarse,
          "radial spacing must not exceed sqrt(eps)/16");
  RadialNet net;
  net.ladder = ladder;
  net.R = R;
  for (double eps : ladder.values()) {
    const double h = std::sqrt(eps) / nodes_per_sqrt_eps;
    const auto n = static_cast<Index>(std::floor(R / h - 0.5 + 1e-9)) + 1;
    std::vector<double> v(static_cast<std::size_t>(n + ghost));
    for (Index j = 0; j < n + ghost; ++j) v[std::size_t(j)] = radial_profile(eps, (j + 0.5) * h);
    net.h.push_back(h);
    net.count.push_back(n);
    net.values.push_back(std::move(v));
  }
  return net;
}

RadialResidual radial_residual(const RadialNet& net, int accuracy, double E_exponent) {
  const Stencil& d1 = high_order_stencil(1, accuracy);
  const Stencil& d2 = high_order_stencil(2, accuracy);
  RadialResidual out;
  out.accuracy = accuracy;
  out.eps = net.ladder.values();
  out.h_r = net.h;
  out.sup_residual.assign(net.size(), 0.0);
  parallel_for(net.size(), [&](std::size_t k) {
    const double eps = net.ladder[k];
    const double h = net.h[k];
    require(h <= std::sqrt(eps) / 16 * (1 + 1e-12), ErrorCode::GridTooCoarse,
            "radial spacing must not exceed sqrt(eps)/16");
    const double E = std::pow(eps, E_exponent);
    const auto [first, last] = node_range(net, k, {h, net.R});
    double sup = 0.0;
    for (Index j = first; j <= last; ++j) {
      double u1 = 0.0, u2 = 0.0;
      for (int o = -d2.radius; o <= d2.radius; ++o) {
        u1 += d1.at(o) * net.at(k, j + o);
        u2 += d2.at(o) * net.at(k, j + o);
      }
      u1 /= h;
      u2 /= h * h;
      const double u = net.at(k, j);
      const double res = -(u2 + 2.0 * u1 / net.r(k, j)) - 3.0 * E * std::pow(u, 5);
      sup = std::max(sup, std::abs(res));
    }
    out.sup_residual[k] = sup;
  });
  return out;
}

std::vector<RadialVerdict> radial_singsupp(const RadialNet& net, const std::vector<Interval>& cells,
                                           double tol, int max_order) {
  require(max_order >= 0 && max_order <= 3, ErrorCode::InvalidArgument,
          "radial derivative order must lie in 0..3");
  const std::size_t orders = std::size_t(max_order) + 1;
  // sups[cell][order][k]
  std::vector<std::vector<std::vector<double>>> sups(
      cells.size(), std::vector<std::vector<double>>(orders, std::vector<double>(net.size(), 0.0)));
  parallel_for(net.size(), [&](std::size_t k) {
    const double h = net.h[k];
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto [first, last] = node_range(net, k, cells[c]);
      require(first <= last, ErrorCode::InvalidArgument, "radial cell holds no grid node");
      for (std::size_t m = 0; m < orders; ++m) {
        const Stencil& st = central_stencil(int(m));
        const double scale = std::pow(h, -double(m));
        double sup = 0.0;
        for (Index j = first; j <= last; ++j) {
          double d = 0.0;
          for (int o = -st.radius; o <= st.radius; ++o) d += st.at(o) * net.at(k, j + o);
          sup = std::max(sup, std::abs(d) * scale);
        }
        sups[c][m][k] = sup;
      }
    }
  });

  std::vector<RadialVerdict> out;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    RadialVerdict v;
    v.cell = cells[c];
    for (std::size_t m = 0; m < orders; ++m) {
      const ValuationEstimate est = fit_valuation(net.ladder, sups[c][m]);
      if (est.slope < v.worst_slope) {
        v.worst_slope = est.slope;
        v.witness_order = int(m);
      }
      v.slopes.push_back(est);
    }
    v.singular = v.worst_slope < -tol;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace cgw
