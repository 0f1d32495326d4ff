#include "cgwave/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "cgwave/lattice.hpp"
#include "cgwave/net_io.hpp"
#include "cgwave/seminorm_stream.hpp"
#include "json.hpp"

namespace cgw {

bool contained_in_union(const Box& b, const BoxUnion& u, double tol) {
  return std::any_of(u.begin(), u.end(), [&](const Box& o) { return o.contains(b, tol); });
}

namespace {

// [t_lo,t_hi] ∩ [0,T] meets the parameter range where the line x = sign·t crosses the box
bool touches_line(const Box& b, double T, int sign) {
  const double lo = std::max({b.t.lo, 0.0, sign > 0 ? b.x.lo : -b.x.hi});
  const double hi = std::min({b.t.hi, T, sign > 0 ? b.x.hi : -b.x.lo});
  return lo <= hi;
}

}  // namespace

void RegionLadder::validate() const {
  require(!regions.empty(), ErrorCode::BadRegionLadder, "region ladder is empty");
  auto check_nested = [](const std::vector<BoxUnion>& levels, const char* what) {
    for (std::size_t n = 0; n < levels.size(); ++n) {
      for (const Box& b : levels[n])
        require(!b.empty(), ErrorCode::BadRegionLadder, std::string(what) + " has an empty box");
      if (n + 1 < levels.size())
        for (const Box& b : levels[n])
          require(contained_in_union(b, levels[n + 1]), ErrorCode::BadRegionLadder,
                  std::string(what) + " levels are not nested");
    }
  };
  check_nested(regions, "K_n");
  if (flavor == Flavor::standard) return;
  require(plus_regions.size() == regions.size() && minus_regions.size() == regions.size(),
          ErrorCode::BadRegionLadder, "directional ladder needs K+_n and K-_n at every level");
  check_nested(plus_regions, "K+_n");
  check_nested(minus_regions, "K-_n");
  for (const auto& level : plus_regions)
    for (const Box& b : level)
      require(!touches_line(b, horizon, -1), ErrorCode::BadRegionLadder,
              "a K+_n box meets the line x = -t");
  for (const auto& level : minus_regions)
    for (const Box& b : level)
      require(!touches_line(b, horizon, +1), ErrorCode::BadRegionLadder,
              "a K-_n box meets the line x = t");
}

RegionLadder RegionLadder::standard(std::vector<Box> nested) {
  RegionLadder r;
  for (const Box& b : nested) r.regions.push_back({b});
  r.validate();
  return r;
}

RegionLadder RegionLadder::constant(const Box& K, std::size_t levels) {
  return standard(std::vector<Box>(levels, K));
}

RegionLadder RegionLadder::directional(double T, double R, std::size_t levels, double delta0,
                                       double delta_min, double sigma) {
  require(T > 0 && R > 0 && sigma > 0 && delta_min > 0, ErrorCode::BadRegionLadder,
          "directional ladder parameters must be positive");
  RegionLadder r;
  r.flavor = Flavor::directional;
  r.horizon = T;
  const auto steps = static_cast<int>(std::ceil(T / sigma - 1e-9));
  for (std::size_t n = 0; n < levels; ++n) {
    const double delta = std::max(delta0 * std::ldexp(1.0, -static_cast<int>(n)), delta_min);
    r.regions.push_back({Box::rect(0, T, -R, R)});
    BoxUnion plus, minus;
    for (int m = 0; m < steps; ++m) {
      const double t0 = m * sigma, t1 = std::min(T, (m + 1) * sigma);
      // K+ : x + t >= delta or x + t <= -delta
      if (delta - t0 <= R) plus.push_back(Box::rect(t0, t1, delta - t0, R));
      if (-delta - t1 >= -R) plus.push_back(Box::rect(t0, t1, -R, -delta - t1));
      // K- : x - t >= delta or x - t <= -delta
      if (delta + t1 <= R) minus.push_back(Box::rect(t0, t1, delta + t1, R));
      if (t0 - delta >= -R) minus.push_back(Box::rect(t0, t1, -R, t0 - delta));
    }
    r.plus_regions.push_back(std::move(plus));
    r.minus_regions.push_back(std::move(minus));
  }
  r.validate();
  return r;
}

ValuationEstimate fit_valuation(const EpsilonLadder& ladder, const std::vector<double>& values,
                                Window window) {
  require(values.size() == ladder.size(), ErrorCode::LadderMismatch,
          "one value per ladder entry is required");
  const std::size_t N = ladder.size();
  ValuationEstimate v;
  if (window.automatic) {
    const std::size_t len = std::max<std::size_t>(3, (N + 1) / 2);
    require(len <= N, ErrorCode::InsufficientLadder, "ladder too short for a slope fit");
    v.window_lo = N - len;
    v.window_hi = N - 1;
  } else {
    require(window.lo <= window.hi && window.hi < N, ErrorCode::InvalidArgument,
            "window outside the ladder");
    v.window_lo = window.lo;
    v.window_hi = window.hi;
  }
  require(v.window_hi - v.window_lo + 1 >= 3, ErrorCode::InsufficientLadder,
          "slope window needs at least 3 entries");
  for (std::size_t k = v.window_lo; k <= v.window_hi; ++k)
    require(std::isfinite(values[k]) && values[k] >= 0, ErrorCode::InvalidArgument,
            "seminorm values must be finite and non-negative");
  if (values[v.window_hi] <= zero_floor) {
    v.saturated = true;
    v.slope = ValuationEstimate::infinity;
    v.intercept = 0.0;
    v.r_squared = 1.0;
    return v;
  }
  double sx = 0, sy = 0;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = v.window_lo; k <= v.window_hi; ++k) {
    if (values[k] <= zero_floor) continue;
    pts.emplace_back(std::log(ladder[k]), std::log(values[k]));
    sx += pts.back().first;
    sy += pts.back().second;
  }
  require(pts.size() >= 3, ErrorCode::InsufficientLadder,
          "fewer than 3 usable points in the slope window");
  const double n = double(pts.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  v.points = pts.size();
  v.slope = sxy / sxx;
  v.intercept = my - v.slope * mx;
  double ssr = 0;
  for (const auto& [x, y] : pts) {
    const double r = y - (v.intercept + v.slope * x);
    ssr += r * r;
  }
  v.r_squared = syy > 0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
  return v;
}

ValuationEstimate estimate_valuation(const SeminormProfile& profile, std::size_t n,
                                     Window window) {
  require(n < profile.levels(), ErrorCode::InvalidArgument, "profile row does not exist");
  return fit_valuation(profile.ladder, profile.values[n], window);
}

double ultra_pseudo_seminorm(const ValuationEstimate& v) {
  return v.saturated ? 0.0 : std::exp(-v.slope);
}

namespace {

double sup_in(const GridFunction& g, const Box& K) {
  const Box dom = g.domain();
  Box b = K.intersect(dom);
  if (b.empty()) return 0.0;
  const auto [j0, j1] = g.x_range(b.x);
  const auto [i0, i1] = g.dim() == 2 ? g.t_range(b.t) : std::pair<Index, Index>{0, 0};
  if (j0 > j1 || i0 > i1) return 0.0;
  return g.values().block(i0, j0, i1 - i0 + 1, j1 - j0 + 1).abs().maxCoeff();
}

double sup_in(const GridFunction& g, const BoxUnion& K) {
  double m = 0.0;
  for (const Box& b : K) m = std::max(m, sup_in(g, b));
  return m;
}

Net mixed_derivative(const Net& u, MixedOrder o) {
  Net d = u;
  if (o.t > 0) d = diff(d, Direction::t, o.t);
  if (o.x > 0) d = diff(d, Direction::x, o.x);
  return d;
}

SeminormProfile standard_profile(const Net& u, const RegionLadder& ladder) {
  SeminormProfile p;
  p.flavor = Flavor::standard;
  p.ladder = u.ladder();
  const bool two_d = u.logical_domain().dim == 2;
  std::map<std::pair<int, int>, Net> cache;
  auto derivative = [&](int a, int b) -> const Net& {
    auto it = cache.find({a, b});
    if (it == cache.end()) it = cache.emplace(std::pair{a, b}, mixed_derivative(u, {a, b})).first;
    return it->second;
  };
  std::vector<double> running(u.size(), 0.0);
  for (std::size_t n = 0; n < ladder.size(); ++n) {
    const int order = ladder.max_order(n);
    std::vector<double> row(u.size(), 0.0);
    for (int a = 0; a <= (two_d ? std::min(order, max_stencil_order) : 0); ++a)
      for (int b = 0; b <= std::min(order - a, max_stencil_order); ++b) {
        const Net& d = derivative(a, b);
        for (std::size_t k = 0; k < u.size(); ++k)
          row[k] = std::max(row[k], sup_in(d[k], ladder.regions[n]));
      }
    p.values.push_back(row);
  }
  return p;
}

SeminormProfile directional_profile_of(const Net& u, const RegionLadder& ladder, int stride) {
  SeminormProfile p;
  p.flavor = Flavor::directional;
  p.ladder = u.ladder();
  p.values.assign(ladder.size(), std::vector<double>(u.size(), 0.0));
  for (std::size_t k = 0; k < u.size(); ++k) {
    const GridFunction& g = u[k];
    require(g.is_diagonal_lattice() && std::abs(g.t0()) < 1e-12, ErrorCode::LatticeMismatch,
            "directional seminorms need a diagonal lattice starting at t = 0");
    DiagonalLattice L;
    L.h = g.hx();
    L.T = g.t(g.nt() - 1);
    L.x_lo = g.x0();
    L.nt = g.nt();
    L.nx = g.nx();
    DirectionalAccumulator acc(L, ladder, stride);
    for (Index i = 0; i < g.nt(); ++i) acc.push_row(g.values().row(i).data());
    const auto v = acc.values();
    for (std::size_t n = 0; n < v.size(); ++n) p.values[n][k] = v[n];
  }
  return p;
}

}  // namespace

SeminormProfile seminorm_profile(const Net& u, const RegionLadder& ladder, int stride) {
  ladder.validate();
  if (ladder.flavor == Flavor::standard) return standard_profile(u, ladder);
  return directional_profile_of(u, ladder, stride);
}

UltraMetricReport distance_from_profile(const SeminormProfile& profile, std::size_t n_max,
                                        Window window) {
  require(profile.levels() >= n_max + 1, ErrorCode::InvalidArgument,
          "profile has fewer levels than the truncation");
  UltraMetricReport r;
  r.flavor = profile.flavor;
  r.truncation = n_max;
  for (std::size_t n = 0; n <= n_max; ++n) {
    r.valuations.push_back(estimate_valuation(profile, n, window));
    const double p = ultra_pseudo_seminorm(r.valuations.back());
    r.p_values.push_back(p);
    const double term = profile.flavor == Flavor::standard ? std::min(p, 1.0) : p;
    r.distance += std::ldexp(term, -static_cast<int>(n) - 1);
  }
  return r;
}

UltraMetricReport sharp_distance(const Net& u, const Net& v, const RegionLadder& ladder,
                                 std::size_t n_max, int stride) {
  require(u.ladder() == v.ladder(), ErrorCode::LadderMismatch, "nets use different ladders");
  return distance_from_profile(seminorm_profile(u - v, ladder, stride), n_max);
}

double SlopeVerdict::worst_slope() const {
  double w = ValuationEstimate::infinity;
  for (const auto& s : slopes) w = std::min(w, s.slope);
  return w;
}

SlopeVerdict bounded_type(const Net& u, const Box& K, const std::vector<MixedOrder>& orders,
                          double tol) {
  require(u.logical_domain().contains(K), ErrorCode::OutOfDomain,
          "region lies outside the logical domain");
  SlopeVerdict v;
  for (const MixedOrder& o : orders) {
    const Net d = mixed_derivative(u, o);
    std::vector<double> sups;
    for (std::size_t k = 0; k < d.size(); ++k) sups.push_back(sup_in(d[k], K));
    v.slopes.push_back(fit_valuation(u.ladder(), sups));
    v.labels.push_back("dt^" + std::to_string(o.t) + " dx^" + std::to_string(o.x));
    if (v.slopes.back().slope < -tol) v.passed = false;
  }
  return v;
}

SlopeVerdict bounded_type(const Net& u, const Box& K, const std::vector<int>& x_orders,
                          double tol) {
  std::vector<MixedOrder> orders;
  for (int o : x_orders) orders.push_back({0, o});
  return bounded_type(u, K, orders, tol);
}

SlopeVerdict bounded_type(const EpsilonLadder& ladder, const std::vector<double>& sups,
                          double tol) {
  SlopeVerdict v;
  v.slopes.push_back(fit_valuation(ladder, sups));
  v.labels.push_back("sup");
  v.passed = v.slopes.back().slope >= -tol;
  return v;
}

SlopeVerdict is_negligible(const Net& u, const RegionLadder& regions, double a_max, double tol) {
  require(a_max >= 2, ErrorCode::InvalidArgument, "a_max must be at least 2");
  const SeminormProfile p = seminorm_profile(u, regions);
  SlopeVerdict v;
  for (std::size_t n = 0; n < p.levels(); ++n) {
    v.slopes.push_back(estimate_valuation(p, n));
    v.labels.push_back("mu_" + std::to_string(n));
    if (v.slopes.back().slope < a_max - tol) v.passed = false;
  }
  return v;
}

void write_profile_csv(const std::filesystem::path& file, const SeminormProfile& p) {
  std::ofstream out(file);
  require(bool(out), ErrorCode::IoError, "cannot write " + file.string());
  out << "n,epsilon,value\n";
  for (std::size_t n = 0; n < p.levels(); ++n)
    for (std::size_t k = 0; k < p.ladder.size(); ++k)
      out << n << "," << format_double(p.ladder[k]) << "," << format_double(p.values[n][k])
          << "\n";
}

void write_valuation_csv(const std::filesystem::path& file,
                         const std::vector<ValuationEstimate>& rows) {
  std::ofstream out(file);
  require(bool(out), ErrorCode::IoError, "cannot write " + file.string());
  out << "n,slope,r2,window_lo,window_hi\n";
  for (std::size_t n = 0; n < rows.size(); ++n) {
    const auto& v = rows[n];
    out << n << "," << (v.saturated ? std::string("inf") : format_double(v.slope)) << ","
        << format_double(v.r_squared) << "," << v.window_lo << "," << v.window_hi << "\n";
  }
}

std::string report_json(const UltraMetricReport& r) {
  nlohmann::json j;
  j["flavor"] = r.flavor == Flavor::standard ? "standard" : "directional";
  j["p_values"] = r.p_values;
  j["distance"] = r.distance;
  j["truncation"] = r.truncation;
  j["tail_bound"] = r.tail_bound();
  nlohmann::json slopes = nlohmann::json::array();
  for (const auto& v : r.valuations) {
    if (v.saturated)
      slopes.push_back("inf");
    else
      slopes.push_back(v.slope);
  }
  j["slopes"] = slopes;
  return j.dump(2);
}

}  // namespace cgw
