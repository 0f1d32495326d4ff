#include "cgwave/sing_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>

#include "cgwave/parallel.hpp"

namespace cgw {

namespace {

constexpr double geom_tol = 1e-12;

double cross(const Point& o, const Point& a, const Point& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

double point_segment(const Point& p, const Point& a, const Point& b) {
  const double dx = b[0] - a[0], dy = b[1] - a[1];
  const double len2 = dx * dx + dy * dy;
  double s = len2 > 0 ? ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return std::hypot(p[0] - a[0] - s * dx, p[1] - a[1] - s * dy);
}

bool segments_cross(const Point& a, const Point& b, const Point& c, const Point& d) {
  const double d1 = cross(c, d, a), d2 = cross(c, d, b);
  const double d3 = cross(a, b, c), d4 = cross(a, b, d);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

bool inside(const Point& p, const Polygon& poly) {
  if (poly.size() < 3) return false;
  bool pos = false, neg = false;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const double c = cross(poly[k], poly[(k + 1) % poly.size()], p);
    if (c > geom_tol) pos = true;
    if (c < -geom_tol) neg = true;
  }
  return !(pos && neg);
}

std::vector<std::pair<Point, Point>> edges(const Polygon& poly) {
  std::vector<std::pair<Point, Point>> e;
  if (poly.size() == 2) {
    e.emplace_back(poly[0], poly[1]);
    return e;
  }
  for (std::size_t k = 0; k < poly.size(); ++k) e.emplace_back(poly[k], poly[(k + 1) % poly.size()]);
  return e;
}

Polygon box_polygon(const Box& b) {
  return {{b.t.lo, b.x.lo}, {b.t.hi, b.x.lo}, {b.t.hi, b.x.hi}, {b.t.lo, b.x.hi}};
}

}  // namespace

double polygon_distance(const Polygon& a, const Polygon& b) {
  require(a.size() >= 2 && b.size() >= 2, ErrorCode::InvalidArgument,
          "polygons need at least two vertices");
  for (const Point& p : a)
    if (inside(p, b)) return 0.0;
  for (const Point& p : b)
    if (inside(p, a)) return 0.0;
  const auto ea = edges(a), eb = edges(b);
  for (const auto& [p, q] : ea)
    for (const auto& [r, s] : eb)
      if (segments_cross(p, q, r, s)) return 0.0;
  double d = std::numeric_limits<double>::infinity();
  for (const Point& p : a)
    for (const auto& [r, s] : eb) d = std::min(d, point_segment(p, r, s));
  for (const Point& p : b)
    for (const auto& [r, s] : ea) d = std::min(d, point_segment(p, r, s));
  return d;
}

Polygon LightConeGeometry::plus() const {
  if (!is_band()) return {{0.0, 0.0}, {T, T}};
  return {{0.0, -b}, {T, T - b}, {T, T + b}, {0.0, b}};
}

Polygon LightConeGeometry::minus() const {
  if (!is_band()) return {{0.0, 0.0}, {T, -T}};
  return {{0.0, -b}, {0.0, b}, {T, -T + b}, {T, -T - b}};
}

double LightConeGeometry::distance_plus(const Box& cell) const {
  return polygon_distance(box_polygon(cell), plus());
}

double LightConeGeometry::distance_minus(const Box& cell) const {
  return polygon_distance(box_polygon(cell), minus());
}

double LightConeGeometry::distance(const Box& cell) const {
  return std::min(distance_plus(cell), distance_minus(cell));
}

std::string Combo::label() const {
  return "D+^" + std::to_string(i) + " D-^" + std::to_string(j);
}

std::vector<Combo> combos(int max_order) {
  require(max_order >= 0 && max_order <= max_stencil_order, ErrorCode::InvalidArgument,
          "max_order must lie in 0..6");
  std::vector<Combo> out;
  for (int m = 0; m <= max_order; ++m)
    for (int i = m; i >= 0; --i) out.push_back({i, m - i});
  return out;
}

void ClassificationSpec::validate() const {
  require(T > 0 && X > 0 && cell_h > 0, ErrorCode::ConfigError,
          "classification needs positive T, X and cell size");
  require(max_order >= 0 && max_order <= max_stencil_order, ErrorCode::ConfigError,
          "max_order must lie in 0..6");
  require(tol >= 0, ErrorCode::ConfigError, "slope tolerance must be non-negative");
  require(diff_step > 0, ErrorCode::ConfigError, "difference step must be positive");
  require(zero_rel >= 0 && zero_rel < 1, ErrorCode::ConfigError, "zero_rel must lie in [0, 1)");
  require(T > 2 * cell_h && X > cell_h, ErrorCode::ConfigError, "cells do not fit the domain");
  DiagonalLattice::exact_steps(T - 2 * cell_h, cell_h, "cell rows");
  DiagonalLattice::exact_steps(2 * X - 2 * cell_h, cell_h, "cell columns");
}

Index ClassificationSpec::rows() const {
  return DiagonalLattice::exact_steps(T - 2 * cell_h, cell_h, "cell rows");
}

Index ClassificationSpec::cols() const {
  return DiagonalLattice::exact_steps(2 * X - 2 * cell_h, cell_h, "cell columns");
}

Box ClassificationSpec::cell(Index r, Index c) const {
  const double t0 = cell_h * double(r + 1);
  const double x0 = -X + cell_h * double(c + 1);
  return Box::rect(t0, t0 + cell_h, x0, x0 + cell_h);
}

std::size_t SingularityMap::singular_count() const {
  return std::size_t(std::count_if(cells.begin(), cells.end(),
                                   [](const CellVerdict& c) { return c.singular; }));
}

bool SingularityMap::singular_at_order(std::size_t cell, int order) const {
  const CellVerdict& v = cells.at(cell);
  if (v.fit_failed) return true;
  order = std::clamp(order, 0, int(v.worst_by_order.size()) - 1);
  return v.worst_by_order[std::size_t(order)] < -spec.tol;
}

ClassifyObserver::ClassifyObserver(const DiagonalLattice& lattice, const ClassificationSpec& spec,
                                   int stride)
    : lat_(lattice), spec_(spec), combos_(combos(spec.max_order)) {
  spec_.validate();
  require(stride >= 1, ErrorCode::InvalidArgument, "stride must be positive");
  require(lat_.x_lo <= -spec_.X + 1e-12 && lat_.x_hi() >= spec_.X - 1e-12 &&
              lat_.T >= spec_.T - 1e-12,
          ErrorCode::LatticeMismatch, "lattice does not cover the classification domain");

  const double sq2 = std::sqrt(2.0);
  const double step = sq2 * double(stride) * lat_.h;
  for (const Combo& cb : combos_) {
    Plan plan;
    int p = 0, m = 0;
    double scale = 1.0;
    if (cb.i == 0 && cb.j == 0) {
      plan.field = 0;
    } else if (cb.j == 0) {
      plan.field = 2;
      p = cb.i - 1;
      scale = 1.0 / sq2;
    } else {
      plan.field = 1;
      p = cb.i;
      m = cb.j - 1;
      scale = 1.0 / sq2;
    }
    scale /= std::pow(step, p + m);
    const Stencil& sp = central_stencil(p);
    const Stencil& sm = central_stencil(m);
    for (int a = -sp.radius; a <= sp.radius; ++a)
      for (int b = -sm.radius; b <= sm.radius; ++b) {
        const double w = sp.at(a) * sm.at(b) * scale;
        if (w == 0.0) continue;
        plan.terms.push_back({Index(a + b) * stride, Index(a - b) * stride, w});
        plan.weight_sum += std::abs(w);
      }
    reach_ = std::max<Index>(reach_, Index(sp.radius + sm.radius) * stride);
    plans_.push_back(std::move(plan));
  }
  require(double(reach_) * lat_.h <= spec_.cell_h + 1e-12, ErrorCode::GridTooCoarse,
          "difference stencil reaches beyond the cell margin");
  capacity_ = 2 * reach_ + 1;
  const std::size_t n = std::size_t(capacity_ * lat_.nx);
  V_.assign(n, 0.0);
  W_.assign(n, 0.0);
  U_.assign(n, 0.0);
  lo_.assign(std::size_t(capacity_), 0);
  hi_.assign(std::size_t(capacity_), -1);
  cell_row0_ = DiagonalLattice::exact_steps(spec_.cell_h, lat_.h, "cell size");

  for (Index c = 0; c < spec_.cols(); ++c) {
    const Box b = spec_.cell(0, c);
    const Index j0 = Index(std::ceil((b.x.lo - lat_.x_lo) / lat_.h - 1e-9));
    const Index j1 = Index(std::floor((b.x.hi - lat_.x_lo) / lat_.h + 1e-9));
    col_nodes_.emplace_back(j0, j1);
  }
  sups_.assign(combos_.size(), std::vector<double>(std::size_t(spec_.rows() * spec_.cols()), 0.0));
  val_.assign(std::size_t(lat_.nx), 0.0);
}

void ClassifyObserver::on_slice(const SliceView& s) {
  require(s.i == rows_seen_, ErrorCode::InvalidArgument, "rows must arrive in t order");
  const std::size_t slot = std::size_t(s.i % capacity_);
  const std::size_t off = slot * std::size_t(lat_.nx);
  // the ring slot held an older row whose active range is contained in this one
  if (s.lo <= s.hi) {
    const std::size_t bytes = std::size_t(s.hi - s.lo + 1) * sizeof(double);
    std::memcpy(V_.data() + off + std::size_t(s.lo), s.V + s.lo, bytes);
    std::memcpy(W_.data() + off + std::size_t(s.lo), s.W + s.lo, bytes);
    std::memcpy(U_.data() + off + std::size_t(s.lo), s.U + s.lo, bytes);
    const double* rows[3] = {s.U, s.V, s.W};
    for (int f = 0; f < 3; ++f)
      for (Index j = s.lo; j <= s.hi; ++j)
        field_max_[f] = std::max(field_max_[f], std::abs(rows[f][j]));
  }
  lo_[slot] = s.lo;
  hi_[slot] = s.hi;
  ++rows_seen_;
  const Index c = s.i - reach_;
  if (c >= 0) process(c);
}

void ClassifyObserver::process(Index c) {
  const Index last_row = cell_row0_ * (spec_.rows() + 1);
  if (c < cell_row0_ || c > last_row) return;
  std::vector<Index> cell_rows;
  for (Index r = 0; r < spec_.rows(); ++r) {
    const Index r0 = cell_row0_ * (r + 1), r1 = r0 + cell_row0_;
    if (c >= r0 && c <= r1) cell_rows.push_back(r);
  }
  const Index newest = (c + reach_) % capacity_;
  const Index lo_all = lo_[std::size_t(newest)], hi_all = hi_[std::size_t(newest)];
  if (lo_all > hi_all) return;
  const Index j_lo = std::max({lo_all - reach_, col_nodes_.front().first, reach_});
  const Index j_hi = std::min({hi_all + reach_, col_nodes_.back().second, lat_.nx - 1 - reach_});
  if (j_lo > j_hi) return;

  const Index cols = spec_.cols();
  for (std::size_t q = 0; q < plans_.size(); ++q) {
    const Plan& plan = plans_[q];
    const std::vector<double>& buf = plan.field == 0 ? U_ : plan.field == 1 ? V_ : W_;
    double* out = val_.data();
    std::fill(out + j_lo, out + j_hi + 1, 0.0);
    for (const Term& term : plan.terms) {
      const double* src = ring(buf, c + term.drow) + term.dcol;
      const double w = term.w;
      for (Index j = j_lo; j <= j_hi; ++j) out[j] += w * src[j];
    }
    for (Index cc = 0; cc < cols; ++cc) {
      const Index a = std::max(col_nodes_[std::size_t(cc)].first, j_lo);
      const Index b = std::min(col_nodes_[std::size_t(cc)].second, j_hi);
      if (a > b) continue;
      double m = 0.0;
      for (Index j = a; j <= b; ++j) m = std::max(m, std::abs(out[j]));
      for (Index r : cell_rows) {
        double& dst = sups_[q][std::size_t(r * cols + cc)];
        dst = std::max(dst, m);
      }
    }
  }
}

double ClassifyObserver::noise_floor(std::size_t combo) const {
  const Plan& p = plans_.at(combo);
  return spec_.zero_rel * field_max_[p.field] * p.weight_sum;
}

std::vector<std::vector<double>> ClassifyObserver::sups() const {
  auto out = sups_;
  for (std::size_t q = 0; q < out.size(); ++q) {
    const double floor = noise_floor(q);
    for (double& v : out[q])
      if (v <= floor) v = 0.0;
  }
  return out;
}

SingularityMap assemble_map(const EpsilonLadder& ladder,
                            const std::vector<std::vector<std::vector<double>>>& sups_per_eps,
                            const ClassificationSpec& spec, const LightConeGeometry& geom) {
  spec.validate();
  require(sups_per_eps.size() == ladder.size(), ErrorCode::LadderMismatch,
          "one sup table per ladder entry is required");
  const auto cbs = combos(spec.max_order);
  const std::size_t ncell = std::size_t(spec.rows() * spec.cols());
  for (const auto& t : sups_per_eps)
    require(t.size() == cbs.size() && std::all_of(t.begin(), t.end(),
                                                  [&](const auto& v) { return v.size() == ncell; }),
            ErrorCode::InvalidArgument, "sup table shape differs from the classification");

  SingularityMap map;
  map.spec = spec;
  map.geometry = geom;
  map.cells.resize(ncell);
  std::vector<double> series(ladder.size());
  for (Index r = 0; r < spec.rows(); ++r)
    for (Index c = 0; c < spec.cols(); ++c) {
      CellVerdict& v = map.cells[std::size_t(r * spec.cols() + c)];
      v.cell = spec.cell(r, c);
      v.distance = geom.distance(v.cell);
      v.worst_by_order.assign(std::size_t(spec.max_order + 1), ValuationEstimate::infinity);
      for (std::size_t q = 0; q < cbs.size(); ++q) {
        for (std::size_t k = 0; k < ladder.size(); ++k)
          series[k] = sups_per_eps[k][q][std::size_t(r * spec.cols() + c)];
        double slope;
        try {
          slope = fit_valuation(ladder, series).slope;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::InsufficientLadder) throw;
          v.fit_failed = true;
          slope = -ValuationEstimate::infinity;
        }
        for (int m = cbs[q].order(); m <= spec.max_order; ++m)
          v.worst_by_order[std::size_t(m)] = std::min(v.worst_by_order[std::size_t(m)], slope);
        if (slope < v.worst_slope) {
          v.worst_slope = slope;
          v.witness = cbs[q].label();
          v.witness_order = cbs[q].order();
        }
      }
      v.singular = v.fit_failed || v.worst_slope < -spec.tol;
    }
  return map;
}

namespace {

DiagonalLattice lattice_of(const GridFunction& g) {
  require(g.dim() == 2 && g.is_diagonal_lattice() && std::abs(g.t0()) < 1e-12,
          ErrorCode::LatticeMismatch, "classification needs a diagonal lattice starting at t = 0");
  DiagonalLattice L;
  L.h = g.hx();
  L.T = g.t(g.nt() - 1);
  L.x_lo = g.x0();
  L.nt = g.nt();
  L.nx = g.nx();
  return L;
}

SingularityMap classify_materialized(const Net& U, const CharacteristicPair& pair,
                                     const LightConeGeometry& geom,
                                     const ClassificationSpec& spec) {
  require(U.size() == pair.V.size() && U.size() == pair.W.size(), ErrorCode::LadderMismatch,
          "U and the pair use different ladders");
  std::vector<std::vector<std::vector<double>>> sups;
  for (std::size_t k = 0; k < U.size(); ++k) {
    const GridFunction& gu = U[k];
    const GridFunction& gv = pair.V[k];
    const GridFunction& gw = pair.W[k];
    require(gu.same_geometry(gv) && gu.same_geometry(gw), ErrorCode::LatticeMismatch,
            "U, V and W must share one lattice");
    const DiagonalLattice L = lattice_of(gu);
    ClassifyObserver obs(L, spec, spec.stride(U.epsilon(k), L.h));
    SliceView s;
    s.lo = 0;
    s.hi = L.nx - 1;
    for (Index i = 0; i < L.nt; ++i) {
      s.i = i;
      s.V = gv.values().row(i).data();
      s.W = gw.values().row(i).data();
      s.U = gu.values().row(i).data();
      obs.on_slice(s);
    }
    sups.push_back(obs.sups());
  }
  return assemble_map(U.ladder(), sups, spec, geom);
}

}  // namespace

SingularityMap classify_cells(const Net& U, const CharacteristicPair& pair,
                              const LightConeGeometry& geom, const ClassificationSpec& spec) {
  return classify_materialized(U, pair, geom, spec);
}

SingularityMap band_classify(const Net& U, const CharacteristicPair& pair,
                             const LightConeGeometry& geom, const ClassificationSpec& spec) {
  require(geom.is_band(), ErrorCode::InvalidArgument, "band classification needs b > 0");
  return classify_materialized(U, pair, geom, spec);
}

SoundnessReport check_soundness(const SingularityMap& map, double dilation) {
  SoundnessReport r;
  for (const CellVerdict& v : map.cells) {
    const bool touching = v.distance <= geom_tol;
    // inside a band the data may be flat, so only the line geometry demands detection
    if (touching && !v.singular && !map.geometry.is_band()) ++r.missed;
    if (v.distance >= dilation - geom_tol && v.singular) ++r.false_alarms;
    if (v.singular && v.distance > dilation + geom_tol) ++r.outside_dilation;
    if (v.singular && map.geometry.distance_plus(v.cell) <= geom_tol) ++r.singular_on_plus;
    if (v.singular && map.geometry.distance_minus(v.cell) <= geom_tol) ++r.singular_on_minus;
  }
  return r;
}

SeminormProfile directional_profile(const Net& field, const RegionLadder& regions, int stride) {
  require(regions.flavor == Flavor::directional, ErrorCode::BadRegionLadder,
          "directional profile needs a directional region ladder");
  return seminorm_profile(field, regions, stride);
}

PairProfiles directional_profile(const CharacteristicPair& pair, const RegionLadder& regions,
                                 int stride) {
  return {directional_profile(pair.V, regions, stride), directional_profile(pair.W, regions, stride)};
}

PropertyObserver::PropertyObserver(const DiagonalLattice& lattice, const RegionLadder& regions,
                                   int stride)
    : V(lattice, regions, stride, true), W(lattice, regions, stride, true) {}

void PropertyObserver::on_slice(const SliceView& s) {
  V.push_row(s.V);
  W.push_row(s.W);
}

bool PropertyAudit::passed() const {
  return bounded.passed && plus.passed && minus.passed &&
         std::all_of(exterior.begin(), exterior.end(), [&](double e) { return e <= exterior_tol; });
}

PropertyAudit audit_properties(const EpsilonLadder& ladder,
                               const std::vector<const PropertyObserver*>& per_eps,
                               const std::vector<double>& exterior_sups, double tol,
                               double exterior_tol) {
  require(per_eps.size() == ladder.size() && exterior_sups.size() == ladder.size(),
          ErrorCode::LadderMismatch, "one audit per ladder entry is required");
  PropertyAudit a;
  a.exterior = exterior_sups;
  a.exterior_tol = exterior_tol;
  const std::size_t levels = per_eps.front()->V.plain().size();
  auto add = [&](SlopeVerdict& verdict, const std::string& label, const std::vector<double>& s) {
    const ValuationEstimate e = fit_valuation(ladder, s);
    verdict.labels.push_back(label);
    verdict.slopes.push_back(e);
    if (e.slope < -tol) verdict.passed = false;
  };
  for (int field = 0; field < 2; ++field) {
    const char* name = field == 0 ? "V" : "W";
    auto acc = [&](std::size_t k) -> const DirectionalAccumulator& {
      return field == 0 ? per_eps[k]->V : per_eps[k]->W;
    };
    for (std::size_t n = 0; n < levels; ++n) {
      std::vector<double> s(ladder.size());
      for (std::size_t k = 0; k < ladder.size(); ++k) s[k] = acc(k).plain()[n];
      add(a.bounded, std::string(name) + " K_" + std::to_string(n), s);
      const std::size_t alphas = acc(0).plus_sups()[n].size();
      for (std::size_t al = 1; al <= std::min(n, alphas); ++al) {
        for (std::size_t k = 0; k < ladder.size(); ++k) s[k] = acc(k).plus_sups()[n][al - 1];
        add(a.plus, std::string("D+^") + std::to_string(al) + " " + name + " K+_" +
                        std::to_string(n), s);
        for (std::size_t k = 0; k < ladder.size(); ++k) s[k] = acc(k).minus_sups()[n][al - 1];
        add(a.minus, std::string("D-^") + std::to_string(al) + " " + name + " K-_" +
                         std::to_string(n), s);
      }
    }
  }
  return a;
}

SingsuppRun singsupp_streaming(const SolveConfig& cfg, const SolveInput& in,
                               const ClassificationSpec& spec, const LightConeGeometry& geom) {
  cfg.validate();
  spec.validate();
  const RegionLadder regions = trace_regions(cfg);
  const std::size_t N = in.ladder.size();
  struct Task {
    std::unique_ptr<ClassifyObserver> cls;
    std::unique_ptr<AuditObserver> ext;
    std::unique_ptr<PropertyObserver> prop;
    EpsilonRun run;
  };
  std::vector<Task> tasks(N);
  parallel_for(N, [&](std::size_t k) {
    const DiagonalLattice& L = in.lattices[k];
    const double eps = in.ladder[k];
    Task& task = tasks[k];
    task.run = solve_epsilon(cfg, k, in, [&](std::size_t, std::size_t) {
      task.cls = std::make_unique<ClassifyObserver>(L, spec, spec.stride(eps, L.h));
      task.ext = std::make_unique<AuditObserver>(L, cfg.a, eps);
      task.prop = std::make_unique<PropertyObserver>(L, regions, stride_for(cfg.trace_step, L.h));
      return std::vector<SweepObserver*>{task.cls.get(), task.ext.get(), task.prop.get()};
    });
  });

  SingsuppRun out;
  std::vector<std::vector<std::vector<double>>> sups;
  std::vector<const PropertyObserver*> props;
  for (Task& t : tasks) {
    out.runs.push_back(t.run);
    sups.push_back(t.cls->sups());
    out.membership.push_back(t.ext->membership);
    out.exterior.push_back(std::max(t.ext->exterior_V, t.ext->exterior_W));
    props.push_back(t.prop.get());
  }
  out.map = assemble_map(in.ladder, sups, spec, geom);
  out.audit = audit_properties(in.ladder, props, out.exterior, spec.tol);
  return out;
}

}  // namespace cgw
