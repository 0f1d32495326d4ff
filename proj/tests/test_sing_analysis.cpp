#include "doctest.h"

#include <cmath>
#include <random>

#include "cgwave/sing_analysis.hpp"

using namespace cgw;

namespace {

const Mollifier& moll() {
  static const Mollifier m = make_mollifier();
  return m;
}

SolveConfig small_config(NonlinearityId f, double T = 0.5, int finest = 8) {
  SolveConfig cfg;
  cfg.T = T;
  cfg.a = 1.0;
  cfg.margin = 0.5;
  cfg.f = f;
  cfg.ladder = EpsilonLadder::dyadic(5, finest);
  cfg.h_rule = SpacingRule::proportional(4);
  return cfg;
}

ClassificationSpec small_cells(double T = 0.5) {
  ClassificationSpec cs;
  cs.T = T;
  cs.X = 1.0 + T + 0.25;
  return cs;
}

DataSpec small_data(DataKind kind = DataKind::kink) {
  DataSpec s;
  s.kind = kind;
  if (kind == DataKind::band_kink) s.b = 0.25;
  return s;
}

bool touching(const CellVerdict& v) { return v.distance <= 1e-12; }

// node-level sup of a planar wave derivative, straight from the closed form
double wave_sup(const DiagonalLattice& L, const Box& cell, double amp, double p, double q,
                int order) {
  double m = 0;
  for (Index i = 0; i < L.nt; ++i)
    for (Index j = 0; j < L.nx; ++j) {
      const double t = L.t(i), x = L.x(j);
      if (!cell.t.contains(t, 1e-12) || !cell.x.contains(x, 1e-12)) continue;
      m = std::max(m, std::abs(amp * std::sin(p * t + q * x + order * M_PI / 2)));
    }
  return m;
}

}  // namespace

TEST_CASE("polygon distances") {
  const Polygon square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK(polygon_distance(square, {{2, 0}, {3, 0}}) == doctest::Approx(1.0));
  CHECK(polygon_distance(square, {{0.5, 0.5}, {4, 4}}) == 0.0);
  CHECK(polygon_distance(square, {{-1, 0.5}, {2, 0.5}}) == 0.0);  // passes through
  CHECK(polygon_distance(square, {{2, 2}, {3, 3}}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(polygon_distance(square, {{1, 1}, {2, 3}}) == 0.0);  // corner contact
  CHECK_THROWS_AS(polygon_distance(square, {{1, 1}}), Error);
}

TEST_CASE("light cone geometry") {
  const auto lines = LightConeGeometry::lines(1.0);
  // point (t, x) = (0.5625, 0.625) is the nearest corner; |x - t| / √2
  const Box cell = Box::rect(0.5, 0.5625, 0.625, 0.6875);
  CHECK(lines.distance_plus(cell) == doctest::Approx(0.0625 / std::sqrt(2.0)));
  CHECK(lines.distance(Box::rect(0.25, 0.3125, 0.25, 0.3125)) == 0.0);
  CHECK(lines.distance(Box::rect(0.25, 0.3125, -0.3125, -0.25)) == 0.0);
  // segment ends at T
  CHECK(lines.distance_plus(Box::rect(1.5, 1.6, 1.5, 1.6)) == doctest::Approx(std::sqrt(0.5)));

  const auto band = LightConeGeometry::bands(1.0, 0.25);
  CHECK(band.is_band());
  CHECK(band.distance_plus(Box::rect(0.5, 0.5625, 0.6875, 0.75)) == 0.0);
  CHECK(band.distance_plus(Box::rect(0.5, 0.5625, 0.875, 0.9375)) ==
        doctest::Approx((0.875 - 0.5625 - 0.25) / std::sqrt(2.0)));

  SUBCASE("thin bands degenerate to the lines") {
    const auto thin = LightConeGeometry::bands(1.0, 1e-13);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.5, 1.5), ut(0.0, 1.0);
    for (int n = 0; n < 200; ++n) {
      const double t = ut(rng), x = u(rng);
      const Box b = Box::rect(t, t + 0.0625, x, x + 0.0625);
      CHECK(thin.distance(b) == doctest::Approx(lines.distance(b)).epsilon(1e-9));
    }
  }
}

TEST_CASE("combination list and cell grid") {
  const auto c = combos(4);
  REQUIRE(c.size() == 15);
  CHECK(c.front().order() == 0);
  for (std::size_t k = 1; k < c.size(); ++k) CHECK(c[k].order() >= c[k - 1].order());
  CHECK(c[1].label() == "D+^1 D-^0");
  CHECK_THROWS_AS(combos(7), Error);

  ClassificationSpec cs;
  CHECK(cs.rows() == 14);
  CHECK(cs.cols() == 62);
  CHECK(cs.cell(0, 0) == Box::rect(0.0625, 0.125, -1.9375, -1.875));
  cs.cell_h = 0.3;
  CHECK_THROWS_AS(cs.validate(), Error);
  cs = ClassificationSpec{};
  cs.max_order = 9;
  CHECK_THROWS_AS(cs.validate(), Error);
}

TEST_CASE("observer stencils reproduce planar wave derivatives") {
  // V = sin(p t + q x): D+ multiplies by (p + q)/√2, D- by (p - q)/√2 (up to phase)
  const double p = 1.3, q = -0.7, pw = 0.4, qw = 2.1;
  const auto L = DiagonalLattice::make(1.0 / 512, 0.5, 2.0);
  ClassificationSpec cs = small_cells();
  ClassifyObserver obs(L, cs, 2);
  std::vector<double> V(std::size_t(L.nx)), W(V.size()), U(V.size());
  SliceView s;
  s.lo = 0;
  s.hi = L.nx - 1;
  s.V = V.data();
  s.W = W.data();
  s.U = U.data();
  for (Index i = 0; i < L.nt; ++i) {
    for (Index j = 0; j < L.nx; ++j) {
      V[std::size_t(j)] = std::sin(p * L.t(i) + q * L.x(j));
      W[std::size_t(j)] = std::sin(pw * L.t(i) + qw * L.x(j));
      U[std::size_t(j)] = std::cos(L.x(j));
    }
    s.i = i;
    obs.on_slice(s);
  }
  const auto sups = obs.sups();
  const auto cb = combos(cs.max_order);
  const std::size_t cell = std::size_t(2 * cs.cols() + 20);
  const Box box = cs.cell(2, 20);
  const double sq2 = std::sqrt(2.0);
  for (std::size_t k = 0; k < cb.size(); ++k) {
    double expect;
    if (cb[k].i == 0 && cb[k].j == 0) {
      expect = wave_sup(L, box, 1.0, 0.0, 1.0, 1);  // |cos x|
    } else if (cb[k].j == 0) {
      const int n = cb[k].i - 1;
      expect = wave_sup(L, box, std::pow(std::abs(pw + qw) / sq2, n) / sq2, pw, qw, n);
    } else {
      const int a = cb[k].i, b = cb[k].j - 1;
      const double amp =
          std::pow(std::abs(p + q) / sq2, a) * std::pow(std::abs(p - q) / sq2, b) / sq2;
      expect = wave_sup(L, box, amp, p, q, a + b);
    }
    CAPTURE(cb[k].label());
    CHECK(sups[k][cell] == doctest::Approx(expect).epsilon(2e-3));
  }
}

TEST_CASE("lattices that miss the cells are rejected") {
  const auto L = DiagonalLattice::make(1.0 / 64, 0.5, 1.0);
  CHECK_THROWS_AS(ClassifyObserver(L, small_cells(), 1), Error);
  const auto wide = DiagonalLattice::make(1.0 / 64, 0.5, 2.0);
  CHECK_THROWS_AS(ClassifyObserver(wide, small_cells(), 8), Error);  // stencil reach > cell_h
}

TEST_CASE("numerical zeros do not fake growth") {
  // V = 1 plus rounding-size noise: every differenced combination sits under the floor
  const EpsilonLadder ladder = EpsilonLadder::dyadic(4, 7);
  ClassificationSpec cs = small_cells();
  std::vector<std::vector<std::vector<double>>> sups;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  for (double eps : ladder.values()) {
    const auto L = DiagonalLattice::make(eps / 4, 0.5, 2.0);
    ClassifyObserver obs(L, cs, cs.stride(eps, L.h));
    std::vector<double> V(std::size_t(L.nx)), Z(V.size(), 0.0);
    SliceView s;
    s.lo = 0;
    s.hi = L.nx - 1;
    s.V = V.data();
    s.W = Z.data();
    s.U = Z.data();
    for (Index i = 0; i < L.nt; ++i) {
      for (double& v : V) v = 1.0 + 4e-16 * u(rng);
      s.i = i;
      obs.on_slice(s);
    }
    CHECK(obs.raw_sups()[2][40] > 0.0);  // D+^0 D-^1 is V/√2 itself
    CHECK(obs.raw_sups()[7][40] > 0.0);
    sups.push_back(obs.sups());
  }
  const auto map = assemble_map(ladder, sups, cs, LightConeGeometry::lines(0.5));
  CHECK(map.singular_count() == 0);
}

TEST_CASE("fits without enough usable points count as singular") {
  const EpsilonLadder ladder = EpsilonLadder::dyadic(4, 9);
  ClassificationSpec cs = small_cells();
  cs.max_order = 0;
  const std::size_t ncell = std::size_t(cs.rows() * cs.cols());
  std::vector<std::vector<std::vector<double>>> sups(ladder.size(),
                                                     {std::vector<double>(ncell, 1.0)});
  for (std::size_t k = 0; k + 1 < ladder.size(); ++k) sups[k][0][3] = 0.0;
  const auto map = assemble_map(ladder, sups, cs, LightConeGeometry::lines(0.5));
  CHECK(map.cells[3].fit_failed);
  CHECK(map.cells[3].singular);
  CHECK_FALSE(map.cells[4].singular);
  CHECK(map.cells[4].worst_slope == doctest::Approx(0.0).epsilon(1e-12));
  sups.pop_back();
  CHECK_THROWS_AS(assemble_map(ladder, sups, cs, LightConeGeometry::lines(0.5)), Error);
}

TEST_CASE("constant-zero solution is regular everywhere") {
  const SolveConfig cfg = small_config(NonlinearityId::square);
  DataSpec zero = small_data();
  zero.amplitude = 0.0;
  const SolveInput in = prepare_input(cfg, zero, moll());
  const PicardResult r = picard_solve(cfg, in, false);
  const auto map = classify_cells(r.U, r.pair, LightConeGeometry::lines(cfg.T), small_cells());
  CHECK(map.singular_count() == 0);
  for (const auto& v : map.cells) CHECK(v.worst_slope == ValuationEstimate::infinity);
}

TEST_CASE("free kink evolution: singular cells are exactly those meeting the lines") {
  const SolveConfig cfg = small_config(NonlinearityId::zero, 1.0, 9);
  const SolveInput in = prepare_input(cfg, small_data(), moll());
  const ClassificationSpec cs = small_cells(1.0);
  const auto run = singsupp_streaming(cfg, in, cs, LightConeGeometry::lines(cfg.T));
  const auto& map = run.map;
  CHECK(run.audit.passed());
  for (double m : run.membership) CHECK(m <= 1e-8);

  std::size_t touching_cells = 0;
  for (const auto& v : map.cells) {
    CAPTURE(v.cell.t.lo);
    CAPTURE(v.cell.x.lo);
    CHECK(v.singular == touching(v));
    if (touching(v)) {
      ++touching_cells;
      // D-^2 U of the mollified kink grows like 1/eps or faster on the line
      CHECK(v.worst_slope <= -0.9);
    } else {
      CHECK(v.worst_slope >= -0.1);
    }
  }
  CHECK(touching_cells > 0);
  const auto s = check_soundness(map, 2 * cs.cell_h);
  CHECK(s.sound());
  CHECK(s.confined());
  CHECK(s.singular_on_plus > 0);
  CHECK(s.singular_on_minus > 0);

  SUBCASE("monotone in the order") {
    for (std::size_t k = 0; k < map.cells.size(); ++k) {
      const auto& w = map.cells[k].worst_by_order;
      for (std::size_t m = 1; m < w.size(); ++m) CHECK(w[m] <= w[m - 1]);
      for (int m = 0; m < cs.max_order; ++m)
        if (map.singular_at_order(k, m)) CHECK(map.singular_at_order(k, m + 1));
      CHECK(map.singular_at_order(k, cs.max_order) == map.cells[k].singular);
    }
  }

}

TEST_CASE("streamed classification agrees with the materialized one") {
  const SolveConfig cfg = small_config(NonlinearityId::square);
  const SolveInput in = prepare_input(cfg, small_data(), moll());
  const ClassificationSpec cs = small_cells();
  const PicardResult r = picard_solve(cfg, in, false);
  const auto map = classify_cells(r.U, r.pair, LightConeGeometry::lines(cfg.T), cs);
  const auto run = singsupp_streaming(cfg, in, cs, LightConeGeometry::lines(cfg.T));
  REQUIRE(run.map.cells.size() == map.cells.size());
  for (std::size_t k = 0; k < map.cells.size(); ++k) {
    CHECK(run.map.cells[k].singular == map.cells[k].singular);
    CHECK(run.map.cells[k].witness == map.cells[k].witness);
    if (std::isfinite(map.cells[k].worst_slope))
      CHECK(run.map.cells[k].worst_slope ==
            doctest::Approx(map.cells[k].worst_slope).epsilon(1e-9));
  }
}

TEST_CASE("nonlinear run keeps the free classification") {
  const ClassificationSpec cs = small_cells(1.0);
  const SolveConfig lin = small_config(NonlinearityId::zero, 1.0, 9);
  const SolveInput in = prepare_input(lin, small_data(), moll());
  const auto free_run = singsupp_streaming(lin, in, cs, LightConeGeometry::lines(lin.T));
  for (auto f : {NonlinearityId::square, NonlinearityId::sine}) {
    SolveConfig cfg = lin;
    cfg.f = f;
    const auto run = singsupp_streaming(cfg, in, cs, LightConeGeometry::lines(cfg.T));
    for (std::size_t k = 0; k < run.map.cells.size(); ++k)
      CHECK(run.map.cells[k].singular == free_run.map.cells[k].singular);
    const auto s = check_soundness(run.map, 2 * cs.cell_h);
    CHECK(s.sound());
    CHECK(s.singular_on_plus > 0);
    CHECK(s.singular_on_minus > 0);
    CHECK(run.audit.passed());
    CHECK(run.audit.bounded.passed);
    CHECK(run.audit.plus.passed);
    CHECK(run.audit.minus.passed);
    for (double e : run.exterior) CHECK(e <= 1e-8);
  }
}

TEST_CASE("band data stays inside the bands") {
  const SolveConfig cfg = small_config(NonlinearityId::square, 1.0, 9);
  const SolveInput in = prepare_input(cfg, small_data(DataKind::band_kink), moll());
  const ClassificationSpec cs = small_cells(1.0);
  const auto geom = LightConeGeometry::bands(cfg.T, 0.25);
  const auto run = singsupp_streaming(cfg, in, cs, geom);
  const auto& map = run.map;
  CHECK(run.audit.passed());
  const auto s = check_soundness(map, 2 * cs.cell_h);
  CHECK(s.sound());
  CHECK(s.confined());
  CHECK(s.singular_on_plus > 0);
  CHECK(s.singular_on_minus > 0);
  std::size_t between = 0;
  for (const auto& v : map.cells)
    if (v.cell.t.lo > 0.25 && std::max(std::abs(v.cell.x.lo), std::abs(v.cell.x.hi)) <
                                  v.cell.t.lo - 0.25 - 2 * cs.cell_h) {
      ++between;
      CHECK_FALSE(v.singular);
    }
  CHECK(between > 0);
}

TEST_CASE("materialized band classification matches the streamed one") {
  const SolveConfig cfg = small_config(NonlinearityId::zero);
  const SolveInput in = prepare_input(cfg, small_data(DataKind::band_kink), moll());
  const PicardResult r = picard_solve(cfg, in, false);
  const ClassificationSpec cs = small_cells();
  const auto geom = LightConeGeometry::bands(cfg.T, 0.25);
  const auto map = band_classify(r.U, r.pair, geom, cs);
  const auto run = singsupp_streaming(cfg, in, cs, geom);
  for (std::size_t k = 0; k < map.cells.size(); ++k) {
    CHECK(run.map.cells[k].singular == map.cells[k].singular);
    CHECK(run.map.cells[k].distance == map.cells[k].distance);
  }
  CHECK(check_soundness(map, 2 * cs.cell_h).singular_on_plus > 0);
  CHECK_THROWS_AS(band_classify(r.U, r.pair, LightConeGeometry::lines(cfg.T), cs), Error);
}

TEST_CASE("directional profiles of solved pairs") {
  SolveConfig cfg = small_config(NonlinearityId::zero, 0.5, 9);
  const SolveInput in = prepare_input(cfg, small_data(), moll());
  const RegionLadder regions = trace_regions(cfg);
  const int stride = stride_for(cfg.trace_step, in.lattices.back().h);

  SUBCASE("zero pair") {
    const Net z = lattice_net(in);
    const auto p = directional_profile(CharacteristicPair{z, z, cfg.a, cfg.T}, regions, stride);
    for (const auto& row : p.V.values)
      for (double v : row) CHECK(v == 0.0);
    for (const auto& row : p.W.values)
      for (double v : row) CHECK(v == 0.0);
  }

  SUBCASE("free evolution has bounded directional seminorms") {
    const auto pair = free_evolution(in, cfg.a, cfg.T);
    std::vector<DirectionalAccumulator> av, aw;
    for (std::size_t k = 0; k < in.ladder.size(); ++k) {
      const int st = stride_for(cfg.trace_step, in.lattices[k].h);
      av.emplace_back(in.lattices[k], regions, st);
      aw.emplace_back(in.lattices[k], regions, st);
      for (Index i = 0; i < in.lattices[k].nt; ++i) {
        av[k].push_row(pair.V[k].values().row(i).data());
        aw[k].push_row(pair.W[k].values().row(i).data());
      }
    }
    for (std::size_t n = 1; n < regions.size(); ++n) {
      std::vector<double> v(in.ladder.size()), w(v.size());
      for (std::size_t k = 0; k < in.ladder.size(); ++k)
        for (std::size_t al = 0; al < std::min<std::size_t>(n, 6); ++al) {
          v[k] = std::max(v[k], av[k].plus_sups()[n][al]);
          w[k] = std::max(w[k], aw[k].plus_sups()[n][al]);
        }
      CAPTURE(n);
      // D+ orders on K+_n stay bounded
      CHECK(fit_valuation(in.ladder, v).slope >= -0.05);
      CHECK(fit_valuation(in.ladder, w).slope >= -0.05);
    }
  }

  SUBCASE("a K+ region touching the other line is rejected") {
    RegionLadder bad = regions;
    bad.plus_regions.back().push_back(Box::rect(0.2, 0.3, -0.3, -0.2));
    const auto pair = free_evolution(in, cfg.a, cfg.T);
    CHECK_THROWS_AS(directional_profile(pair, bad, stride), Error);
    try {
      directional_profile(pair.V, bad, stride);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::BadRegionLadder);
    }
    CHECK_THROWS_AS(directional_profile(pair.V, RegionLadder::constant(Box::rect(0, 0.5, -1, 1), 3)),
                    Error);
  }
}

TEST_CASE("row-subsampled accumulator tracks the full one on smooth fields") {
  const auto L = DiagonalLattice::make(1.0 / 256, 0.5, 1.5);
  const RegionLadder regions = RegionLadder::directional(0.5, 1.25, 4);
  const int stride = 4;
  DirectionalAccumulator full(L, regions, stride), sub(L, regions, stride, true);
  std::vector<double> row(std::size_t(L.nx));
  for (Index i = 0; i < L.nt; ++i) {
    for (Index j = 0; j < L.nx; ++j)
      row[std::size_t(j)] = std::sin(1.1 * L.t(i) + 0.9 * L.x(j)) * std::exp(-L.x(j) * L.x(j));
    full.push_row(row.data());
    sub.push_row(row.data());
  }
  CHECK(sub.plain() == full.plain());
  for (std::size_t n = 0; n < regions.size(); ++n)
    for (std::size_t a = 0; a < full.plus_sups()[n].size(); ++a) {
      CHECK(sub.plus_sups()[n][a] <= full.plus_sups()[n][a] + 1e-12);
      CHECK(sub.plus_sups()[n][a] >= 0.95 * full.plus_sups()[n][a]);
      CHECK(sub.minus_sups()[n][a] <= full.minus_sups()[n][a] + 1e-12);
      CHECK(sub.minus_sups()[n][a] >= 0.95 * full.minus_sups()[n][a]);
    }
}
