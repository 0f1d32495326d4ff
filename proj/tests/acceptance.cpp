// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "cgwave/asymptotics.hpp"
#include "cgwave/char_solver.hpp"
#include "cgwave/parallel.hpp"
#include "cgwave/run.hpp"
#include "cgwave/sing_analysis.hpp"
#include "cgwave/verify3d.hpp"

using namespace cgw;
namespace fs = std::filesystem;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

int failures = 0;
std::ofstream results("acceptance_results.txt");

void report(int id, const std::string& name, bool ok, double seconds, double budget,
            const std::string& detail) {
  const bool in_time = budget <= 0 || seconds < budget;
  const bool pass = ok && in_time;
  if (!pass) ++failures;
  char line[1024];
  std::snprintf(line, sizeof line, "%s criterion %d: %s (%.1f s%s) %s", pass ? "PASS" : "FAIL",
                id, name.c_str(), seconds, in_time ? "" : ", over budget", detail.c_str());
  std::printf("%s\n", line);
  std::fflush(stdout);
  results << line << "\n" << std::flush;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// membership and exterior sups collected from every solved pair
struct AuditLog {
  double worst_membership = 0.0, worst_exterior = 0.0;
  std::size_t pairs = 0;
  bool all_member = true;
  void add(double membership, double exterior) {
    ++pairs;
    worst_membership = std::max(worst_membership, membership);
    worst_exterior = std::max(worst_exterior, exterior);
  }
} audit_log;

Net net_1d(const EpsilonLadder& L, const SpacingRule& rule,
           const std::function<double(double, double)>& fn) {
  return make_net<double>(L, Box::line(-1, 1), rule,
                          [&fn](double e, double, double x) { return fn(e, x); });
}

// ---------------------------------------------------------------------------

void criterion1() {
  Timer t;
  const auto L = EpsilonLadder::dyadic(4, 12);
  const auto rule = SpacingRule::fixed(1.0 / 128);
  const auto K = RegionLadder::constant(Box::line(-0.5, 0.5), 3);
  const std::vector<std::function<double(double)>> gs = {
      [](double x) { return std::sin(x) + 2.0; },
      [](double x) { return std::exp(-x * x); },
      [](double x) { return 1.0 / (1.0 + x * x); }};
  double worst = 0.0, worst_r2 = 1.0;
  std::size_t fits = 0;
  for (double b : {-2.0, -1.0, -0.5, 0.0, 1.0, 2.0})
    for (const auto& g : gs) {
      const Net u = net_1d(L, rule, [&](double e, double x) { return std::pow(e, b) * g(x); });
      const SeminormProfile p = seminorm_profile(u, K);
      for (std::size_t n = 0; n < p.levels(); ++n) {
        const ValuationEstimate v = estimate_valuation(p, n);
        worst = std::max(worst, std::abs(v.slope - b));
        worst_r2 = std::min(worst_r2, v.r_squared);
        ++fits;
      }
    }
  report(1, "valuation estimator calibration", worst <= 0.05 && worst_r2 >= 0.999, t.seconds(), 10,
         "(" + std::to_string(fits) + " fits, max |slope-b| " + fmt("%.2e", worst) + ", min r2 " +
             fmt("%.6f", worst_r2) + ")");
}

void criterion2() {
  Timer t;
  const auto L = EpsilonLadder::dyadic(3, 11);
  const auto rule = SpacingRule::fixed(1.0 / 40);
  const auto K = RegionLadder::constant(Box::line(-1, 1), 4);
  const std::size_t n_max = 3;
  const std::vector<std::function<double(double)>> gs = {
      [](double x) { return std::exp(x); }, [](double x) { return std::cos(2 * x); },
      [](double x) { return 1.0 + x * x; }, [](double x) { return std::sin(x) + 2.0; },
      [](double x) { return std::exp(-x * x); }};
  const double bs[] = {-2.0, -1.0, -0.5, 0.0, 1.0, 2.0};
  std::vector<Net> nets;
  std::vector<double> b_of;
  for (double b : bs)
    for (const auto& g : gs) {
      nets.push_back(net_1d(L, rule, [&](double e, double x) { return std::pow(e, b) * g(x); }));
      b_of.push_back(b);
    }
  const std::size_t N = nets.size();  // 30
  std::vector<std::vector<double>> slope(N);
  auto slopes_of = [&](const Net& u) {
    const SeminormProfile p = seminorm_profile(u, K);
    std::vector<double> s;
    for (std::size_t n = 0; n < p.levels(); ++n) s.push_back(estimate_valuation(p, n).slope);
    return s;
  };
  for (std::size_t i = 0; i < N; ++i) slope[i] = slopes_of(nets[i]);

  std::size_t bad[5] = {0, 0, 0, 0, 0};
  for (std::size_t i = 0; i < N; ++i) {
    for (double lambda : {-3.0, 1e-4, 250.0}) {
      const auto s = slopes_of(scale(nets[i], lambda));
      for (std::size_t n = 0; n < s.size(); ++n)
        if (std::abs(s[n] - slope[i][n]) > 1e-12) ++bad[0];
    }
    const std::size_t j = (i + 7) % N;
    const auto sum = slopes_of(nets[i] + nets[j]);
    const auto prod = slopes_of(nets[i] * nets[j]);
    for (std::size_t n = 0; n < sum.size(); ++n) {
      if (sum[n] < std::min(slope[i][n], slope[j][n]) - 0.05) ++bad[1];
      if (prod[n] < slope[i][n] + slope[j][n] - 0.1) ++bad[2];
    }
    for (std::size_t n = 0; n + 1 < slope[i].size(); ++n)
      if (slope[i][n + 1] > slope[i][n] + 0.05) ++bad[3];
    const Net& u = nets[i];
    const Net& v = nets[(i + 1) % N];
    const Net& w = nets[(i + 11) % N];
    const double duv = sharp_distance(u, v, K, n_max).distance;
    const double dvu = sharp_distance(v, u, K, n_max).distance;
    const double duw = sharp_distance(u, w, K, n_max).distance;
    const double dwv = sharp_distance(w, v, K, n_max).distance;
    if (duv != dvu) ++bad[4];
    if (duv > std::max(duw, dwv) + std::ldexp(1.0, -int(n_max))) ++bad[4];
  }
  // unit ball: bounded-type nets have every p_n ≤ 1
  std::size_t ball_bad = 0;
  for (std::size_t i = 0; i < N; ++i) {
    if (b_of[i] < 0) continue;
    const auto d = distance_from_profile(seminorm_profile(nets[i], K), n_max);
    for (double p : d.p_values)
      if (p > 1.0 + 1e-15) ++ball_bad;
  }
  const std::size_t total = bad[0] + bad[1] + bad[2] + bad[3] + bad[4];
  std::ostringstream d;
  d << "(" << N << " nets; violations scaling " << bad[0] << ", ultra " << bad[1] << ", product "
    << bad[2] << ", monotone " << bad[3] << ", metric " << bad[4] << "; unit ball " << ball_bad
    << ")";
  report(2, "ultra-metric properties", total == 0 && ball_bad == 0, t.seconds(), 30, d.str());
}

// Streams the sup distance between U and the d'Alembert solution of the sampled data.
class DalembertObserver : public SweepObserver {
 public:
  DalembertObserver(const DiagonalLattice& L, const std::vector<double>& u0) : L_(L), u0_(u0) {}
  void on_slice(const SliceView& s) override {
    const Index nx = L_.nx, i = s.i;
    for (Index j = 0; j < nx; ++j) {
      const double a = j - i >= 0 ? u0_[std::size_t(j - i)] : 0.0;
      const double b = j + i < nx ? u0_[std::size_t(j + i)] : 0.0;
      const double u = j >= s.lo && j <= s.hi ? s.U[j] : 0.0;
      err = std::max(err, std::abs(u - 0.5 * (a + b)));
    }
  }
  double err = 0.0;

 private:
  DiagonalLattice L_;
  const std::vector<double>& u0_;
};

void criterion3() {
  Timer t;
  const Mollifier moll = make_mollifier();
  DataSpec data;
  std::vector<std::vector<double>> errs;
  for (double nodes : {16.0, 32.0}) {
    SolveConfig cfg;
    cfg.T = 1.0;
    cfg.a = 1.0;
    cfg.margin = 0.25;
    cfg.f = NonlinearityId::zero;
    cfg.ladder = EpsilonLadder::dyadic(5, 10);
    cfg.h_rule = SpacingRule::proportional(nodes);
    const SolveInput in = prepare_input(cfg, data, moll);
    const std::size_t n = in.ladder.size();
    std::vector<std::unique_ptr<DalembertObserver>> obs(n);
    std::vector<std::unique_ptr<AuditObserver>> aud(n);
    ObserverFactory f = [&](std::size_t k, std::size_t) {
      obs[k] = std::make_unique<DalembertObserver>(in.lattices[k], in.data[k].U0);
      aud[k] = std::make_unique<AuditObserver>(in.lattices[k], cfg.a, in.ladder[k]);
      return std::vector<SweepObserver*>{obs[k].get(), aud[k].get()};
    };
    (void)solve_streaming(cfg, in, f, false);
    std::vector<double> e;
    for (std::size_t k = 0; k < n; ++k) {
      e.push_back(obs[k]->err);
      audit_log.add(aud[k]->membership,
                    std::max({aud[k]->exterior_U, aud[k]->exterior_V, aud[k]->exterior_W}));
    }
    errs.push_back(e);
  }
  double worst = 0.0, min_ratio = 1e300;
  for (std::size_t k = 0; k < errs[0].size(); ++k) {
    worst = std::max(worst, errs[0][k]);
    min_ratio = std::min(min_ratio, errs[0][k] / errs[1][k]);
  }
  report(3, "linear solver against d'Alembert", worst <= 5e-3 && min_ratio >= 3.5, t.seconds(),
         120,
         "(max error at h = eps/16 " + fmt("%.3e", worst) + ", min ratio " +
             fmt("%.2f", min_ratio) + ")");
}

void criterion4() {
  Timer t;
  const RunConfig def = parse_run_config("{}");
  const ContractionSettings& c = def.contraction;
  SolveConfig cfg;
  cfg.T = c.T;
  cfg.a = c.a;
  cfg.margin = 1.0;
  cfg.f = NonlinearityId::square;
  cfg.E_exponent = 1.0;
  cfg.ladder = c.ladder;
  cfg.h_rule = c.h_rule;
  DataSpec data;
  data.a = c.a;
  const Mollifier moll = make_mollifier();
  const ContractionReport rep = contraction_test(cfg, data, moll, 21, 20240611);
  const double bound = 2 * std::exp(-1.0);
  const bool ratios_ok = rep.pairs_tested >= 20 && rep.max_ratio <= bound + 0.02;

  const PicardResult pr = picard_solve(cfg, prepare_input(cfg, data, moll), true);
  bool monotone = pr.trace.size() >= 2;
  for (std::size_t q = 1; q < pr.trace.size(); ++q)
    monotone = monotone && pr.trace[q].d_tilde <= pr.trace[q - 1].d_tilde;
  const MembershipReport m = membership_M(pr.pair);
  audit_log.all_member = audit_log.all_member && m.member;
  double ext = 0.0;
  for (double s : m.exterior_sups) ext = std::max(ext, s);
  audit_log.add(ext, 0.0);
  report(4, "contraction bound", ratios_ok && monotone, t.seconds(), 300,
         "(" + std::to_string(rep.pairs_tested) + " pairs, max ratio " + fmt("%.4f", rep.max_ratio) +
             " vs " + fmt("%.4f", bound + 0.02) + ", trace " +
             (monotone ? "monotone" : "not monotone") + " over " +
             std::to_string(pr.trace.size()) + " iterations)");
}

SolveConfig cone_config(NonlinearityId f) {
  SolveConfig cfg;
  cfg.T = 1.0;
  cfg.a = 1.0;
  cfg.margin = 0.5;
  cfg.f = f;
  cfg.E_exponent = 1.0;
  cfg.ladder = EpsilonLadder::dyadic(5, 12);
  cfg.h_rule = SpacingRule::proportional(4);
  return cfg;
}

void log_run(const SingsuppRun& r) {
  for (std::size_t k = 0; k < r.membership.size(); ++k)
    audit_log.add(r.membership[k], r.exterior[k]);
  audit_log.all_member = audit_log.all_member && r.audit.passed();
}

void criterion5() {
  Timer t;
  ClassificationSpec spec;
  spec.T = 1.0;
  spec.X = 2.0;
  spec.cell_h = 1.0 / 16;
  spec.max_order = 4;
  spec.tol = 0.15;
  const double dilation = 2 * spec.cell_h;
  const LightConeGeometry geom = LightConeGeometry::lines(1.0);
  bool ok = true;
  std::ostringstream d;
  d << "(";
  for (NonlinearityId f : {NonlinearityId::square, NonlinearityId::sine}) {
    const SolveConfig cfg = cone_config(f);
    const SolveInput in = prepare_input(cfg, DataSpec{}, make_mollifier());
    const SingsuppRun r = singsupp_streaming(cfg, in, spec, geom);
    log_run(r);
    const SoundnessReport s = check_soundness(r.map, dilation);
    const bool good = s.outside_dilation == 0 && s.false_alarms == 0 && s.singular_on_plus > 0 &&
                      s.singular_on_minus > 0;
    ok = ok && good;
    d << to_string(f) << ": " << r.map.singular_count() << "/" << r.map.cells.size()
      << " singular, on lines " << s.singular_on_plus << "+" << s.singular_on_minus
      << ", outside dilation " << s.outside_dilation << ", far singular " << s.false_alarms
      << ", touching regular " << s.missed << "; ";
  }
  d << "ladder 2^-5..2^-12, h = eps/4)";
  report(5, "singular support within the dilated light cone", ok, t.seconds(), 600, d.str());
}

void criterion6() {
  Timer t;
  ClassificationSpec spec;
  spec.T = 1.0;
  spec.X = 2.0;
  const double dilation = 2 * spec.cell_h;
  DataSpec data;
  data.kind = DataKind::band_kink;
  data.b = 0.25;
  const LightConeGeometry geom = LightConeGeometry::bands(1.0, data.b);
  const SolveConfig cfg = cone_config(NonlinearityId::square);
  const SolveInput in = prepare_input(cfg, data, make_mollifier());
  const SingsuppRun r = singsupp_streaming(cfg, in, spec, geom);
  log_run(r);
  const SoundnessReport s = check_soundness(r.map, dilation);
  // interior between the bands: x strictly between the inner band edges
  std::size_t between = 0, between_singular = 0;
  for (const CellVerdict& c : r.map.cells) {
    const double lo = c.cell.t.lo;
    if (c.cell.x.lo >= -(lo - data.b) + dilation && c.cell.x.hi <= (lo - data.b) - dilation) {
      ++between;
      if (c.singular) ++between_singular;
    }
  }
  const bool ok = s.outside_dilation == 0 && between > 0 && between_singular == 0;
  std::ostringstream d;
  d << "(band b = 1/4: " << r.map.singular_count() << " singular, outside dilated bands "
    << s.outside_dilation << ", between-band cells " << between << " with " << between_singular
    << " singular, on bands " << s.singular_on_plus << "+" << s.singular_on_minus << ")";
  report(6, "band variant confinement", ok, t.seconds(), 600, d.str());
}

void criterion7() {
  Timer t;
  const EpsilonLadder ladder = EpsilonLadder::geometric(0.25, 0.25, 4);
  const RadialResidual fine = radial_residual(make_radial_net(ladder, 2.0, 64), 6);
  const RadialResidual coarse = radial_residual(make_radial_net(ladder, 2.0, 32), 6);
  double worst = 0.0, min_ratio = 1e300;
  for (std::size_t k = 0; k < 3; ++k) {  // 2^-2, 2^-4, 2^-6
    worst = std::max(worst, fine.sup_residual[k]);
    min_ratio = std::min(min_ratio, coarse.sup_residual[k] / fine.sup_residual[k]);
  }
  const RadialNet net = make_radial_net(EpsilonLadder::dyadic(2, 20), 2.0, 64);
  const std::vector<Interval> cells = {{0.0, 0.25}, {0.5, 2.0}, {0.5, 1.0}, {1.0, 2.0}};
  const auto v = radial_singsupp(net, cells, 0.05, 3);
  const double s0 = v[0].slopes[0].slope;
  double away = ValuationEstimate::infinity;
  for (std::size_t c = 1; c < v.size(); ++c) away = std::min(away, v[c].worst_slope);
  const bool ok = worst <= 1e-4 && min_ratio >= 3.5 && std::abs(s0 + 0.5) <= 0.05 &&
                  v[0].singular && away >= -0.05;
  report(7, "radial 3-D example", ok, t.seconds(), 60,
         "(max residual " + fmt("%.2e", worst) + ", min ratio " + fmt("%.1f", min_ratio) +
             ", slope at 0 " + fmt("%.4f", s0) + ", worst slope on [1/2, 2] " +
             fmt("%.4f", away) + ")");
}

void criterion8() {
  const bool ok = audit_log.pairs > 0 && audit_log.all_member &&
                  audit_log.worst_membership <= 1e-8 && audit_log.worst_exterior <= 1e-8;
  report(8, "membership and exterior-zero audits", ok, 0.0, 0,
         "(" + std::to_string(audit_log.pairs) + " solved entries, worst membership sup " +
             fmt("%.2e", audit_log.worst_membership) + ", worst exterior sup " +
             fmt("%.2e", audit_log.worst_exterior) + ", property audits " +
             (audit_log.all_member ? "passed" : "failed") + ")");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void criterion9() {
  Timer t;
  RunConfig cfg = parse_run_config(R"({
    "command": "all", "seed": 5,
    "data": {"kind": "kink", "a": 1.0},
    "solve": {"T": 0.5, "margin": 0.5, "f": "square",
              "ladder": {"k_min": 5, "k_max": 8}, "h_rule": {"kind": "proportional", "value": 4}},
    "analysis": {"X": 1.75},
    "contraction": {"pairs": 3, "ladder": {"k_min": 2, "k_max": 5}},
    "radial": {"residual_ladder": {"k_min": 2, "k_max": 5}, "singsupp_ladder": {"k_min": 2, "k_max": 12}}
  })");
  const fs::path base = fs::temp_directory_path() / "cgwave_acceptance_det";
  fs::remove_all(base);
  cfg.output_dir = base / "a";
  const RunOutcome a = run(cfg);
  cfg.output_dir = base / "b";
  const RunOutcome b = run(cfg);
  bool ok = a.status == 0 && b.status == 0 && a.manifest.files.size() == b.manifest.files.size();
  std::size_t compared = 0;
  if (ok) {
    for (std::size_t i = 0; i < a.manifest.files.size(); ++i) {
      const std::string& p = a.manifest.files[i].path;
      ok = ok && p == b.manifest.files[i].path;
      const std::string ext = fs::path(p).extension().string();
      if (ext == ".csv" || ext == ".json") {
        ++compared;
        ok = ok && slurp(base / "a" / p) == slurp(base / "b" / p);
      }
    }
    ok = ok && slurp(base / "a" / "manifest.json") == slurp(base / "b" / "manifest.json");
  }
  report(9, "determinism of repeated runs", ok && compared > 0, t.seconds(), 0,
         "(" + std::to_string(compared) + " CSV/JSON artifacts compared byte by byte)");
}

}  // namespace

int main() {
  std::printf("acceptance suite on %zu thread(s)\n", thread_count());
  const std::vector<std::pair<int, std::function<void()>>> steps = {
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}};
  for (const auto& [id, fn] : steps) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, "threw", false, 0.0, 0, e.what());
    }
  }
  std::printf("%d criterion failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
