#include "cgwave/run.hpp"

#include <array>
#include <chrono>
#include <iomanip>
#include <map>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include "cgwave/asymptotics.hpp"
#include "cgwave/errors.hpp"
#include "cgwave/net_io.hpp"
#include "cgwave/parallel.hpp"
#include "cgwave/sing_analysis.hpp"
#include "cgwave/verify3d.hpp"

namespace cgw {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& msg) { fail(ErrorCode::ConfigError, msg); }

// Object reader that rejects unknown keys and wraps type errors.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) config_error(where_ + " must be an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      config_error(where_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string path(const char* key) const { return where_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) config_error("unknown key " + where_ + "." + it.key());
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

EpsilonLadder read_ladder(const json& j, const std::string& where) {
  Reader r(j, where);
  EpsilonLadder out;
  try {
    if (r.has("epsilons")) {
      std::vector<double> eps;
      r.get("epsilons", eps);
      out = EpsilonLadder(eps);
    } else if (r.has("k_min") || r.has("k_max")) {
      int lo = 0, hi = 0;
      r.get("k_min", lo);
      r.get("k_max", hi);
      out = EpsilonLadder::dyadic(lo, hi);
    } else {
      config_error(where + " needs epsilons or k_min/k_max");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    config_error(where + ": " + e.what());
  }
  r.finish();
  return out;
}

json ladder_json(const EpsilonLadder& l) { return {{"epsilons", l.values()}}; }

SpacingRule read_rule(const json& j, const std::string& where) {
  Reader r(j, where);
  std::string kind = "proportional";
  double value = 16;
  r.get("kind", kind);
  r.get("value", value);
  r.finish();
  if (!(value > 0)) config_error(where + ".value must be positive");
  if (kind == "proportional") return SpacingRule::proportional(value);
  if (kind == "fixed") return SpacingRule::fixed(value);
  config_error(where + ".kind must be proportional or fixed");
}

json rule_json(const SpacingRule& r) {
  return {{"kind", r.kind == SpacingRule::Kind::proportional ? "proportional" : "fixed"},
          {"value", r.value}};
}

template <typename Fn>
void with_child(Reader& r, const char* key, Fn fn) {
  if (const json* c = r.child(key)) fn(*c, r.path(key));
}

bool approx_monotone(const std::vector<TraceRow>& trace) {
  for (std::size_t q = 1; q < trace.size(); ++q)
    if (trace[q].d_tilde > trace[q - 1].d_tilde) return false;
  return true;
}

json slope_json(double s) { return std::isfinite(s) ? json(s) : json(s > 0 ? "inf" : "-inf"); }

class Stopwatch {
 public:
  explicit Stopwatch(std::string what) : what_(std::move(what)) {}
  ~Stopwatch() {
    const double s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::clog << "[cgwave] " << what_ << " " << std::fixed << std::setprecision(1) << s << " s\n";
  }

 private:
  std::string what_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// --- commands -------------------------------------------------------------

json run_solve(const RunConfig& cfg, const fs::path& out) {
  Stopwatch sw("solve");
  const Mollifier moll = make_mollifier(cfg.mollifier);
  const SolveInput in = prepare_input(cfg.solve, cfg.data, moll);
  const std::size_t n = in.ladder.size();

  std::vector<Index> steps(n, 1);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    const double h = in.lattices[k].h;
    Index s = std::max<Index>(1, Index(std::floor(cfg.output.net_spacing / h + 1e-9)));
    while (s > 1 && s * h > prev * (1 + 1e-12)) --s;
    steps[k] = s;
    prev = double(s) * h;
  }
  std::vector<std::unique_ptr<GridObserver>> grids(n);
  std::vector<std::unique_ptr<AuditObserver>> audits(n);
  ObserverFactory factory = [&](std::size_t k, std::size_t) {
    audits[k] = std::make_unique<AuditObserver>(in.lattices[k], cfg.solve.a, in.ladder[k]);
    std::vector<SweepObserver*> obs{audits[k].get()};
    if (cfg.output.save_nets) {
      grids[k] = std::make_unique<GridObserver>(in.lattices[k], steps[k]);
      obs.push_back(grids[k].get());
    }
    return obs;
  };
  const StreamedSolve s = solve_streaming(cfg.solve, in, factory, true);

  write_trace_csv(out / "trace.csv", in.ladder, s.trace);
  write_runs_csv(out / "runs.csv", s.runs);
  if (cfg.output.save_nets) {
    Box box = grids.front()->U.domain();
    for (const auto& g : grids) box = box.intersect(g->U.domain());
    std::vector<GridFunction> V, W, U;
    for (auto& g : grids) {
      V.push_back(std::move(g->V));
      W.push_back(std::move(g->W));
      U.push_back(std::move(g->U));
    }
    save_net(Net(in.ladder, std::move(U), box), out / "nets" / "U");
    save_net(Net(in.ladder, std::move(V), box), out / "nets" / "V");
    save_net(Net(in.ladder, std::move(W), box), out / "nets" / "W");
  }

  json j;
  j["epsilon"] = in.ladder.values();
  std::vector<double> membership, exterior;
  bool member = true;
  for (const auto& a : audits) {
    membership.push_back(a->membership);
    exterior.push_back(std::max({a->exterior_U, a->exterior_V, a->exterior_W}));
    member = member && a->membership <= cfg.analysis.exterior_tol &&
             exterior.back() <= cfg.analysis.exterior_tol;
  }
  j["membership_sup"] = membership;
  j["exterior_sup"] = exterior;
  j["member"] = member;
  std::vector<std::size_t> iters;
  for (const auto& r : s.runs) iters.push_back(r.iterations);
  j["iterations"] = iters;
  std::vector<double> d;
  for (const auto& row : s.trace) d.push_back(row.d_tilde);
  j["d_tilde"] = d;
  j["trace_monotone"] = approx_monotone(s.trace);
  write_json(out / "solve.json", j);
  return j;
}

json run_valuation(const RunConfig& cfg, const fs::path& out) {
  Stopwatch sw("valuation");
  const ValuationSettings& v = cfg.valuation;
  Net net;
  RegionLadder regions;
  if (v.net == "synthetic") {
    std::function<double(double)> g;
    if (v.g == "sin") g = [](double x) { return std::sin(x); };
    else if (v.g == "cos") g = [](double x) { return std::cos(x); };
    else g = [](double x) { return std::exp(-x * x); };
    net = make_net<double>(v.ladder, Box::line(-1.0, 1.0), SpacingRule::fixed(v.h),
                           [&](double eps, double, double x) { return std::pow(eps, v.b) * g(x); });
    regions = RegionLadder::constant(Box::line(-0.5, 0.5), v.levels);
  } else {
    net = load_net(v.net);
    Box K = net.logical_domain();
    const double mx = 0.1 * K.x.length();
    K.x = {K.x.lo + mx, K.x.hi - mx};
    if (K.dim == 2) {
      const double mt = 0.1 * K.t.length();
      K.t = {K.t.lo + mt, K.t.hi - mt};
    }
    regions = RegionLadder::constant(K, v.levels);
  }
  const SeminormProfile p = seminorm_profile(net, regions);
  std::vector<ValuationEstimate> rows;
  json slopes = json::array();
  for (std::size_t n = 0; n < p.levels(); ++n) {
    rows.push_back(estimate_valuation(p, n));
    slopes.push_back(rows.back().saturated ? json("inf") : json(rows.back().slope));
  }
  write_profile_csv(out / "profile.csv", p);
  write_valuation_csv(out / "valuation.csv", rows);
  json j;
  j["net"] = v.net;
  j["slopes"] = slopes;
  write_json(out / "valuation.json", j);
  return j;
}

json audit_json(const PropertyAudit& a) {
  json j;
  j["bounded"] = {{"passed", a.bounded.passed}, {"worst_slope", slope_json(a.bounded.worst_slope())}};
  j["plus"] = {{"passed", a.plus.passed}, {"worst_slope", slope_json(a.plus.worst_slope())}};
  j["minus"] = {{"passed", a.minus.passed}, {"worst_slope", slope_json(a.minus.worst_slope())}};
  j["exterior"] = a.exterior;
  j["passed"] = a.passed();
  return j;
}

json run_singsupp(const RunConfig& cfg, const fs::path& out) {
  Stopwatch sw("singsupp");
  const Mollifier moll = make_mollifier(cfg.mollifier);
  const SolveInput in = prepare_input(cfg.solve, cfg.data, moll);
  ClassificationSpec spec;
  spec.T = cfg.solve.T;
  spec.X = cfg.analysis.X;
  spec.cell_h = cfg.analysis.cell_h;
  spec.max_order = cfg.analysis.max_order;
  spec.tol = cfg.analysis.tol;
  spec.diff_step = cfg.analysis.diff_step;
  spec.zero_rel = cfg.analysis.zero_rel;
  const LightConeGeometry geom = cfg.data.kind == DataKind::band_kink
                                     ? LightConeGeometry::bands(cfg.solve.T, cfg.data.b)
                                     : LightConeGeometry::lines(cfg.solve.T);
  const SingsuppRun r = singsupp_streaming(cfg.solve, in, spec, geom);
  write_map_csv(out / "map.csv", r.map);
  emit_svg_heatmap(out / "map.svg", r.map, geom);

  const double dilation = cfg.analysis.dilation_cells * spec.cell_h;
  const SoundnessReport sr = check_soundness(r.map, dilation);
  json j;
  j["geometry"] = geom.is_band() ? "bands" : "lines";
  j["cells"] = r.map.cells.size();
  j["singular"] = r.map.singular_count();
  j["singular_on_plus"] = sr.singular_on_plus;
  j["singular_on_minus"] = sr.singular_on_minus;
  j["missed"] = sr.missed;
  j["false_alarms"] = sr.false_alarms;
  j["outside_dilation"] = sr.outside_dilation;
  j["dilation"] = dilation;
  j["sound"] = sr.sound();
  j["confined"] = sr.confined();
  j["membership_sup"] = r.membership;
  j["exterior_sup"] = r.exterior;
  j["audit"] = audit_json(r.audit);
  write_runs_csv(out / "singsupp_runs.csv", r.runs);
  write_json(out / "singsupp.json", j);
  return j;
}

json run_contraction(const RunConfig& cfg, const fs::path& out) {
  Stopwatch sw("contraction");
  const ContractionSettings& c = cfg.contraction;
  SolveConfig scfg = cfg.solve;
  scfg.T = c.T;
  scfg.a = c.a;
  scfg.ladder = c.ladder;
  scfg.h_rule = c.h_rule;
  DataSpec data = cfg.data;
  data.a = c.a;
  if (data.kind == DataKind::band_kink) data.b = std::min(data.b, 0.5 * c.a);
  const Mollifier moll = make_mollifier(cfg.mollifier);
  const ContractionReport rep = contraction_test(scfg, data, moll, c.pairs, cfg.seed);
  write_contraction_csv(out / "contraction.csv", rep);

  const PicardResult pr = picard_solve(scfg, prepare_input(scfg, data, moll), true);
  write_trace_csv(out / "contraction_trace.csv", scfg.ladder, pr.trace);

  json j;
  j["pairs"] = rep.pairs_tested;
  j["bound"] = rep.bound;
  j["max_ratio"] = rep.max_ratio;
  j["within_bound"] = rep.max_ratio <= rep.bound + c.bound_slack;
  j["ratios"] = rep.ratios;
  std::vector<double> d;
  for (const auto& row : pr.trace) d.push_back(row.d_tilde);
  j["trace_d_tilde"] = d;
  j["trace_monotone"] = approx_monotone(pr.trace);
  j["seed"] = cfg.seed;
  write_json(out / "contraction.json", j);
  return j;
}

json run_example3d(const RunConfig& cfg, const fs::path& out) {
  Stopwatch sw("example3d");
  const RadialSettings& r = cfg.radial;
  const RadialResidual fine =
      radial_residual(make_radial_net(r.residual_ladder, r.R, r.nodes_per_sqrt_eps), r.accuracy);
  const RadialResidual coarse = radial_residual(
      make_radial_net(r.residual_ladder, r.R, r.nodes_per_sqrt_eps / 2), r.accuracy);
  write_radial_csv(out / "radial.csv", fine);
  write_radial_csv(out / "radial_coarse.csv", coarse);
  const RadialNet snet = make_radial_net(r.singsupp_ladder, r.R, r.nodes_per_sqrt_eps);
  const auto verdicts = radial_singsupp(snet, r.cells, r.tol, r.max_order);
  write_radial_verdicts_csv(out / "radial_verdicts.csv", verdicts);

  json j;
  j["epsilon"] = fine.eps;
  j["h_r"] = fine.h_r;
  j["sup_residual"] = fine.sup_residual;
  std::vector<double> ratio;
  for (std::size_t k = 0; k < fine.eps.size(); ++k)
    ratio.push_back(coarse.sup_residual[k] / fine.sup_residual[k]);
  j["richardson_ratio"] = ratio;
  json cells = json::array();
  for (const auto& v : verdicts) {
    json s = json::array();
    for (const auto& e : v.slopes) s.push_back(e.saturated ? json("inf") : json(e.slope));
    cells.push_back({{"r_lo", v.cell.lo},
                     {"r_hi", v.cell.hi},
                     {"singular", v.singular},
                     {"slopes", s}});
  }
  j["cells"] = cells;
  write_json(out / "example3d.json", j);
  return j;
}

}  // namespace

Command parse_command(const std::string& name) {
  if (name == "solve") return Command::solve;
  if (name == "valuation") return Command::valuation;
  if (name == "singsupp") return Command::singsupp;
  if (name == "contraction") return Command::contraction;
  if (name == "example3d") return Command::example3d;
  if (name == "all") return Command::all;
  config_error("unknown command '" + name + "'");
}

std::string to_string(Command c) {
  switch (c) {
    case Command::solve: return "solve";
    case Command::valuation: return "valuation";
    case Command::singsupp: return "singsupp";
    case Command::contraction: return "contraction";
    case Command::example3d: return "example3d";
    case Command::all: return "all";
  }
  return "all";
}

void RunConfig::validate() const {
  auto check = [](bool ok, const std::string& msg) {
    if (!ok) config_error(msg);
  };
  try {
    solve.validate();
    data.validate();
    (void)make_mollifier(mollifier);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    config_error(e.what());
  }
  check(std::abs(solve.a - data.a) <= 1e-12, "solve.a must equal data.a");
  check(analysis.cell_h > 0, "analysis.cell_h must be positive");
  check(analysis.max_order >= 0 && analysis.max_order <= 6, "analysis.max_order must lie in 0..6");
  check(analysis.tol > 0, "analysis.tol must be positive");
  check(analysis.X > 0, "analysis.X must be positive");
  check(analysis.dilation_cells > 0, "analysis.dilation_cells must be positive");
  check(contraction.pairs >= 1, "contraction.pairs must be positive");
  check(contraction.T > 0 && contraction.a > 0, "contraction T and a must be positive");
  check(valuation.levels >= 1 && valuation.levels <= 6, "valuation.levels must lie in 1..6");
  check(valuation.h > 0, "valuation.h must be positive");
  check(valuation.g == "sin" || valuation.g == "cos" || valuation.g == "gauss",
        "valuation.g must be sin, cos or gauss");
  check(radial.R > 0, "radial.R must be positive");
  check(radial.nodes_per_sqrt_eps >= 32,
        "radial.nodes_per_sqrt_eps must be at least 32 (the halved grid needs 16)");
  check(radial.accuracy == 2 || radial.accuracy == 4 || radial.accuracy == 6,
        "radial.accuracy must be 2, 4 or 6");
  check(radial.max_order >= 0 && radial.max_order <= 3, "radial.max_order must lie in 0..3");
  check(!radial.cells.empty(), "radial.cells must not be empty");
  for (const Interval& iv : radial.cells)
    check(iv.lo >= 0 && iv.hi > iv.lo && iv.hi <= radial.R, "radial cells must lie in [0, R]");
  check(output.net_spacing > 0, "output.net_spacing must be positive");
  check(!output_dir.empty(), "output_dir must not be empty");
}

RunConfig parse_run_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  Reader r(root, "config");
  std::string cmd = to_string(cfg.command);
  r.get("command", cmd);
  cfg.command = parse_command(cmd);
  std::string outdir = cfg.output_dir.string();
  r.get("output_dir", outdir);
  cfg.output_dir = outdir;
  r.get("seed", cfg.seed);
  r.get("mollifier", cfg.mollifier);

  with_child(r, "data", [&](const json& j, const std::string& where) {
    Reader d(j, where);
    std::string kind = to_string(cfg.data.kind);
    d.get("kind", kind);
    try {
      cfg.data.kind = parse_data_kind(kind);
    } catch (const Error& e) {
      config_error(where + ".kind: " + e.what());
    }
    d.get("a", cfg.data.a);
    d.get("b", cfg.data.b);
    d.get("amplitude", cfg.data.amplitude);
    d.finish();
  });
  cfg.solve.a = cfg.data.a;

  with_child(r, "solve", [&](const json& j, const std::string& where) {
    Reader s(j, where);
    SolveConfig& sc = cfg.solve;
    s.get("T", sc.T);
    s.get("margin", sc.margin);
    std::string f(to_string(sc.f));
    s.get("f", f);
    try {
      sc.f = parse_nonlinearity(f);
    } catch (const Error& e) {
      config_error(where + ".f: " + e.what());
    }
    s.get("E_exponent", sc.E_exponent);
    with_child(s, "ladder", [&](const json& l, const std::string& w) { sc.ladder = read_ladder(l, w); });
    with_child(s, "h_rule", [&](const json& l, const std::string& w) { sc.h_rule = read_rule(l, w); });
    with_child(s, "picard", [&](const json& p, const std::string& w) {
      Reader pr(p, w);
      pr.get("max_iters", sc.picard.max_iters);
      pr.get("stop_distance", sc.picard.stop_distance);
      pr.get("initial_iters", sc.picard.initial_iters);
      pr.finish();
    });
    s.get("trace_step", sc.trace_step);
    s.get("n_max", sc.n_max);
    s.finish();
  });

  with_child(r, "analysis", [&](const json& j, const std::string& where) {
    Reader a(j, where);
    AnalysisSettings& an = cfg.analysis;
    a.get("cell_h", an.cell_h);
    a.get("max_order", an.max_order);
    a.get("tol", an.tol);
    a.get("X", an.X);
    a.get("diff_step", an.diff_step);
    a.get("zero_rel", an.zero_rel);
    a.get("dilation_cells", an.dilation_cells);
    a.get("exterior_tol", an.exterior_tol);
    a.finish();
  });

  with_child(r, "contraction", [&](const json& j, const std::string& where) {
    Reader c(j, where);
    ContractionSettings& cs = cfg.contraction;
    c.get("pairs", cs.pairs);
    c.get("T", cs.T);
    c.get("a", cs.a);
    with_child(c, "ladder", [&](const json& l, const std::string& w) { cs.ladder = read_ladder(l, w); });
    with_child(c, "h_rule", [&](const json& l, const std::string& w) { cs.h_rule = read_rule(l, w); });
    c.get("bound_slack", cs.bound_slack);
    c.finish();
  });

  with_child(r, "valuation", [&](const json& j, const std::string& where) {
    Reader v(j, where);
    ValuationSettings& vs = cfg.valuation;
    v.get("net", vs.net);
    v.get("b", vs.b);
    v.get("g", vs.g);
    with_child(v, "ladder", [&](const json& l, const std::string& w) { vs.ladder = read_ladder(l, w); });
    v.get("levels", vs.levels);
    v.get("h", vs.h);
    v.finish();
  });

  with_child(r, "radial", [&](const json& j, const std::string& where) {
    Reader a(j, where);
    RadialSettings& rs = cfg.radial;
    a.get("R", rs.R);
    a.get("nodes_per_sqrt_eps", rs.nodes_per_sqrt_eps);
    a.get("accuracy", rs.accuracy);
    with_child(a, "residual_ladder",
               [&](const json& l, const std::string& w) { rs.residual_ladder = read_ladder(l, w); });
    with_child(a, "singsupp_ladder",
               [&](const json& l, const std::string& w) { rs.singsupp_ladder = read_ladder(l, w); });
    std::vector<std::array<double, 2>> cells;
    if (a.has("cells")) {
      a.get("cells", cells);
      rs.cells.clear();
      for (const auto& c : cells) rs.cells.push_back({c[0], c[1]});
    } else {
      (void)a.child("cells");
    }
    a.get("tol", rs.tol);
    a.get("max_order", rs.max_order);
    a.finish();
  });

  with_child(r, "output", [&](const json& j, const std::string& where) {
    Reader o(j, where);
    o.get("save_nets", cfg.output.save_nets);
    o.get("net_spacing", cfg.output.net_spacing);
    o.finish();
  });
  r.finish();
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) config_error("cannot read config " + file.string());
  std::ostringstream s;
  s << in.rdbuf();
  return parse_run_config(s.str());
}

json to_json(const RunConfig& cfg) {
  json j;
  j["command"] = to_string(cfg.command);
  j["output_dir"] = cfg.output_dir.generic_string();
  j["seed"] = cfg.seed;
  j["mollifier"] = cfg.mollifier;
  j["data"] = {{"kind", to_string(cfg.data.kind)},
               {"a", cfg.data.a},
               {"b", cfg.data.b},
               {"amplitude", cfg.data.amplitude}};
  const SolveConfig& s = cfg.solve;
  j["solve"] = {{"T", s.T},
                {"margin", s.margin},
                {"f", std::string(to_string(s.f))},
                {"E_exponent", s.E_exponent},
                {"ladder", ladder_json(s.ladder)},
                {"h_rule", rule_json(s.h_rule)},
                {"picard",
                 {{"max_iters", s.picard.max_iters},
                  {"stop_distance", s.picard.stop_distance},
                  {"initial_iters", s.picard.initial_iters}}},
                {"trace_step", s.trace_step},
                {"n_max", s.n_max}};
  const AnalysisSettings& a = cfg.analysis;
  j["analysis"] = {{"cell_h", a.cell_h},       {"max_order", a.max_order},
                   {"tol", a.tol},             {"X", a.X},
                   {"diff_step", a.diff_step}, {"zero_rel", a.zero_rel},
                   {"dilation_cells", a.dilation_cells}, {"exterior_tol", a.exterior_tol}};
  const ContractionSettings& c = cfg.contraction;
  j["contraction"] = {{"pairs", c.pairs},
                      {"T", c.T},
                      {"a", c.a},
                      {"ladder", ladder_json(c.ladder)},
                      {"h_rule", rule_json(c.h_rule)},
                      {"bound_slack", c.bound_slack}};
  const ValuationSettings& v = cfg.valuation;
  j["valuation"] = {{"net", v.net},     {"b", v.b},
                    {"g", v.g},         {"ladder", ladder_json(v.ladder)},
                    {"levels", v.levels}, {"h", v.h}};
  const RadialSettings& r = cfg.radial;
  json cells = json::array();
  for (const Interval& iv : r.cells) cells.push_back({iv.lo, iv.hi});
  j["radial"] = {{"R", r.R},
                 {"nodes_per_sqrt_eps", r.nodes_per_sqrt_eps},
                 {"accuracy", r.accuracy},
                 {"residual_ladder", ladder_json(r.residual_ladder)},
                 {"singsupp_ladder", ladder_json(r.singsupp_ladder)},
                 {"cells", cells},
                 {"tol", r.tol},
                 {"max_order", r.max_order}};
  j["output"] = {{"save_nets", cfg.output.save_nets}, {"net_spacing", cfg.output.net_spacing}};
  return j;
}

std::string serialize(const RunConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

RunOutcome run(const RunConfig& cfg) {
  RunOutcome outcome;
  const fs::path out = cfg.output_dir;
  auto log_error = [&](int status, const Error& e) {
    outcome.status = status;
    outcome.message = e.what();
    json j = {{"status", status}, {"code", to_string(e.code())}, {"message", e.what()}};
    outcome.summary = j;
    std::error_code ec;
    fs::create_directories(out, ec);
    if (!ec) write_json(out / "error.json", j);
  };
  try {
    cfg.validate();
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) config_error("cannot create output directory " + out.string());
  } catch (const Error& e) {
    log_error(2, e);
    return outcome;
  }

  // the artifact copy leaves out output_dir so identical runs into different directories match
  json recorded = to_json(cfg);
  recorded.erase("output_dir");
  const std::string canonical = recorded.dump(2) + "\n";
  std::map<std::string, fs::file_time_type> before;
  for (const auto& e : fs::recursive_directory_iterator(out))
    if (e.is_regular_file()) before[e.path().generic_string()] = e.last_write_time();
  try {
    {
      std::ofstream f(out / "config.json", std::ios::binary);
      f << canonical;
    }
    json summary;
    const Command c = cfg.command;
    const bool all = c == Command::all;
    if (all || c == Command::solve) summary["solve"] = run_solve(cfg, out);
    if (all || c == Command::valuation) summary["valuation"] = run_valuation(cfg, out);
    if (all || c == Command::singsupp) summary["singsupp"] = run_singsupp(cfg, out);
    if (all || c == Command::contraction) summary["contraction"] = run_contraction(cfg, out);
    if (all || c == Command::example3d) summary["example3d"] = run_example3d(cfg, out);
    outcome.summary = summary;
    write_json(out / "summary.json", summary);
  } catch (const Error& e) {
    log_error(e.code() == ErrorCode::ConfigError ? 2 : 3, e);
    return outcome;
  }

  outcome.manifest.command = to_string(cfg.command);
  outcome.manifest.seed = cfg.seed;
  outcome.manifest.config_sha256 = sha256_hex(canonical);
  outcome.manifest.scan(out);
  // files left over from earlier runs are not part of this manifest
  std::erase_if(outcome.manifest.files, [&](const ManifestEntry& f) {
    const fs::path p = out / f.path;
    const auto it = before.find(p.generic_string());
    return it != before.end() && it->second == fs::last_write_time(p);
  });
  outcome.manifest.write(out);
  return outcome;
}

}  // namespace cgw
