#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cgwave/parallel.hpp"
#include "cgwave/report.hpp"
#include "cgwave/run.hpp"

using namespace cgw;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cgwave_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Small and quick: every command finishes in a few seconds.
const char* quick_config = R"({
  "command": "all",
  "seed": 3,
  "data": {"kind": "kink", "a": 1.0},
  "solve": {"T": 0.5, "margin": 0.5, "f": "square",
            "ladder": {"k_min": 5, "k_max": 8}, "h_rule": {"kind": "proportional", "value": 4}},
  "analysis": {"X": 1.75},
  "contraction": {"pairs": 2, "ladder": {"k_min": 2, "k_max": 5}},
  "valuation": {"ladder": {"k_min": 4, "k_max": 8}},
  "radial": {"residual_ladder": {"k_min": 2, "k_max": 5}, "singsupp_ladder": {"k_min": 2, "k_max": 10}}
})";

SingularityMap uniform_map(double slope) {
  SingularityMap m;
  m.spec.T = 1.0;
  m.spec.X = 2.0;
  m.geometry = LightConeGeometry::lines(1.0);
  for (Index r = 0; r < m.spec.rows(); ++r)
    for (Index c = 0; c < m.spec.cols(); ++c) {
      CellVerdict v;
      v.cell = m.spec.cell(r, c);
      v.worst_slope = slope;
      m.cells.push_back(v);
    }
  return m;
}

std::vector<std::string> attribute_values(const std::string& svg, const std::string& group,
                                          const std::string& attr) {
  const std::size_t g0 = svg.find("<g id=\"" + group + "\"");
  const std::size_t g1 = svg.find("</g>", g0);
  std::vector<std::string> out;
  std::size_t p = g0;
  const std::string key = " " + attr + "=\"";
  while ((p = svg.find(key, p)) != std::string::npos && p < g1) {
    p += key.size();
    out.push_back(svg.substr(p, svg.find('"', p) - p));
  }
  return out;
}

int run_cli(const std::string& args, std::string* output = nullptr) {
  const char* cli = std::getenv("CGWAVE_CLI");
  REQUIRE(cli != nullptr);
  const std::string cmd = std::string(cli) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string text;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) text.append(buf, n);
  const int status = pclose(pipe);
  if (output) *output = text;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("sha256 digests") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const fs::path dir = scratch("sha");
  std::string big(200000, 'x');
  for (std::size_t i = 0; i < big.size(); ++i) big[i] = char('a' + i % 26);
  std::ofstream(dir / "f.bin", std::ios::binary) << big;
  CHECK(sha256_file(dir / "f.bin") == sha256_hex(big));
}

TEST_CASE("csv writers") {
  const fs::path dir = scratch("csv");
  SingularityMap m = uniform_map(0.0);
  m.cells[0].singular = true;
  m.cells[0].worst_slope = -1.25;
  m.cells[0].witness_order = 2;
  m.cells[1].worst_slope = ValuationEstimate::infinity;
  write_map_csv(dir / "map.csv", m);
  std::istringstream map(slurp(dir / "map.csv"));
  std::string line;
  std::getline(map, line);
  CHECK(line == "t_lo,t_hi,x_lo,x_hi,verdict,worst_slope,witness_order");
  std::getline(map, line);
  CHECK(line == "0.0625,0.125,-1.9375,-1.875,singular,-1.25,2");
  std::getline(map, line);
  CHECK(line.find(",regular,inf,-1") != std::string::npos);
  std::size_t rows = 2;
  while (std::getline(map, line)) ++rows;
  CHECK(rows == m.cells.size());

  RadialResidual r;
  r.eps = {0.25, 0.0625};
  r.h_r = {0.5 / 64, 0.25 / 64};
  r.sup_residual = {1e-8, 2e-8};
  write_radial_csv(dir / "radial.csv", r);
  CHECK(slurp(dir / "radial.csv") ==
        "epsilon,sup_residual,h_r\n0.25,1e-08,0.0078125\n0.0625,2e-08,0.00390625\n");

  const EpsilonLadder ladder = EpsilonLadder::dyadic(1, 4);
  TraceRow t;
  t.iter = 1;
  t.sup_change = {1, 2, 3, 4};
  t.d_tilde = 0.5;
  write_trace_csv(dir / "trace.csv", ladder, {t});
  CHECK(slurp(dir / "trace.csv") ==
        "iter,epsilon,sup_change,d_tilde\n1,0.5,1,0.5\n1,0.25,2,0.5\n1,0.125,3,0.5\n"
        "1,0.0625,4,0.5\n");
  t.sup_change.pop_back();
  CHECK_THROWS_AS(write_trace_csv(dir / "bad.csv", ladder, {t}), Error);
}

TEST_CASE("diverging slope colors") {
  CHECK(slope_color(0.0) == "#ffffff");
  CHECK(slope_color(-2.0) == "#b2182b");
  CHECK(slope_color(-7.0) == "#b2182b");
  CHECK(slope_color(2.0) == "#2166ac");
  CHECK(slope_color(ValuationEstimate::infinity) == "#2166ac");
  CHECK(slope_color(-1.0) == "#d98c95");
}

TEST_CASE("svg heatmap") {
  const SingularityMap m = uniform_map(ValuationEstimate::infinity);
  const std::string svg = svg_heatmap(m, m.geometry);
  std::string why;
  CHECK_MESSAGE(svg_well_formed(svg, &why), why);
  CHECK(svg == svg_heatmap(m, m.geometry));
  const auto fills = attribute_values(svg, "cells", "fill");
  REQUIRE(fills.size() == m.cells.size());
  for (const auto& f : fills) CHECK(f == fills.front());
  CHECK(attribute_values(svg, "cone", "x1").size() == 2);

  // overlay endpoints sit on (0,0) and (T,±T)
  const auto x2 = attribute_values(svg, "cone", "x2");
  CHECK(std::stod(x2[0]) == doctest::Approx(20 + 3 * 120.0));
  CHECK(std::stod(x2[1]) == doctest::Approx(20 + 1 * 120.0));

  SingularityMap band = m;
  band.geometry = LightConeGeometry::bands(1.0, 0.25);
  const std::string bsvg = svg_heatmap(band, band.geometry);
  CHECK(svg_well_formed(bsvg));
  CHECK(bsvg.find("<polygon") != std::string::npos);

  const fs::path dir = scratch("svg");
  emit_svg_heatmap(dir / "m.svg", m, m.geometry);
  CHECK(slurp(dir / "m.svg") == svg);
  CHECK_THROWS_AS(svg_heatmap(SingularityMap{}, m.geometry), Error);

  CHECK_FALSE(svg_well_formed("<svg width=\"1\" height=\"1\"><g></svg>"));
  CHECK_FALSE(svg_well_formed("<svg width=\"1\"></svg>"));
  CHECK_FALSE(svg_well_formed("<svg width=\"a\" height=\"1\"></svg>"));
  CHECK_FALSE(svg_well_formed("<html width=\"1\" height=\"1\"></html>"));
  CHECK_FALSE(svg_well_formed("<svg width=\"1\" height=\"1\"><rect x=\"1/></svg>"));
  CHECK_FALSE(svg_well_formed("<svg width=\"1\" height=\"1\"></svg><svg width=\"1\" height=\"1\"/>"));
  CHECK(svg_well_formed("<svg width=\"1\" height=\"2\"><rect x=\"0\"/></svg>"));
}

TEST_CASE("heatmap of a linear run colors cells along the cone only") {
  SolveConfig cfg;
  cfg.T = 1.0;
  cfg.a = 1.0;
  cfg.margin = 0.5;
  cfg.f = NonlinearityId::zero;
  cfg.ladder = EpsilonLadder::dyadic(5, 9);
  cfg.h_rule = SpacingRule::proportional(4);
  DataSpec data;
  const SolveInput in = prepare_input(cfg, data, make_mollifier());
  ClassificationSpec spec;
  spec.X = 2.0;
  const LightConeGeometry geom = LightConeGeometry::lines(1.0);
  const SingsuppRun r = singsupp_streaming(cfg, in, spec, geom);
  const std::string svg = svg_heatmap(r.map, geom);
  CHECK(svg_well_formed(svg));
  const auto fills = attribute_values(svg, "cells", "fill");
  REQUIRE(fills.size() == r.map.cells.size());
  std::size_t red = 0;
  for (std::size_t c = 0; c < fills.size(); ++c) {
    const int red_c = std::stoi(fills[c].substr(1, 2), nullptr, 16);
    const int green_c = std::stoi(fills[c].substr(3, 2), nullptr, 16);
    const bool reddish = red_c > green_c;
    const bool strong = r.map.cells[c].worst_slope < -spec.tol;
    if (strong) {
      ++red;
      CHECK(reddish);
      CHECK(r.map.cells[c].distance <= 2 * spec.cell_h);
    }
  }
  CHECK(red > 0);
  CHECK(red == r.map.singular_count());
}

TEST_CASE("manifest lists files with digests") {
  const fs::path dir = scratch("manifest");
  fs::create_directories(dir / "sub");
  std::ofstream(dir / "b.csv") << "x\n";
  std::ofstream(dir / "a.json") << "{}\n";
  std::ofstream(dir / "sub" / "c.bin") << "abc";
  std::ofstream(dir / "manifest.json") << "old";
  Manifest m;
  m.command = "solve";
  m.seed = 9;
  m.scan(dir);
  REQUIRE(m.files.size() == 3);
  CHECK(m.files[0].path == "a.json");
  CHECK(m.files[1].path == "b.csv");
  CHECK(m.files[2].path == "sub/c.bin");
  CHECK(m.files[2].bytes == 3);
  CHECK(m.files[2].sha256 == sha256_hex("abc"));
  m.write(dir);
  const auto j = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(j["seed"] == 9);
  CHECK(j["files"].size() == 3);
}

TEST_CASE("run config parsing and canonical form") {
  const RunConfig def = parse_run_config("{}");
  CHECK(def.command == Command::all);
  CHECK(def.solve.T == 1.0);
  CHECK(def.analysis.cell_h == 0.0625);

  const RunConfig q = parse_run_config(quick_config);
  CHECK(q.solve.T == 0.5);
  CHECK(q.solve.ladder.size() == 4);
  CHECK(q.solve.h_rule.h(1.0) == 0.25);
  CHECK(q.seed == 3);
  const std::string canon = serialize(q);
  CHECK(serialize(parse_run_config(canon)) == canon);
  CHECK(serialize(parse_run_config(serialize(def))) == serialize(def));

  auto code_of = [](const std::string& text) {
    try {
      (void)parse_run_config(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code_of("{not json") == ErrorCode::ConfigError);
  CHECK(code_of(R"({"solve": {"T": 1, "typo": 2}})") == ErrorCode::ConfigError);
  CHECK(code_of(R"({"solve": {"T": "one"}})") == ErrorCode::ConfigError);
  CHECK(code_of(R"({"solve": {"f": "tanh"}})") == ErrorCode::ConfigError);
  CHECK(code_of(R"({"solve": {"T": -1}})") == ErrorCode::ConfigError);
  CHECK(code_of(R"({"solve": {"ladder": {"epsilons": [0.5, 0.25]}}})") == ErrorCode::ConfigError);
  CHECK(code_of(R"({"solve": {"h_rule": {"kind": "proportional", "value": 1}}})") ==
        ErrorCode::ConfigError);
  CHECK(code_of(R"({"command": "plot"})") == ErrorCode::ConfigError);
  CHECK(code_of(R"({"data": {"kind": "band_kink", "b": 2}})") == ErrorCode::ConfigError);
  CHECK(code_of(R"({"radial": {"accuracy": 3}})") == ErrorCode::ConfigError);
  CHECK(code_of(R"({"radial": {"cells": [[0.5, 0.2]]}})") == ErrorCode::ConfigError);
  CHECK(code_of("[]") == ErrorCode::ConfigError);
}

TEST_CASE("valuation command on a synthetic net") {
  RunConfig cfg = parse_run_config(R"({"command": "valuation",
      "valuation": {"b": 2, "g": "sin", "ladder": {"k_min": 4, "k_max": 12}}})");
  cfg.output_dir = scratch("valuation");
  const RunOutcome r = run(cfg);
  REQUIRE(r.status == 0);
  for (const auto& s : r.summary["valuation"]["slopes"])
    CHECK(s.get<double>() == doctest::Approx(2.0).epsilon(0.025));
  CHECK(fs::exists(cfg.output_dir / "valuation.csv"));
  CHECK(fs::exists(cfg.output_dir / "manifest.json"));
}

TEST_CASE("identical runs give identical artifacts") {
  RunConfig cfg = parse_run_config(quick_config);
  cfg.output_dir = scratch("det_a");
  const RunOutcome a = run(cfg);
  REQUIRE(a.status == 0);
  cfg.output_dir = scratch("det_b");
  const RunOutcome b = run(cfg);
  REQUIRE(b.status == 0);
  REQUIRE(a.manifest.files.size() == b.manifest.files.size());
  for (std::size_t i = 0; i < a.manifest.files.size(); ++i) {
    CHECK(a.manifest.files[i].path == b.manifest.files[i].path);
    CHECK(a.manifest.files[i].sha256 == b.manifest.files[i].sha256);
  }
  std::set<std::string> names;
  for (const auto& f : a.manifest.files) names.insert(f.path);
  for (const char* expected :
       {"trace.csv", "map.csv", "map.svg", "contraction.csv", "radial.csv", "nets/U/manifest.json",
        "summary.json", "config.json"})
    CHECK_MESSAGE(names.count(expected), expected);

  // a different seed changes only the contraction artifacts
  cfg.seed = 4;
  cfg.command = Command::contraction;
  cfg.output_dir = scratch("det_c");
  const RunOutcome c = run(cfg);
  REQUIRE(c.status == 0);
  CHECK(slurp(cfg.output_dir / "contraction.csv") !=
        slurp(fs::temp_directory_path() / "cgwave_test_det_b" / "contraction.csv"));
}

TEST_CASE("run reports numerical failures and config errors") {
  RunConfig cfg = parse_run_config(quick_config);
  cfg.command = Command::solve;
  cfg.solve.picard.max_iters = 1;
  cfg.output_dir = scratch("fail");
  const RunOutcome r = run(cfg);
  CHECK(r.status == 3);
  const auto err = nlohmann::json::parse(slurp(cfg.output_dir / "error.json"));
  CHECK(err["code"] == "NoConvergence");
  CHECK_FALSE(fs::exists(cfg.output_dir / "manifest.json"));

  cfg = parse_run_config(quick_config);
  cfg.solve.T = -1;
  cfg.output_dir = scratch("bad");
  CHECK(run(cfg).status == 2);
}

TEST_CASE("thread count override") {
  setenv("CGWAVE_THREADS", "3", 1);
  CHECK(thread_count() == 3);
  setenv("CGWAVE_THREADS", "1", 1);
  CHECK(thread_count() == 1);
  unsetenv("CGWAVE_THREADS");
  CHECK(thread_count() >= 1);
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("cli");
  std::ofstream(dir / "quick.json") << quick_config;
  std::ofstream(dir / "broken.json") << "{\"solve\": ";
  std::ofstream(dir / "diverge.json")
      << R"({"solve": {"T": 0.5, "margin": 0.5, "ladder": {"k_min": 5, "k_max": 8},
             "h_rule": {"kind": "proportional", "value": 4}, "picard": {"max_iters": 1}}})";
  std::string out;
  CHECK(run_cli("example3d --config " + (dir / "quick.json").string() + " --out " +
                    (dir / "o1").string(),
                &out) == 0);
  CHECK(fs::exists(dir / "o1" / "radial.csv"));
  CHECK(fs::exists(dir / "o1" / "manifest.json"));
  CHECK(run_cli("example3d --config " + (dir / "broken.json").string() + " --out " +
                (dir / "o2").string()) == 2);
  CHECK(run_cli("example3d --config " + (dir / "missing.json").string() + " --out " +
                (dir / "o2").string()) == 2);
  CHECK(run_cli("plot --config " + (dir / "quick.json").string() + " --out " +
                (dir / "o2").string()) == 2);
  CHECK(run_cli("solve --out " + (dir / "o2").string()) == 2);
  CHECK(run_cli("solve --config " + (dir / "diverge.json").string() + " --out " +
                (dir / "o3").string()) == 3);
  CHECK(fs::exists(dir / "o3" / "error.json"));
  CHECK(run_cli("contraction --config " + (dir / "quick.json").string() + " --out " +
                (dir / "o4").string() + " --seed 11") == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "o4" / "contraction.json"));
  CHECK(j["seed"] == 11);
  CHECK(run_cli("example3d --config " + (dir / "quick.json").string() + " --out " +
                    (dir / "o5").string(),
                &out) == 0);
  setenv("CGWAVE_THREADS", "2", 1);
  CHECK(run_cli("example3d --config " + (dir / "quick.json").string() + " --out " +
                    (dir / "o6").string(),
                &out) == 0);
  unsetenv("CGWAVE_THREADS");
  CHECK(out.find("with 2 thread(s)") != std::string::npos);
  CHECK(slurp(dir / "o5" / "radial.csv") == slurp(dir / "o6" / "radial.csv"));
}
