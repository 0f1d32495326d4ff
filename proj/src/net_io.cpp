#include "cgwave/net_io.hpp"

#include <bit>
#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace cgw {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json box_json(const Box& b) {
  json j;
  j["dim"] = b.dim;
  j["x"] = {b.x.lo, b.x.hi};
  if (b.dim == 2) j["t"] = {b.t.lo, b.t.hi};
  return j;
}

Box box_from(const json& j) {
  Box b;
  b.dim = j.at("dim").get<int>();
  b.x = {j.at("x")[0].get<double>(), j.at("x")[1].get<double>()};
  if (b.dim == 2) b.t = {j.at("t")[0].get<double>(), j.at("t")[1].get<double>()};
  return b;
}

void write_le(std::ofstream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
}

double read_le(std::ifstream& in) {
  std::uint64_t bits = 0;
  in.read(reinterpret_cast<char*>(&bits), sizeof bits);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  return std::bit_cast<double>(bits);
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<fs::path> save_net(const Net& net, const fs::path& dir,
                               const std::optional<SpacingRule>& rule) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorCode::IoError, "cannot create " + dir.string());
  json m;
  m["ladder"] = net.ladder().values();
  m["domain"] = box_json(net.logical_domain());
  if (rule) {
    m["spacing_rule"] = {{"kind", rule->kind == SpacingRule::Kind::proportional ? "proportional"
                                                                                 : "fixed"},
                         {"value", rule->value}};
  }
  std::vector<fs::path> written{dir / "manifest.json"};
  json files = json::array();
  for (std::size_t k = 0; k < net.size(); ++k) {
    const auto& g = net[k];
    char name[32];
    std::snprintf(name, sizeof name, "eps_%02zu.f64", k);
    json e;
    e["file"] = name;
    e["epsilon"] = net.epsilon(k);
    e["dim"] = g.dim();
    e["nt"] = g.nt();
    e["nx"] = g.nx();
    e["t0"] = g.t0();
    e["ht"] = g.ht();
    e["x0"] = g.x0();
    e["hx"] = g.hx();
    files.push_back(e);
    std::ofstream out(dir / name, std::ios::binary);
    require(bool(out), ErrorCode::IoError, "cannot write " + (dir / name).string());
    for (Index i = 0; i < g.nt(); ++i)
      for (Index j = 0; j < g.nx(); ++j) write_le(out, g(i, j));
    written.push_back(dir / name);
  }
  m["grids"] = files;
  std::ofstream out(dir / "manifest.json");
  require(bool(out), ErrorCode::IoError, "cannot write manifest");
  out << m.dump(2) << "\n";
  return written;
}

Net load_net(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  require(bool(in), ErrorCode::IoError, "missing manifest in " + dir.string());
  json m;
  try {
    in >> m;
  } catch (const json::exception& e) {
    fail(ErrorCode::IoError, std::string("bad manifest: ") + e.what());
  }
  EpsilonLadder ladder(m.at("ladder").get<std::vector<double>>());
  std::vector<GridFunction> grids;
  for (const auto& e : m.at("grids")) {
    const Index nt = e.at("nt").get<Index>();
    const Index nx = e.at("nx").get<Index>();
    GridFunction::Array v(nt, nx);
    std::ifstream bin(dir / e.at("file").get<std::string>(), std::ios::binary);
    require(bool(bin), ErrorCode::IoError, "missing grid file");
    for (Index i = 0; i < nt; ++i)
      for (Index j = 0; j < nx; ++j) v(i, j) = read_le(bin);
    require(bool(bin), ErrorCode::IoError, "truncated grid file");
    grids.emplace_back(e.at("dim").get<int>(), e.at("t0").get<double>(),
                       e.at("ht").get<double>(), e.at("x0").get<double>(),
                       e.at("hx").get<double>(), std::move(v));
  }
  return Net(std::move(ladder), std::move(grids), box_from(m.at("domain")));
}

void write_sup_csv(const fs::path& file, const EpsilonLadder& ladder,
                   const std::vector<double>& values) {
  require(values.size() == ladder.size(), ErrorCode::LadderMismatch, "value count mismatch");
  std::ofstream out(file);
  require(bool(out), ErrorCode::IoError, "cannot write " + file.string());
  out << "epsilon,value\n";
  for (std::size_t k = 0; k < values.size(); ++k)
    out << format_double(ladder[k]) << "," << format_double(values[k]) << "\n";
}

}  // namespace cgw
