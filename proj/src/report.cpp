#include "cgwave/report.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cgwave/errors.hpp"
#include "cgwave/net_io.hpp"

namespace cgw {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  require(bool(out), ErrorCode::IoError, "cannot write " + file.string());
  return out;
}

std::string slope_text(double s) {
  return std::isinf(s) ? std::string(s > 0 ? "inf" : "-inf") : format_double(s);
}

std::string hex(const unsigned char* p, unsigned n) {
  static const char digits[] = "0123456789abcdef";
  std::string s;
  for (unsigned i = 0; i < n; ++i) {
    s += digits[p[i] >> 4];
    s += digits[p[i] & 15];
  }
  return s;
}

std::string fmt(double v, int prec = 3) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  require(EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) == 1,
          ErrorCode::IoError, "sha256 failed");
  return hex(md, len);
}

std::string sha256_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  require(bool(in), ErrorCode::IoError, "cannot read " + file.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), std::streamsize(buf.size()));
    EVP_DigestUpdate(ctx, buf.data(), std::size_t(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  return hex(md, len);
}

void write_trace_csv(const fs::path& file, const EpsilonLadder& ladder,
                     const std::vector<TraceRow>& trace) {
  auto out = open_out(file);
  out << "iter,epsilon,sup_change,d_tilde\n";
  for (const TraceRow& row : trace) {
    require(row.sup_change.size() == ladder.size(), ErrorCode::LadderMismatch,
            "trace row does not match the ladder");
    for (std::size_t k = 0; k < ladder.size(); ++k)
      out << row.iter << "," << format_double(ladder[k]) << "," << format_double(row.sup_change[k])
          << "," << format_double(row.d_tilde) << "\n";
  }
}

void write_runs_csv(const fs::path& file, const std::vector<EpsilonRun>& runs) {
  auto out = open_out(file);
  out << "epsilon,iterations,converged_at,final_change\n";
  for (const EpsilonRun& r : runs)
    out << format_double(r.eps) << "," << r.iterations << "," << r.converged_at << ","
        << format_double(r.change.empty() ? 0.0 : r.change.back()) << "\n";
}

void write_map_csv(const fs::path& file, const SingularityMap& map) {
  auto out = open_out(file);
  out << "t_lo,t_hi,x_lo,x_hi,verdict,worst_slope,witness_order\n";
  for (const CellVerdict& c : map.cells)
    out << format_double(c.cell.t.lo) << "," << format_double(c.cell.t.hi) << ","
        << format_double(c.cell.x.lo) << "," << format_double(c.cell.x.hi) << ","
        << (c.singular ? "singular" : "regular") << "," << slope_text(c.worst_slope) << ","
        << c.witness_order << "\n";
}

void write_radial_csv(const fs::path& file, const RadialResidual& r) {
  auto out = open_out(file);
  out << "epsilon,sup_residual,h_r\n";
  for (std::size_t k = 0; k < r.eps.size(); ++k)
    out << format_double(r.eps[k]) << "," << format_double(r.sup_residual[k]) << ","
        << format_double(r.h_r[k]) << "\n";
}

void write_radial_verdicts_csv(const fs::path& file, const std::vector<RadialVerdict>& v) {
  auto out = open_out(file);
  out << "r_lo,r_hi,verdict,worst_slope,witness_order\n";
  for (const RadialVerdict& c : v)
    out << format_double(c.cell.lo) << "," << format_double(c.cell.hi) << ","
        << (c.singular ? "singular" : "regular") << "," << slope_text(c.worst_slope) << ","
        << c.witness_order << "\n";
}

void write_contraction_csv(const fs::path& file, const ContractionReport& r) {
  auto out = open_out(file);
  out << "pair,exponent,d_pair,d_image,ratio\n";
  for (std::size_t p = 0; p < r.ratios.size(); ++p)
    out << p << "," << format_double(r.exponents[p]) << "," << format_double(r.d_pairs[p]) << ","
        << format_double(r.d_images[p]) << "," << format_double(r.ratios[p]) << "\n";
}

void write_json(const fs::path& file, const nlohmann::json& j) {
  auto out = open_out(file);
  out << j.dump(2) << "\n";
}

std::string slope_color(double slope) {
  double s = std::isnan(slope) ? 0.0 : std::clamp(slope / 2.0, -1.0, 1.0);
  // white at 0, (178, 24, 43) at -1, (33, 102, 172) at +1
  const int lo[3] = {178, 24, 43}, hi[3] = {33, 102, 172};
  const int* end = s < 0 ? lo : hi;
  const double w = std::abs(s);
  char buf[8];
  int c[3];
  for (int i = 0; i < 3; ++i) c[i] = int(std::lround(255.0 + (end[i] - 255.0) * w));
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
  return buf;
}

std::string svg_heatmap(const SingularityMap& map, const LightConeGeometry& geom) {
  require(!map.cells.empty(), ErrorCode::InvalidArgument, "empty singularity map");
  const ClassificationSpec& s = map.spec;
  const double px = 480.0 / (2 * s.X);  // pixels per unit
  const double pad = 20.0;
  const double W = 2 * s.X * px + 2 * pad;
  const double H = s.T * px + 2 * pad;
  auto sx = [&](double x) { return pad + (x + s.X) * px; };
  auto sy = [&](double t) { return pad + (s.T - t) * px; };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(W, 0) << "\" height=\""
    << fmt(H, 0) << "\" viewBox=\"0 0 " << fmt(W, 0) << " " << fmt(H, 0) << "\">\n";
  o << "<rect x=\"0\" y=\"0\" width=\"" << fmt(W, 0) << "\" height=\"" << fmt(H, 0)
    << "\" fill=\"#f0f0f0\"/>\n";
  o << "<g id=\"cells\" stroke=\"#cccccc\" stroke-width=\"0.3\">\n";
  for (const CellVerdict& c : map.cells) {
    o << "<rect x=\"" << fmt(sx(c.cell.x.lo)) << "\" y=\"" << fmt(sy(c.cell.t.hi))
      << "\" width=\"" << fmt(c.cell.x.length() * px) << "\" height=\""
      << fmt(c.cell.t.length() * px) << "\" fill=\"" << slope_color(c.worst_slope) << "\"/>\n";
  }
  o << "</g>\n<g id=\"cone\" stroke=\"#000000\" stroke-width=\"1\" fill=\"none\">\n";
  for (double sign : {1.0, -1.0})
    o << "<line x1=\"" << fmt(sx(0)) << "\" y1=\"" << fmt(sy(0)) << "\" x2=\""
      << fmt(sx(sign * geom.T)) << "\" y2=\"" << fmt(sy(geom.T)) << "\"/>\n";
  if (geom.is_band()) {
    for (const Polygon& p : {geom.plus(), geom.minus()}) {
      o << "<polygon stroke-dasharray=\"4 3\" points=\"";
      for (std::size_t i = 0; i < p.size(); ++i)
        o << (i ? " " : "") << fmt(sx(p[i][1])) << "," << fmt(sy(p[i][0]));
      o << "\"/>\n";
    }
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

void emit_svg_heatmap(const fs::path& file, const SingularityMap& map,
                      const LightConeGeometry& geom) {
  auto out = open_out(file);
  out << svg_heatmap(map, geom);
}

bool svg_well_formed(const std::string& text, std::string* why) {
  auto bad = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  std::vector<std::string> stack;
  bool seen_root = false;
  std::size_t pos = 0;
  while ((pos = text.find('<', pos)) != std::string::npos) {
    const std::size_t end = text.find('>', pos);
    if (end == std::string::npos) return bad("unterminated tag");
    const std::string tag = text.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    if (tag.empty()) return bad("empty tag");
    if (tag[0] == '?' || tag[0] == '!') continue;
    if (tag[0] == '/') {
      const std::string name = tag.substr(1);
      if (stack.empty() || stack.back() != name) return bad("unbalanced </" + name + ">");
      stack.pop_back();
      continue;
    }
    const bool self_closing = tag.back() == '/';
    const std::string name = tag.substr(0, tag.find_first_of(" \t\n/"));
    if (stack.empty()) {
      if (seen_root) return bad("content after the root element");
      if (name != "svg") return bad("root element is not svg");
      seen_root = true;
      for (const char* attr : {"width=\"", "height=\""}) {
        const std::size_t a = tag.find(std::string(" ") + attr);
        if (a == std::string::npos) return bad(std::string("missing ") + attr);
        const std::size_t v = a + 1 + std::string(attr).size();
        char* stop = nullptr;
        const double d = std::strtod(tag.c_str() + v, &stop);
        if (stop == tag.c_str() + v || *stop != '"' || !(d > 0))
          return bad(std::string("non-numeric ") + attr);
      }
    }
    if (std::count(tag.begin(), tag.end(), '"') % 2) return bad("unbalanced quotes in <" + name);
    if (!self_closing) stack.push_back(name);
  }
  if (!seen_root) return bad("no svg element");
  if (!stack.empty()) return bad("unclosed <" + stack.back() + ">");
  return true;
}

void Manifest::scan(const fs::path& dir) {
  files.clear();
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), dir).generic_string();
    if (rel == "manifest.json") continue;
    files.push_back({rel, e.file_size(), sha256_file(e.path())});
  }
  std::sort(files.begin(), files.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
}

nlohmann::json Manifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["seed"] = seed;
  j["config_sha256"] = config_sha256;
  nlohmann::json list = nlohmann::json::array();
  for (const ManifestEntry& f : files)
    list.push_back({{"path", f.path}, {"bytes", f.bytes}, {"sha256", f.sha256}});
  j["files"] = list;
  return j;
}

void Manifest::write(const fs::path& dir) const { write_json(dir / "manifest.json", to_json()); }

}  // namespace cgw
