#include "cgwave/initial_data.hpp"

#include <cmath>

namespace cgw {

namespace {

double bump(double s) {
  const double q = 1.0 - s * s;
  return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

constexpr std::size_t smooth_quadrature_stride = 8;

double psi(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }

double smoothstep(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double a = psi(s), b = psi(1.0 - s);
  return a / (a + b);
}

double singular_profile(const DataSpec& spec, double y) {
  switch (spec.kind) {
    case DataKind::kink: return std::abs(y);
    case DataKind::smoothed_heaviside_derivative: return y > 0 ? 1.0 : (y < 0 ? -1.0 : 0.0);
    case DataKind::band_kink: return std::max(std::abs(y) - spec.b, 0.0);
  }
  return 0.0;
}

}  // namespace

double Mollifier::operator()(double s) const { return normalization * bump(s); }

Mollifier make_mollifier(const std::string& name) {
  require(name == "bump", ErrorCode::InvalidArgument, "unknown mollifier '" + name + "'");
  Mollifier m;
  m.name = name;
  m.ds = 2.0 / double(mollifier_resolution - 1);
  m.samples.resize(mollifier_resolution);
  double integral = 0.0;
  for (std::size_t i = 0; i < mollifier_resolution; ++i) {
    const double s = -1.0 + double(i) * m.ds;
    m.samples[i] = bump(s);
    const double w = (i == 0 || i + 1 == mollifier_resolution) ? 0.5 : 1.0;
    integral += w * m.samples[i] * m.ds;
  }
  m.normalization = 1.0 / integral;
  for (double& v : m.samples) v *= m.normalization;
  return m;
}

double smooth_cutoff(double y, double a) {
  const double r = std::abs(y);
  if (r <= 0.5 * a) return 1.0;
  if (r >= a) return 0.0;
  return 1.0 - smoothstep((r - 0.5 * a) / (0.5 * a));
}

DataKind parse_data_kind(const std::string& name) {
  if (name == "kink") return DataKind::kink;
  if (name == "smoothed_heaviside_derivative") return DataKind::smoothed_heaviside_derivative;
  if (name == "band_kink") return DataKind::band_kink;
  fail(ErrorCode::BadSpec, "unknown data kind '" + name + "'");
}

std::string to_string(DataKind kind) {
  switch (kind) {
    case DataKind::kink: return "kink";
    case DataKind::smoothed_heaviside_derivative: return "smoothed_heaviside_derivative";
    case DataKind::band_kink: return "band_kink";
  }
  return "kink";
}

void DataSpec::validate() const {
  require(a > 0 && std::isfinite(a), ErrorCode::BadSpec, "support radius a must be positive");
  require(std::isfinite(amplitude), ErrorCode::BadSpec, "amplitude must be finite");
  if (kind == DataKind::band_kink)
    require(b > 0 && b < a, ErrorCode::BadSpec, "band half-width needs 0 < b < a");
}

SampledData sample_initial_data(const DataSpec& spec, const Mollifier& moll, double eps,
                                double x0, double h, Index n) {
  spec.validate();
  SampledData out;
  out.u0.assign(std::size_t(n), 0.0);
  out.u1.assign(std::size_t(n), 0.0);
  auto& target = spec.kind == DataKind::smoothed_heaviside_derivative ? out.u1 : out.u0;
  const std::size_t M = moll.size();
  std::vector<double> kinks{0.0};
  if (spec.kind == DataKind::band_kink) kinks = {-spec.b, spec.b};
  for (Index j = 0; j < n; ++j) {
    const double x = x0 + double(j) * h;
    if (std::abs(x) >= spec.a + eps) continue;
    // trapezoid in s over the reference nodes (the end samples vanish). Windows free of kink
    // points have a smooth integrand, for which every 8th node already gives full accuracy.
    bool rough = false;
    for (double k : kinks) rough = rough || std::abs(x - k) <= eps;
    const std::size_t step = rough ? 1 : smooth_quadrature_stride;
    double acc = 0.0;
    for (std::size_t m = step; m + 1 < M; m += step) {
      const double y = x - eps * (-1.0 + double(m) * moll.ds);
      if (std::abs(y) >= spec.a) continue;
      acc += smooth_cutoff(y, spec.a) * singular_profile(spec, y) * moll.samples[m];
    }
    target[std::size_t(j)] = spec.amplitude * acc * moll.ds * double(step);
  }
  return out;
}

InitialData build_initial_data(const DataSpec& spec, const Mollifier& moll,
                               const EpsilonLadder& ladder, const SpacingRule& rule,
                               double half_width) {
  spec.validate();
  if (half_width <= 0) half_width = spec.a + 1.0;
  const Box box = Box::line(-half_width, half_width);
  std::vector<GridFunction> g0, g1;
  for (double eps : ladder.values()) {
    const double h = rule.h(eps);
    require(h <= eps / 2 + 1e-15, ErrorCode::GridTooCoarse,
            "initial data grids must resolve the mollifier scale (h <= eps/2)");
    const Index n = GridFunction::node_count(box.x.lo, box.x.hi, h);
    auto s = sample_initial_data(spec, moll, eps, box.x.lo, h, n);
    GridFunction::Array a0(1, n), a1(1, n);
    for (Index j = 0; j < n; ++j) {
      a0(0, j) = s.u0[std::size_t(j)];
      a1(0, j) = s.u1[std::size_t(j)];
    }
    g0.emplace_back(1, 0.0, 0.0, box.x.lo, h, std::move(a0));
    g1.emplace_back(1, 0.0, 0.0, box.x.lo, h, std::move(a1));
  }
  return {Net(ladder, std::move(g0), box), Net(ladder, std::move(g1), box)};
}

CharacteristicData derive_characteristic_data(const Net& U0, const Net& U1) {
  const Net dU0 = diff(U0, Direction::x, 1);
  const Net U1i = restrict_to(U1, dU0.logical_domain());
  return {U1i - dU0, U1i + dU0};
}

LatticeData lattice_characteristic_data(const DataSpec& spec, const Mollifier& moll, double eps,
                                        const DiagonalLattice& L) {
  auto s = sample_initial_data(spec, moll, eps, L.x_lo - L.h, L.h, L.nx + 2);
  LatticeData d;
  d.V0.resize(std::size_t(L.nx));
  d.W0.resize(std::size_t(L.nx));
  d.U0.assign(s.u0.begin() + 1, s.u0.end() - 1);
  d.U1.assign(s.u1.begin() + 1, s.u1.end() - 1);
  for (Index j = 0; j < L.nx; ++j) {
    const auto k = std::size_t(j + 1);
    const double du0 = (s.u0[k + 1] - s.u0[k - 1]) / (2.0 * L.h);
    d.V0[std::size_t(j)] = s.u1[k] - du0;
    d.W0[std::size_t(j)] = s.u1[k] + du0;
  }
  return d;
}

}  // namespace cgw
