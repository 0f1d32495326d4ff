#include "cgwave/char_solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cgwave/parallel.hpp"
#include "cgwave/seminorm_stream.hpp"

namespace cgw {

void SolveConfig::validate() const {
  auto check = [](bool ok, const std::string& msg) { require(ok, ErrorCode::ConfigError, msg); };
  check(T > 0, "T must be positive");
  check(a > 0, "a must be positive");
  check(margin > 0, "margin must be positive");
  check(E_exponent >= 0, "E_exponent must be non-negative");
  check(picard.stop_distance > 0, "stop_distance must be positive");
  check(picard.max_iters >= 1 && picard.max_iters <= 40, "max_iters must lie in 1..40");
  check(picard.initial_iters >= 1, "initial_iters must be positive");
  check(trace_step > 0, "trace_step must be positive");
  check(n_max >= 1 && n_max <= std::size_t(max_stencil_order), "n_max must lie in 1..6");
  for (double e : ladder.values())
    require(h_rule.h(e) <= e / 2, ErrorCode::GridTooCoarse,
            "spacing rule gives h > eps/2 at eps = " + std::to_string(e));
}

DiagonalLattice SolveConfig::lattice(double eps) const {
  return DiagonalLattice::make(h_rule.h(eps), T, a + T + margin);
}

double SolveConfig::coupling(double eps) const { return std::pow(eps, E_exponent); }

SolveInput prepare_input(const SolveConfig& cfg, const DataSpec& spec, const Mollifier& moll) {
  cfg.validate();
  spec.validate();
  require(std::abs(spec.a - cfg.a) <= 1e-12, ErrorCode::ConfigError,
          "solver support radius differs from the data support radius");
  SolveInput in;
  in.ladder = cfg.ladder;
  in.lattices.resize(cfg.ladder.size());
  in.data.resize(cfg.ladder.size());
  parallel_for(cfg.ladder.size(), [&](std::size_t k) {
    in.lattices[k] = cfg.lattice(cfg.ladder[k]);
    in.data[k] = lattice_characteristic_data(spec, moll, cfg.ladder[k], in.lattices[k]);
  });
  return in;
}

GridFunction lattice_grid(const DiagonalLattice& L) {
  return GridFunction(2, 0.0, L.h, L.x_lo, L.h, GridFunction::Array::Zero(L.nt, L.nx));
}

Net lattice_net(const SolveInput& in) {
  std::vector<GridFunction> grids;
  for (const auto& L : in.lattices) grids.push_back(lattice_grid(L));
  return Net(in.ladder, std::move(grids), in.lattices.front().box());
}

namespace {

Net like(const Net& u, std::vector<GridFunction> grids) {
  return Net(u.ladder(), std::move(grids), u.logical_domain());
}

void check_lattice(const GridFunction& g) {
  require(g.is_diagonal_lattice() && std::abs(g.t0()) <= 1e-12, ErrorCode::LatticeMismatch,
          "operation needs a diagonal lattice starting at t = 0");
}

}  // namespace

Net line_integral(const Net& A, Sign sign) {
  const Index dj = sign == Sign::plus ? -1 : 1;
  std::vector<GridFunction> out;
  for (const auto& a : A.grids()) {
    check_lattice(a);
    GridFunction b = GridFunction::zeros_like(a);
    const double hh = 0.5 * a.ht();
    for (Index i = 1; i < a.nt(); ++i)
      for (Index j = 0; j < a.nx(); ++j) {
        const Index jp = j + dj;
        const bool in = jp >= 0 && jp < a.nx();
        b(i, j) = (in ? b(i - 1, jp) + hh * a(i - 1, jp) : 0.0) + hh * a(i, j);
      }
    out.push_back(std::move(b));
  }
  return like(A, std::move(out));
}

Net inner_integral(const CharacteristicPair& pair) {
  std::vector<GridFunction> out;
  for (std::size_t k = 0; k < pair.V.size(); ++k) {
    const auto& v = pair.V[k];
    const auto& w = pair.W[k];
    require(v.same_geometry(w), ErrorCode::LatticeMismatch, "V and W grids differ");
    GridFunction u = GridFunction::zeros_like(v);
    const double hh = 0.5 * v.hx();
    for (Index i = 0; i < v.nt(); ++i)
      for (Index j = 1; j < v.nx(); ++j)
        u(i, j) = u(i, j - 1) +
                  hh * 0.5 * ((w(i, j - 1) - v(i, j - 1)) + (w(i, j) - v(i, j)));
    out.push_back(std::move(u));
  }
  return like(pair.V, std::move(out));
}

Net reconstruct_U(const CharacteristicPair& pair) {
  std::vector<GridFunction> out;
  for (std::size_t k = 0; k < pair.V.size(); ++k) {
    const auto& v = pair.V[k];
    const auto& w = pair.W[k];
    require(v.same_geometry(w), ErrorCode::LatticeMismatch, "V and W grids differ");
    GridFunction u = GridFunction::zeros_like(v);
    const Index center = static_cast<Index>(std::lround(-v.x0() / v.hx()));
    std::vector<double> q(std::size_t(v.nx())), row(std::size_t(v.nx()));
    for (Index i = 0; i < v.nt(); ++i) {
      for (Index j = 0; j < v.nx(); ++j) q[std::size_t(j)] = 0.5 * (w(i, j) - v(i, j));
      balanced_integral(q.data(), row.data(), 0, v.nx() - 1, center, v.hx());
      for (Index j = 0; j < v.nx(); ++j) u(i, j) = row[std::size_t(j)];
    }
    out.push_back(std::move(u));
  }
  return like(pair.V, std::move(out));
}

CharacteristicPair free_evolution(const SolveInput& in, double a, double T) {
  Net V = lattice_net(in), W = lattice_net(in);
  for (std::size_t k = 0; k < in.ladder.size(); ++k) {
    const auto& d = in.data[k];
    auto& v = V[k];
    auto& w = W[k];
    const Index nx = v.nx();
    for (Index i = 0; i < v.nt(); ++i)
      for (Index j = 0; j < nx; ++j) {
        if (j - i >= 0) v(i, j) = d.V0[std::size_t(j - i)];
        if (j + i < nx) w(i, j) = d.W0[std::size_t(j + i)];
      }
  }
  return {std::move(V), std::move(W), a, T};
}

CharacteristicPair apply_F(const CharacteristicPair& pair, const SolveConfig& cfg,
                           const SolveInput& in) {
  Net g = reconstruct_U(pair);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double c = cfg.coupling(g.epsilon(k));
    g[k].values() = g[k].values().unaryExpr(
        [&](double u) { return c * apply_nonlinearity(cfg.f, u); });
  }
  CharacteristicPair out = free_evolution(in, pair.a, pair.T);
  Net bp = line_integral(g, Sign::plus);
  Net bm = line_integral(g, Sign::minus);
  for (std::size_t k = 0; k < g.size(); ++k) {
    out.V[k].values() += bp[k].values();
    out.W[k].values() += bm[k].values();
  }
  return out;
}

AuditObserver::AuditObserver(const DiagonalLattice& lattice, double a, double eps)
    : lat_(lattice), a_(a), eps_(eps), acc_(std::size_t(lattice.nx), 0.0) {}

void AuditObserver::on_slice(const SliceView& s) {
  if (s.lo > s.hi) return;
  const double t = lat_.t(s.i);
  const double edge = t + a_ + eps_;
  const double hh = 0.5 * lat_.h;
  double acc = 0.0;
  double q_prev = 0.0;
  for (Index j = s.lo; j <= s.hi; ++j) {
    const double q = 0.5 * (s.W[j] - s.V[j]);
    if (j > s.lo) acc += hh * (q_prev + q);
    q_prev = q;
    if (std::abs(lat_.x(j)) > edge + 1e-12) {
      membership = std::max(membership, std::abs(acc));
      exterior_U = std::max(exterior_U, std::abs(s.U[j]));
      exterior_V = std::max(exterior_V, std::abs(s.V[j]));
      exterior_W = std::max(exterior_W, std::abs(s.W[j]));
    }
  }
}

GridObserver::GridObserver(const DiagonalLattice& lattice, Index step) : step_(step) {
  require(step >= 1, ErrorCode::InvalidArgument, "decimation step must be positive");
  const Index nt = (lattice.nt - 1) / step + 1;
  const Index nx = (lattice.nx - 1) / step + 1;
  const double hs = lattice.h * double(step);
  V = GridFunction(2, 0.0, hs, lattice.x_lo, hs, GridFunction::Array::Zero(nt, nx));
  W = U = V;
}

void GridObserver::on_slice(const SliceView& s) {
  if (s.i % step_) return;
  const Index r = s.i / step_;
  for (Index c = 0; c < V.nx(); ++c) {
    const Index j = c * step_;
    V(r, c) = s.V[j];
    W(r, c) = s.W[j];
    U(r, c) = s.U[j];
  }
}

RegionLadder trace_regions(const SolveConfig& cfg) {
  return RegionLadder::directional(cfg.T, cfg.a + cfg.T + 0.25, cfg.n_max + 1);
}

namespace {

std::size_t first_converged(const std::vector<double>& change, double thr) {
  for (std::size_t k = 0; k < change.size(); ++k)
    if (change[k] <= thr) return k + 1;
  return 0;
}

constexpr double trace_memory_cap = 256.0 * 1024 * 1024;

class TraceObserver : public SweepObserver {
 public:
  TraceObserver(const DiagonalLattice& L, const RegionLadder& regions, int stride,
                std::size_t K) {
    // full rings hold 6·stride+1 lattice rows per accumulator; past the cap only every
    // stride-th row is kept
    const double ring_bytes = double(6 * stride + 1) * double(L.nx) * sizeof(double);
    const bool rows_only = ring_bytes * double(2 * K) > trace_memory_cap;
    for (std::size_t k = 0; k < K; ++k) {
      V.emplace_back(L, regions, stride, rows_only);
      W.emplace_back(L, regions, stride, rows_only);
    }
  }
  void on_slice(const SliceView& s) override {
    for (std::size_t k = 0; k < V.size(); ++k) {
      V[k].push_row(s.dV[k]);
      W[k].push_row(s.dW[k]);
    }
  }
  std::vector<DirectionalAccumulator> V, W;
};

UltraMetricReport distance_of(const EpsilonLadder& ladder,
                              const std::vector<std::vector<double>>& per_eps,
                              std::size_t n_max) {
  SeminormProfile p;
  p.flavor = Flavor::directional;
  p.ladder = ladder;
  p.values.assign(per_eps.front().size(), std::vector<double>(per_eps.size()));
  for (std::size_t e = 0; e < per_eps.size(); ++e)
    for (std::size_t n = 0; n < per_eps[e].size(); ++n) p.values[n][e] = per_eps[e][n];
  return distance_from_profile(p, n_max);
}

}  // namespace

EpsilonRun solve_epsilon(const SolveConfig& cfg, std::size_t k, const SolveInput& in,
                         const ObserverFactory& observers, std::size_t min_iterations) {
  const double eps = in.ladder[k];
  const double thr = cfg.threshold(eps);
  SweepProblem p;
  p.lattice = in.lattices[k];
  p.eps = eps;
  p.coupling = cfg.coupling(eps);
  p.f = cfg.f;
  p.V0 = &in.data[k].V0;
  p.W0 = &in.data[k].W0;
  std::size_t K = cfg.f == NonlinearityId::zero ? 1 : cfg.picard.initial_iters;
  K = std::min(cfg.picard.max_iters, std::max(K, min_iterations));
  for (;;) {
    p.iterations = K;
    const auto obs = observers ? observers(k, K) : std::vector<SweepObserver*>{};
    const SweepResult r = run_sweep(p, obs);
    const std::size_t at = first_converged(r.change, thr);
    if (at) return {eps, K, at, r.change};
    if (K >= cfg.picard.max_iters) {
      std::string msg = "no convergence at eps = " + std::to_string(eps) + " after " +
                        std::to_string(K) + " iterations; sup changes:";
      for (double c : r.change) msg += " " + std::to_string(c);
      fail(ErrorCode::NoConvergence, msg);
    }
    double rho = 0.5;
    if (K >= 2 && r.change[K - 2] > 0) rho = r.change[K - 1] / r.change[K - 2];
    std::size_t extra = 4;
    if (rho > 0 && rho < 1)
      extra = std::size_t(std::ceil(std::log(thr / r.change[K - 1]) / std::log(rho))) + 1;
    K = std::min(cfg.picard.max_iters, K + std::max<std::size_t>(extra, 1));
  }
}

StreamedSolve solve_streaming(const SolveConfig& cfg, const SolveInput& in,
                              const ObserverFactory& observers, bool with_trace) {
  const std::size_t n = in.ladder.size();
  StreamedSolve out;
  out.runs.resize(n);
  std::vector<std::unique_ptr<TraceObserver>> traces(n);
  const RegionLadder regions = with_trace ? trace_regions(cfg) : RegionLadder{};
  ObserverFactory wrapped = [&](std::size_t k, std::size_t K) {
    auto obs = observers ? observers(k, K) : std::vector<SweepObserver*>{};
    if (with_trace) {
      const auto& L = in.lattices[k];
      traces[k] = std::make_unique<TraceObserver>(L, regions, stride_for(cfg.trace_step, L.h), K);
      obs.push_back(traces[k].get());
    }
    return obs;
  };
  parallel_for(n, [&](std::size_t k) { out.runs[k] = solve_epsilon(cfg, k, in, wrapped); });
  if (!with_trace) return out;

  for (;;) {
    std::size_t Kmax = 0;
    for (const auto& r : out.runs) Kmax = std::max(Kmax, r.iterations);
    std::vector<std::size_t> redo;
    for (std::size_t k = 0; k < n; ++k)
      if (out.runs[k].iterations < Kmax) redo.push_back(k);
    if (redo.empty()) break;
    parallel_for(redo.size(), [&](std::size_t r) {
      out.runs[redo[r]] = solve_epsilon(cfg, redo[r], in, wrapped, Kmax);
    });
  }
  const std::size_t K = out.runs.front().iterations;
  for (std::size_t level = 0; level < K; ++level) {
    std::vector<std::vector<double>> mv, mw;
    TraceRow row;
    row.iter = level + 1;
    for (std::size_t k = 0; k < n; ++k) {
      mv.push_back(traces[k]->V[level].values());
      mw.push_back(traces[k]->W[level].values());
      row.sup_change.push_back(out.runs[k].change[level]);
    }
    row.V = distance_of(in.ladder, mv, cfg.n_max);
    row.W = distance_of(in.ladder, mw, cfg.n_max);
    row.d_tilde = row.V.distance + row.W.distance;
    out.trace.push_back(std::move(row));
  }
  return out;
}

PicardResult picard_solve(const SolveConfig& cfg, const SolveInput& in, bool with_trace) {
  const std::size_t n = in.ladder.size();
  std::vector<std::unique_ptr<GridObserver>> grids(n);
  ObserverFactory factory = [&](std::size_t k, std::size_t) {
    grids[k] = std::make_unique<GridObserver>(in.lattices[k]);
    return std::vector<SweepObserver*>{grids[k].get()};
  };
  StreamedSolve s = solve_streaming(cfg, in, factory, with_trace);
  std::vector<GridFunction> V, W, U;
  for (auto& g : grids) {
    V.push_back(std::move(g->V));
    W.push_back(std::move(g->W));
    U.push_back(std::move(g->U));
  }
  const Box box = in.lattices.front().box();
  PicardResult r;
  r.pair = {Net(in.ladder, std::move(V), box), Net(in.ladder, std::move(W), box), cfg.a, cfg.T};
  r.U = Net(in.ladder, std::move(U), box);
  r.runs = std::move(s.runs);
  r.trace = std::move(s.trace);
  return r;
}

PicardResult picard_global(const SolveConfig& cfg, const SolveInput& in, std::size_t iterations) {
  PicardResult r;
  r.pair = free_evolution(in, cfg.a, cfg.T);
  r.runs.resize(in.ladder.size());
  for (std::size_t k = 0; k < in.ladder.size(); ++k) {
    r.runs[k].eps = in.ladder[k];
    r.runs[k].iterations = iterations;
  }
  for (std::size_t it = 1; it <= iterations; ++it) {
    CharacteristicPair next = apply_F(r.pair, cfg, in);
    for (std::size_t k = 0; k < in.ladder.size(); ++k) {
      const double c = std::max((next.V[k].values() - r.pair.V[k].values()).abs().maxCoeff(),
                                (next.W[k].values() - r.pair.W[k].values()).abs().maxCoeff());
      r.runs[k].change.push_back(c);
      if (!r.runs[k].converged_at && c <= cfg.threshold(in.ladder[k])) r.runs[k].converged_at = it;
    }
    r.pair = std::move(next);
  }
  r.U = reconstruct_U(r.pair);
  return r;
}

CharacteristicPair marching_reference(const SolveConfig& cfg, const SolveInput& in) {
  Net V = lattice_net(in), W = lattice_net(in);
  for (std::size_t k = 0; k < in.ladder.size(); ++k) {
    const auto& L = in.lattices[k];
    const double c = cfg.coupling(in.ladder[k]);
    const Index nx = L.nx;
    const std::size_t N = std::size_t(nx);
    auto& v = V[k];
    auto& w = W[k];
    std::vector<double> q(N), u(N), g(N), gs(N), vs(N), ws(N);
    auto source = [&](const double* vr, const double* wr, std::vector<double>& out) {
      for (std::size_t j = 0; j < N; ++j) q[j] = 0.5 * (wr[j] - vr[j]);
      balanced_integral(q.data(), u.data(), 0, nx - 1, L.center(), L.h);
      for (std::size_t j = 0; j < N; ++j) out[j] = c * apply_nonlinearity(cfg.f, u[j]);
    };
    for (Index j = 0; j < nx; ++j) {
      v(0, j) = in.data[k].V0[std::size_t(j)];
      w(0, j) = in.data[k].W0[std::size_t(j)];
    }
    source(&v(0, 0), &w(0, 0), g);
    const double h = L.h;
    for (Index i = 1; i < L.nt; ++i) {
      for (Index j = 0; j < nx; ++j) {
        vs[std::size_t(j)] = j > 0 ? v(i - 1, j - 1) + h * g[std::size_t(j - 1)] : 0.0;
        ws[std::size_t(j)] = j + 1 < nx ? w(i - 1, j + 1) + h * g[std::size_t(j + 1)] : 0.0;
      }
      source(vs.data(), ws.data(), gs);
      for (Index j = 0; j < nx; ++j) {
        v(i, j) = (j > 0 ? v(i - 1, j - 1) + 0.5 * h * g[std::size_t(j - 1)] : 0.0) +
                  0.5 * h * gs[std::size_t(j)];
        w(i, j) = (j + 1 < nx ? w(i - 1, j + 1) + 0.5 * h * g[std::size_t(j + 1)] : 0.0) +
                  0.5 * h * gs[std::size_t(j)];
      }
      source(&v(i, 0), &w(i, 0), g);
    }
  }
  return {std::move(V), std::move(W), cfg.a, cfg.T};
}

MembershipReport membership_M(const CharacteristicPair& pair, double tol) {
  MembershipReport r;
  const Net I = inner_integral(pair);
  for (std::size_t k = 0; k < I.size(); ++k) {
    const auto& g = I[k];
    const double eps = I.epsilon(k);
    double s = 0.0;
    for (Index i = 0; i < g.nt(); ++i) {
      const double edge = g.t(i) + pair.a + eps + 1e-12;
      for (Index j = 0; j < g.nx(); ++j)
        if (std::abs(g.x(j)) > edge) s = std::max(s, std::abs(g(i, j)));
    }
    r.exterior_sups.push_back(s);
  }
  const double worst = *std::max_element(r.exterior_sups.begin(), r.exterior_sups.end());
  r.margin = worst > 0 ? tol / worst : ValuationEstimate::infinity;
  try {
    r.decay = fit_valuation(I.ladder(), r.exterior_sups);
    r.decay_known = true;
  } catch (const Error&) {
    r.decay_known = false;
  }
  r.member = worst <= tol || (r.decay_known && r.decay.slope >= 4.0);
  return r;
}

namespace {

struct Bump {
  double center, radius, amp0, amp1;
  double operator()(double x, double amp) const {
    const double s = (x - center) / radius;
    const double q = 1 - s * s;
    return q > 0 ? amp * std::exp(-1 / q) : 0.0;
  }
};

class PairAccumulators {
 public:
  PairAccumulators(const DiagonalLattice& L, const RegionLadder& regions, int stride)
      : dV(L, regions, stride), dW(L, regions, stride), fV(L, regions, stride),
        fW(L, regions, stride) {}
  DirectionalAccumulator dV, dW, fV, fW;
};

// Streams p1 - p2 and F(p1) - F(p2) for free-evolution pairs; the data term of F cancels.
void difference_sweep(const DiagonalLattice& L, double coupling, NonlinearityId f,
                      const std::vector<double>& v1, const std::vector<double>& w1,
                      const std::vector<double>& v2, const std::vector<double>& w2,
                      const std::vector<double>& dv, const std::vector<double>& dw,
                      PairAccumulators& acc) {
  const Index nx = L.nx;
  const std::size_t N = std::size_t(nx);
  std::vector<double> q(N), u1(N), u2(N), du(N), g(N), g_prev(N, 0.0);
  std::vector<double> bp(N, 0.0), bm(N, 0.0), bp_prev(N, 0.0), bm_prev(N, 0.0);
  std::vector<double> rv(N), rw(N);
  auto at = [](const std::vector<double>& a, Index j) {
    return j >= 0 && j < Index(a.size()) ? a[std::size_t(j)] : 0.0;
  };
  const double hh = 0.5 * L.h;
  for (Index i = 0; i < L.nt; ++i) {
    for (Index j = 0; j < nx; ++j) q[std::size_t(j)] = 0.5 * (at(w1, j + i) - at(v1, j - i));
    balanced_integral(q.data(), u1.data(), 0, nx - 1, L.center(), L.h);
    for (Index j = 0; j < nx; ++j) q[std::size_t(j)] = 0.5 * (at(w2, j + i) - at(v2, j - i));
    balanced_integral(q.data(), u2.data(), 0, nx - 1, L.center(), L.h);
    for (Index j = 0; j < nx; ++j) {
      rv[std::size_t(j)] = at(dv, j - i);
      rw[std::size_t(j)] = at(dw, j + i);
      q[std::size_t(j)] = 0.5 * (rw[std::size_t(j)] - rv[std::size_t(j)]);
    }
    balanced_integral(q.data(), du.data(), 0, nx - 1, L.center(), L.h);
    for (std::size_t j = 0; j < N; ++j)
      g[j] = coupling * nonlinearity_difference(f, u1[j], u2[j], du[j]);
    for (Index j = 0; j < nx; ++j) {
      const std::size_t s = std::size_t(j);
      if (i == 0) {
        bp[s] = bm[s] = 0.0;
        continue;
      }
      bp[s] = (j > 0 ? bp_prev[s - 1] + hh * g_prev[s - 1] : 0.0) + hh * g[s];
      bm[s] = (j + 1 < nx ? bm_prev[s + 1] + hh * g_prev[s + 1] : 0.0) + hh * g[s];
    }
    acc.dV.push_row(rv.data());
    acc.dW.push_row(rw.data());
    acc.fV.push_row(bp.data());
    acc.fW.push_row(bm.data());
    std::swap(bp, bp_prev);
    std::swap(bm, bm_prev);
    std::swap(g, g_prev);
  }
}

}  // namespace

ContractionReport contraction_test(const SolveConfig& cfg, const DataSpec& spec,
                                   const Mollifier& moll, std::size_t pairs, std::uint64_t seed) {
  const SolveInput in = prepare_input(cfg, spec, moll);
  const RegionLadder regions = trace_regions(cfg);
  const std::size_t n = in.ladder.size();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double exponents[] = {0.0, 0.5, 1.0};
  struct PairSpec {
    Bump b1, b2;
    double c;
  };
  auto draw = [&] {
    const double sgn = unit(rng) < 0.5 ? -1.0 : 1.0;
    Bump b;
    b.radius = cfg.a * (0.125 + 0.125 * unit(rng));
    b.center = (cfg.a - b.radius) * (2 * unit(rng) - 1) * 0.9;
    b.amp0 = sgn * (0.5 + 0.5 * unit(rng));
    b.amp1 = (2 * unit(rng) - 1);
    return b;
  };
  std::vector<PairSpec> specs;
  for (std::size_t p = 0; p < pairs; ++p) {
    PairSpec s;
    s.b1 = draw();
    s.b2 = draw();
    s.c = exponents[p % 3];
    specs.push_back(s);
  }

  ContractionReport rep;
  rep.pairs_tested = pairs;
  rep.bound = 2 * std::exp(-cfg.E_exponent);
  for (const PairSpec& s : specs) {
    std::vector<std::vector<double>> mdv(n), mdw(n), mfv(n), mfw(n);
    parallel_for(n, [&](std::size_t k) {
      const auto& L = in.lattices[k];
      const double eps = in.ladder[k];
      const double scale = std::pow(eps, s.c);
      const std::size_t N = std::size_t(L.nx);
      // perturbed characteristic data: V0 = U1 - U0', W0 = U1 + U0' with central differences
      auto perturb = [&](const Bump& b, std::vector<double>& dv, std::vector<double>& dw) {
        dv.assign(N, 0.0);
        dw.assign(N, 0.0);
        for (std::size_t j = 0; j < N; ++j) {
          const double x = L.x(Index(j));
          const double du0 =
              (b(x + L.h, b.amp0) - b(x - L.h, b.amp0)) / (2 * L.h) * scale;
          const double u1 = b(x, b.amp1) * scale;
          dv[j] = u1 - du0;
          dw[j] = u1 + du0;
        }
      };
      std::vector<double> dv1, dw1, dv2, dw2;
      perturb(s.b1, dv1, dw1);
      perturb(s.b2, dv2, dw2);
      const auto& d = in.data[k];
      std::vector<double> v1(N), w1(N), v2(N), w2(N), dv(N), dw(N);
      for (std::size_t j = 0; j < N; ++j) {
        v1[j] = d.V0[j] + dv1[j];
        w1[j] = d.W0[j] + dw1[j];
        v2[j] = d.V0[j] + dv2[j];
        w2[j] = d.W0[j] + dw2[j];
        dv[j] = dv1[j] - dv2[j];
        dw[j] = dw1[j] - dw2[j];
      }
      PairAccumulators acc(L, regions, stride_for(cfg.trace_step, L.h));
      difference_sweep(L, cfg.coupling(eps), cfg.f, v1, w1, v2, w2, dv, dw, acc);
      mdv[k] = acc.dV.values();
      mdw[k] = acc.dW.values();
      mfv[k] = acc.fV.values();
      mfw[k] = acc.fW.values();
    });
    const double dp = distance_of(in.ladder, mdv, cfg.n_max).distance +
                      distance_of(in.ladder, mdw, cfg.n_max).distance;
    const double df = distance_of(in.ladder, mfv, cfg.n_max).distance +
                      distance_of(in.ladder, mfw, cfg.n_max).distance;
    rep.d_pairs.push_back(dp);
    rep.d_images.push_back(df);
    rep.exponents.push_back(s.c);
    rep.ratios.push_back(dp > 0 ? df / dp : 0.0);
    rep.max_ratio = std::max(rep.max_ratio, rep.ratios.back());
  }
  return rep;
}

}  // namespace cgw
