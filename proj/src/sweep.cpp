#include "cgwave/sweep.hpp"

#include <algorithm>
#include <cmath>

namespace cgw {

double nonlinearity_difference(NonlinearityId f, double a, double b, double d) {
  switch (f) {
    case NonlinearityId::zero: return 0.0;
    case NonlinearityId::square: return (a + b) * d;
    case NonlinearityId::cube: return d * (a * a + a * b + b * b);
    case NonlinearityId::sine: return 2.0 * std::cos(0.5 * (a + b)) * std::sin(0.5 * d);
    case NonlinearityId::rational: return d * (1.0 - a * b) / ((1.0 + a * a) * (1.0 + b * b));
  }
  return 0.0;
}

std::pair<Index, Index> support_range(const std::vector<double>& v) {
  Index lo = 1, hi = 0;
  for (Index j = 0; j < Index(v.size()); ++j)
    if (v[std::size_t(j)] != 0.0) {
      if (lo > hi) lo = j;
      hi = j;
    }
  return {lo, hi};
}

void balanced_integral(const double* q, double* out, Index lo, Index hi, Index center, double h) {
  const double hh = 0.5 * h;
  const Index left_end = std::min(center, hi);
  if (lo <= left_end) {
    out[lo] = 0.0;
    for (Index j = lo + 1; j <= left_end; ++j) out[j] = out[j - 1] + hh * (q[j - 1] + q[j]);
  }
  const Index right_start = std::max(center + 1, lo);
  if (right_start <= hi) {
    double acc = 0.0;
    out[hi] = 0.0;
    for (Index j = hi - 1; j >= right_start; --j) {
      acc += hh * (q[j] + q[j + 1]);
      out[j] = -acc;
    }
  }
}

namespace {

struct Rows {
  std::vector<double> data;
  Index nx;
  Rows(std::size_t count, Index n) : data(count * std::size_t(n), 0.0), nx(n) {}
  double* operator[](std::size_t k) { return data.data() + k * std::size_t(nx); }
};

double shifted(const std::vector<double>& v, Index j) {
  return j >= 0 && j < Index(v.size()) ? v[std::size_t(j)] : 0.0;
}

}  // namespace

SweepResult run_sweep(const SweepProblem& p, const std::vector<SweepObserver*>& observers) {
  require(p.V0 && p.W0, ErrorCode::InvalidArgument, "sweep needs data");
  require(p.iterations >= 1, ErrorCode::InvalidArgument, "sweep needs at least one iteration");
  const auto& L = p.lattice;
  const Index nx = L.nx;
  const auto& V0 = *p.V0;
  const auto& W0 = *p.W0;
  const auto& sV0 = p.start_V0 ? *p.start_V0 : V0;
  const auto& sW0 = p.start_W0 ? *p.start_W0 : W0;
  require(Index(V0.size()) == nx && Index(W0.size()) == nx && Index(sV0.size()) == nx &&
              Index(sW0.size()) == nx,
          ErrorCode::LatticeMismatch, "data length differs from the lattice width");

  std::vector<double> dV0(static_cast<std::size_t>(nx)), dW0(static_cast<std::size_t>(nx));
  for (std::size_t j = 0; j < std::size_t(nx); ++j) {
    dV0[j] = V0[j] - sV0[j];
    dW0[j] = W0[j] - sW0[j];
  }

  Index smin = nx, smax = -1;
  for (const auto* v : {&V0, &W0, &sV0, &sW0}) {
    auto [a, b] = support_range(*v);
    if (a <= b) {
      smin = std::min(smin, a);
      smax = std::max(smax, b);
    }
  }
  const Index last = L.nt - 1;
  if (smin <= smax)
    require(smin - last - 2 >= 0 && smax + last + 2 <= nx - 1, ErrorCode::LatticeMismatch,
            "the support cone of the data leaves the lattice before t = T");

  const std::size_t K = p.iterations;
  const double hh = 0.5 * L.h;
  const double c = p.coupling;
  const Index center = L.center();

  Rows bp_prev(K + 1, nx), bp_cur(K + 1, nx), bm_prev(K + 1, nx), bm_cur(K + 1, nx);
  Rows dg_prev(K, nx), dg_cur(K, nx);  // dg^k for k = 0..K-1
  Rows dv(K + 1, nx), dw(K + 1, nx);
  Rows u_lv(2, nx);  // U^{k-1}, U^k rotating
  std::vector<double> v(std::size_t(nx), 0.0), w(std::size_t(nx), 0.0), u(std::size_t(nx), 0.0);
  std::vector<double> q(std::size_t(nx), 0.0), du(std::size_t(nx), 0.0);

  SweepResult result;
  result.iterations = K;
  result.change.assign(K, 0.0);

  SliceView view;
  view.V = v.data();
  view.W = w.data();
  view.U = u.data();
  view.dV.resize(K);
  view.dW.resize(K);
  for (std::size_t k = 1; k <= K; ++k) {
    view.dV[k - 1] = dv[k];
    view.dW[k - 1] = dw[k];
  }

  const bool empty = smin > smax;
  for (Index i = 0; i < L.nt; ++i) {
    const Index lo = empty ? 0 : smin - i - 1;
    const Index hi = empty ? -1 : smax + i + 1;

    double* u_prev = u_lv[0];
    for (Index j = lo; j <= hi; ++j) q[j] = 0.5 * (shifted(sW0, j + i) - shifted(sV0, j - i));
    balanced_integral(q.data(), u_prev, lo, hi, center, L.h);
    if (p.f != NonlinearityId::zero)
      for (Index j = lo; j <= hi; ++j) dg_cur[0][j] = c * apply_nonlinearity(p.f, u_prev[j]);

    for (std::size_t k = 1; k <= K; ++k) {
      double* bp = bp_cur[k];
      double* bm = bm_cur[k];
      const double* gc = dg_cur[k - 1];
      if (i == 0) {
        for (Index j = lo; j <= hi; ++j) bp[j] = bm[j] = 0.0;
      } else {
        const double* pp = bp_prev[k];
        const double* pm = bm_prev[k];
        const double* gp = dg_prev[k - 1];
        // j ± 1 stay inside [0, nx) because the active range never touches the edges
        for (Index j = lo; j <= hi; ++j) {
          bp[j] = pp[j - 1] + hh * (gp[j - 1] + gc[j]);
          bm[j] = pm[j + 1] + hh * (gp[j + 1] + gc[j]);
        }
      }
      double* rv = dv[k];
      double* rw = dw[k];
      double sup = 0.0;
      for (Index j = lo; j <= hi; ++j) {
        rv[j] = bp[j] + (k == 1 ? shifted(dV0, j - i) : 0.0);
        rw[j] = bm[j] + (k == 1 ? shifted(dW0, j + i) : 0.0);
        sup = std::max({sup, std::abs(rv[j]), std::abs(rw[j])});
        q[j] = 0.5 * (rw[j] - rv[j]);
      }
      result.change[k - 1] = std::max(result.change[k - 1], sup);
      balanced_integral(q.data(), du.data(), lo, hi, center, L.h);
      double* u_next = u_lv[k % 2];
      double* u_old = u_lv[(k - 1) % 2];
      for (Index j = lo; j <= hi; ++j) u_next[j] = u_old[j] + du[j];
      if (k < K && p.f != NonlinearityId::zero) {
        double* g = dg_cur[k];
        for (Index j = lo; j <= hi; ++j)
          g[j] = c * nonlinearity_difference(p.f, u_next[j], u_old[j], du[j]);
      }
    }

    const double* u_final = u_lv[K % 2];
    for (Index j = lo; j <= hi; ++j) {
      double sv = shifted(V0, j - i), sw = shifted(W0, j + i);
      for (std::size_t k = 1; k <= K; ++k) {
        sv += bp_cur[k][j];
        sw += bm_cur[k][j];
      }
      v[std::size_t(j)] = sv;
      w[std::size_t(j)] = sw;
      u[std::size_t(j)] = u_final[j];
    }

    view.i = i;
    view.lo = lo;
    view.hi = hi;
    for (auto* obs : observers) obs->on_slice(view);

    std::swap(bp_prev.data, bp_cur.data);
    std::swap(bm_prev.data, bm_cur.data);
    std::swap(dg_prev.data, dg_cur.data);
  }
  return result;
}

}  // namespace cgw
