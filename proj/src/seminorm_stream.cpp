#include "cgwave/seminorm_stream.hpp"

#include <algorithm>
#include <cmath>

namespace cgw {

DirectionalAccumulator::DirectionalAccumulator(const DiagonalLattice& lattice,
                                               const RegionLadder& regions, int stride,
                                               bool stride_rows_only)
    : lat_(lattice), regions_(regions), stride_(stride) {
  require(regions.flavor == Flavor::directional, ErrorCode::InvalidArgument,
          "directional accumulator needs a directional region ladder");
  require(stride >= 1, ErrorCode::InvalidArgument, "stride must be positive");
  regions_.validate();
  const std::size_t levels = regions_.size();
  max_alpha_ = std::min<int>(max_stencil_order, static_cast<int>(levels) - 1);
  row_step_ = stride_rows_only ? stride_ : 1;
  ring_step_ = stride_rows_only ? 1 : stride_;
  const Index reach = Index(central_stencil(std::max(max_alpha_, 1)).radius) * ring_step_;
  capacity_ = 2 * reach + 1;
  ring_.assign(std::size_t(capacity_ * lat_.nx), 0.0);
  plain_.assign(levels, 0.0);
  plus_.assign(levels, std::vector<double>(max_stencil_order, 0.0));
  minus_.assign(levels, std::vector<double>(max_stencil_order, 0.0));
  scratch_.resize(std::size_t(lat_.nx));
}

std::vector<DirectionalAccumulator::Span> DirectionalAccumulator::spans_at(const BoxUnion& u,
                                                                           double t) const {
  std::vector<Span> out;
  for (const Box& b : u) {
    if (!b.t.contains(t, 1e-12)) continue;
    const double tol = 1e-9;
    Index lo = static_cast<Index>(std::ceil((b.x.lo - lat_.x_lo) / lat_.h - tol));
    Index hi = static_cast<Index>(std::floor((b.x.hi - lat_.x_lo) / lat_.h + tol));
    lo = std::max<Index>(lo, 0);
    hi = std::min<Index>(hi, lat_.nx - 1);
    if (lo <= hi) out.push_back({lo, hi});
  }
  return out;
}

void DirectionalAccumulator::push_row(const double* src) {
  require(next_row_ < lat_.nt, ErrorCode::InvalidArgument, "too many rows pushed");
  const Index i = next_row_++;
  const double t = lat_.t(i);
  for (std::size_t n = 0; n < regions_.size(); ++n)
    for (const Span& s : spans_at(regions_.regions[n], t))
      for (Index j = s.lo; j <= s.hi; ++j) plain_[n] = std::max(plain_[n], std::abs(src[j]));
  if (i % row_step_) return;
  const Index r = stored_++;
  std::copy(src, src + lat_.nx, ring_.begin() + (r % capacity_) * lat_.nx);
  for (int alpha = 1; alpha <= max_alpha_; ++alpha) {
    const Index reach = Index(central_stencil(alpha).radius) * ring_step_;
    const Index c = r - reach;
    if (c >= reach) process_center(c, alpha);
  }
}

void DirectionalAccumulator::process_center(Index c, int alpha) {
  const Stencil& st = central_stencil(alpha);
  const Index s = stride_;
  const Index reach = Index(st.radius) * s;
  const double t = lat_.t(c * row_step_);
  const double scale = 1.0 / std::pow(std::sqrt(2.0) * lat_.h * double(s), alpha);
  for (int sign : {+1, -1}) {
    auto& sups = sign > 0 ? plus_ : minus_;
    const auto& regs = sign > 0 ? regions_.plus_regions : regions_.minus_regions;
    std::vector<std::vector<Span>> spans(regions_.size());
    bool any = false;
    for (std::size_t n = std::size_t(alpha); n < regions_.size(); ++n) {
      for (Span sp : spans_at(regs[n], t)) {
        sp.lo = std::max(sp.lo, reach);
        sp.hi = std::min(sp.hi, lat_.nx - 1 - reach);
        if (sp.lo <= sp.hi) {
          spans[n].push_back(sp);
          any = true;
        }
      }
    }
    if (!any) continue;
    Index lo = lat_.nx, hi = -1;
    for (const auto& v : spans)
      for (const Span& sp : v) {
        lo = std::min(lo, sp.lo);
        hi = std::max(hi, sp.hi);
      }
    std::fill(scratch_.begin() + lo, scratch_.begin() + hi + 1, 0.0);
    for (int p = -st.radius; p <= st.radius; ++p) {
      const double w = st.at(p);
      if (w == 0.0) continue;
      const double* r = row(c + p * ring_step_);
      const Index shift = sign * p * s;
      for (Index j = lo; j <= hi; ++j) scratch_[j] += w * r[j + shift];
    }
    for (std::size_t n = std::size_t(alpha); n < regions_.size(); ++n) {
      double m = sups[n][alpha - 1];
      for (const Span& sp : spans[n])
        for (Index j = sp.lo; j <= sp.hi; ++j) m = std::max(m, std::abs(scratch_[j]) * scale);
      sups[n][alpha - 1] = m;
    }
  }
}

std::vector<double> DirectionalAccumulator::values() const {
  std::vector<double> out(regions_.size(), 0.0);
  for (std::size_t n = 0; n < regions_.size(); ++n) {
    double sp = 0.0, sm = 0.0;
    for (int alpha = 1; alpha <= std::min<int>(int(n), max_alpha_); ++alpha) {
      sp = std::max(sp, plus_[n][alpha - 1]);
      sm = std::max(sm, minus_[n][alpha - 1]);
    }
    out[n] = sp + sm + plain_[n];
  }
  return out;
}

}  // namespace cgw
