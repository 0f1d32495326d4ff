#pragma once

#include <array>
#include <cmath>
#include <span>

#include "cgwave/errors.hpp"

namespace cgw {

/// Centered finite-difference weights on integer offsets -radius..radius.
struct Stencil {
  int order = 0;
  int radius = 0;
  std::array<double, 7> weights{};

  double at(int offset) const { return weights[static_cast<std::size_t>(offset + radius)]; }
  std::span<const double> span() const { return {weights.data(), std::size_t(2 * radius + 1)}; }
};

constexpr int max_stencil_order = 6;

/// Second-order accurate central differences of derivative order 0..6.
inline const Stencil& central_stencil(int order) {
  static const std::array<Stencil, 7> table = {{
      {0, 0, {1.0}},
      {1, 1, {-0.5, 0.0, 0.5}},
      {2, 1, {1.0, -2.0, 1.0}},
      {3, 2, {-0.5, 1.0, 0.0, -1.0, 0.5}},
      {4, 2, {1.0, -4.0, 6.0, -4.0, 1.0}},
      {5, 3, {-0.5, 2.0, -2.5, 0.0, 2.5, -2.0, 0.5}},
      {6, 3, {1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0}},
  }};
  require(order >= 0 && order <= max_stencil_order, ErrorCode::InvalidArgument,
          "derivative order must lie in 0..6");
  return table[static_cast<std::size_t>(order)];
}

/// Central differences for first and second derivatives at accuracy 2, 4 or 6.
inline const Stencil& high_order_stencil(int derivative, int accuracy) {
  static const std::array<Stencil, 3> first = {{
      {1, 1, {-0.5, 0.0, 0.5}},
      {1, 2, {1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12}},
      {1, 3, {-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0, 3.0 / 4, -3.0 / 20, 1.0 / 60}},
  }};
  static const std::array<Stencil, 3> second = {{
      {2, 1, {1.0, -2.0, 1.0}},
      {2, 2, {-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12}},
      {2, 3, {1.0 / 90, -3.0 / 20, 3.0 / 2, -49.0 / 18, 3.0 / 2, -3.0 / 20, 1.0 / 90}},
  }};
  require(accuracy == 2 || accuracy == 4 || accuracy == 6, ErrorCode::InvalidArgument,
          "accuracy must be 2, 4 or 6");
  require(derivative == 1 || derivative == 2, ErrorCode::InvalidArgument,
          "only first and second derivatives have high-order stencils");
  const auto idx = static_cast<std::size_t>(accuracy / 2 - 1);
  return derivative == 1 ? first[idx] : second[idx];
}

}  // namespace cgw
