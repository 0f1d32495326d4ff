#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "cgwave/errors.hpp"

namespace cgw {

// zero is the linear case f = 0; the others are the catalog entries with f(0) = 0.
enum class NonlinearityId { zero, square, cube, sine, rational };

inline NonlinearityId parse_nonlinearity(std::string_view name) {
  if (name == "zero") return NonlinearityId::zero;
  if (name == "square") return NonlinearityId::square;
  if (name == "cube") return NonlinearityId::cube;
  if (name == "sine") return NonlinearityId::sine;
  if (name == "rational") return NonlinearityId::rational;
  fail(ErrorCode::UnknownNonlinearity, "unknown nonlinearity '" + std::string(name) + "'");
}

inline std::string_view to_string(NonlinearityId f) {
  switch (f) {
    case NonlinearityId::zero: return "zero";
    case NonlinearityId::square: return "square";
    case NonlinearityId::cube: return "cube";
    case NonlinearityId::sine: return "sine";
    case NonlinearityId::rational: return "rational";
  }
  return "zero";
}

template <typename Scalar>
inline Scalar apply_nonlinearity(NonlinearityId f, Scalar u) {
  using std::sin;
  switch (f) {
    case NonlinearityId::zero: return Scalar(0);
    case NonlinearityId::square: return u * u;
    case NonlinearityId::cube: return u * u * u;
    case NonlinearityId::sine: return sin(u);
    case NonlinearityId::rational: return u / (Scalar(1) + u * u);
  }
  return Scalar(0);
}

}  // namespace cgw
