#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "cgwave/errors.hpp"

namespace cgw {

/// Finite geometric sampling of the regularization parameter, largest epsilon first.
class EpsilonLadder {
 public:
  EpsilonLadder() = default;

  explicit EpsilonLadder(std::vector<double> epsilons) : epsilons_(std::move(epsilons)) {
    validate();
  }

  /// 2^-k_min, 2^-(k_min+1), ..., 2^-k_max.
  static EpsilonLadder dyadic(int k_min, int k_max) {
    require(k_max >= k_min, ErrorCode::InvalidArgument, "dyadic ladder needs k_max >= k_min");
    std::vector<double> eps;
    for (int k = k_min; k <= k_max; ++k) eps.push_back(std::ldexp(1.0, -k));
    return EpsilonLadder(std::move(eps));
  }

  static EpsilonLadder geometric(double eps_max, double ratio, std::size_t count) {
    std::vector<double> eps;
    double e = eps_max;
    for (std::size_t k = 0; k < count; ++k, e *= ratio) eps.push_back(e);
    return EpsilonLadder(std::move(eps));
  }

  std::size_t size() const { return epsilons_.size(); }
  double operator[](std::size_t k) const { return epsilons_[k]; }
  const std::vector<double>& values() const { return epsilons_; }
  double ratio() const { return epsilons_[1] / epsilons_[0]; }

  bool operator==(const EpsilonLadder& other) const { return epsilons_ == other.epsilons_; }

 private:
  void validate() const {
    require(epsilons_.size() >= 4, ErrorCode::InvalidArgument,
            "epsilon ladder needs at least 4 entries");
    const double q = epsilons_[1] / epsilons_[0];
    require(q > 0.0 && q < 1.0, ErrorCode::InvalidArgument, "ladder ratio must lie in (0,1)");
    for (std::size_t k = 0; k < epsilons_.size(); ++k) {
      const double e = epsilons_[k];
      require(e > 0.0 && e <= 1.0 && std::isfinite(e), ErrorCode::InvalidArgument,
              "ladder entries must lie in (0,1]");
      if (k > 0) {
        const double expected = epsilons_[k - 1] * q;
        require(std::abs(e - expected) <= 1e-12 * expected, ErrorCode::InvalidArgument,
                "ladder must be geometric");
      }
    }
  }

  std::vector<double> epsilons_;
};

/// Grid spacing as a function of epsilon: either h = eps / nodes_per_epsilon or a fixed h.
struct SpacingRule {
  enum class Kind { proportional, fixed };

  Kind kind = Kind::proportional;
  double value = 16.0;  // nodes per epsilon, or the fixed spacing

  static SpacingRule proportional(double nodes_per_epsilon) {
    return {Kind::proportional, nodes_per_epsilon};
  }
  static SpacingRule fixed(double h) { return {Kind::fixed, h}; }

  double h(double eps) const { return kind == Kind::proportional ? eps / value : value; }

  std::string describe() const {
    return kind == Kind::proportional ? "eps/" + std::to_string(value)
                                      : "fixed:" + std::to_string(value);
  }

  bool operator==(const SpacingRule&) const = default;
};

}  // namespace cgw
