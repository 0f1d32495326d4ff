#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cgwave/lattice.hpp"
#include "cgwave/net.hpp"

namespace cgw {

struct Mollifier {
  std::string name;
  double normalization = 1.0;   // c in φ(s) = c·exp(-1/(1-s²))
  std::vector<double> samples;  // φ at s = -1 + m·ds, m = 0..2^13
  double ds = 0.0;

  double operator()(double s) const;
  std::size_t size() const { return samples.size(); }
};

constexpr std::size_t mollifier_resolution = (1u << 13) + 1;

Mollifier make_mollifier(const std::string& name = "bump");

/// C^∞ cutoff: 1 on |y| ≤ a/2, 0 on |y| ≥ a.
double smooth_cutoff(double y, double a);

enum class DataKind { kink, smoothed_heaviside_derivative, band_kink };

DataKind parse_data_kind(const std::string& name);
std::string to_string(DataKind kind);

struct DataSpec {
  DataKind kind = DataKind::kink;
  double a = 1.0;
  double b = 0.0;
  double amplitude = 1.0;

  void validate() const;
};

/// Values of u0^eps and u1^eps at nodes x0 + j·h, j = 0..n-1; exact zeros for |x| ≥ a + eps.
struct SampledData {
  std::vector<double> u0, u1;
};
SampledData sample_initial_data(const DataSpec& spec, const Mollifier& moll, double eps,
                                double x0, double h, Index n);

struct InitialData {
  Net U0, U1;
};

/// One grid per epsilon on [-half_width, half_width]; half_width defaults to a + 1.
InitialData build_initial_data(const DataSpec& spec, const Mollifier& moll,
                               const EpsilonLadder& ladder,
                               const SpacingRule& rule = SpacingRule::proportional(16),
                               double half_width = 0.0);

struct CharacteristicData {
  Net V0, W0;
};

/// V0 = U1 - ∂x U0, W0 = U1 + ∂x U0 (central differences; the domain loses one node per side).
CharacteristicData derive_characteristic_data(const Net& U0, const Net& U1);

/// V0, W0 on every x node of the lattice, using one extra zero-extended node per side.
struct LatticeData {
  std::vector<double> V0, W0, U0, U1;
};
LatticeData lattice_characteristic_data(const DataSpec& spec, const Mollifier& moll, double eps,
                                        const DiagonalLattice& lattice);

}  // namespace cgw
