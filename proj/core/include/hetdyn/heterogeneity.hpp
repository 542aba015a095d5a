#pragma once

#include "hetdyn/grid_kernels.hpp"

#include <cstdint>
#include <string_view>
#include <utility>

namespace hetdyn {

/// lo + (hi - lo) / (1 + exp(-(g - threshold) / steepness))
struct SigmoidResponse {
  double lo;
  double hi;
  double threshold;
  double steepness;

  double operator()(double g) const noexcept;
  void validate() const;

  bool operator==(const SigmoidResponse&) const = default;
};

double sigmoid_eval(const SigmoidResponse& s, double g);

/// Sapling recruitment response omega(G): 0.9 -> 0.4 around G = 0.4.
SigmoidResponse default_omega() noexcept;
/// Forest-tree fire mortality phi(G): 0.1 -> 0.9 around G = 0.4.
SigmoidResponse default_phi() noexcept;

struct LinearGradient {
  double intercept = 0.0;
  double slope = 0.0;

  double operator()(double x) const noexcept { return intercept + slope * x; }
};

double linear_eval(const LinearGradient& g, double x);

/// Piecewise-linear ramp on [0, 1]: flat 0, slope P_s through (0.5, 0.5),
/// flat 1. P_s = 1 is the identity.
struct SlopeProfile {
  double p_s = 1.0;

  explicit SlopeProfile(double p);
  double operator()(double x) const noexcept;
  /// Width of each flat plateau, (1 - 1/P_s) / 2.
  double plateau_width() const noexcept { return 0.5 * (1.0 - 1.0 / p_s); }
};

double slope_profile_eval(const SlopeProfile& p, double x);

/// Uniform draw in [-1, 1) from a stateless counter-based generator.
double counter_uniform(std::uint64_t seed, std::uint64_t counter) noexcept;

struct NoisyGradient {
  LinearGradient base;
  double amplitude = 0.0;
  std::uint64_t seed = 0;
};

/// Base gradient at each node plus independent uniform noise in
/// [-amplitude, amplitude]; identical inputs give identical output.
Field noisy_eval(const NoisyGradient& g, const Grid1D& grid);

enum class GradientShape { Linear, Slope, Power };

std::string_view to_string(GradientShape s) noexcept;
GradientShape gradient_shape_from_string(std::string_view s);

/// A spatial parameter profile c + s * shape(x) on a unit-length domain
/// [0, 1], optionally perturbed by seeded noise. `shape_param` is P_s for
/// Slope and the exponent for Power (a monotone nonlinear profile with the
/// same endpoints as the linear one).
struct SpatialGradient {
  double intercept = 0.0;
  double slope = 0.0;
  GradientShape shape = GradientShape::Linear;
  double shape_param = 1.0;
  double noise_amplitude = 0.0;
  std::uint64_t noise_seed = 0;

  /// Noise-free value at x.
  double operator()(double x) const;
  Field sample(const Grid1D& grid) const;
  void validate() const;

  bool operator==(const SpatialGradient&) const = default;

  static SpatialGradient linear(double c, double s) {
    return SpatialGradient{c, s, GradientShape::Linear, 1.0, 0.0, 0};
  }
  static SpatialGradient constant(double c) { return linear(c, 0.0); }
};

using MorphogenPair = std::pair<double, double>;  // (rho_E, rho_N)

/// P1 for x <= r_lo, P2 for x >= r_hi, linear in between. The default path
/// spends about half of its length in the Turing band at default parameters.
struct MorphogenPath {
  MorphogenPair p1{0.35, 0.55};
  MorphogenPair p2{0.55, 0.35};
  double r_lo = 8.0;
  double r_hi = 32.0;

  MorphogenPair operator()(double x) const noexcept;
  void validate() const;

  bool operator==(const MorphogenPath&) const = default;

  /// Region of width `width` centred on the middle of `grid`.
  static MorphogenPath centred(MorphogenPair p1, MorphogenPair p2,
                               const Grid1D& grid, double width);
};

MorphogenPair morphogen_eval(const MorphogenPath& m, double x);

}  // namespace hetdyn
