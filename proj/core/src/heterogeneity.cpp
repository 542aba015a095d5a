#include "hetdyn/heterogeneity.hpp"

#include "hetdyn/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hetdyn {

double SigmoidResponse::operator()(double g) const noexcept {
  return lo + (hi - lo) / (1.0 + std::exp(-(g - threshold) / steepness));
}

void SigmoidResponse::validate() const {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw InvalidParameter("sigmoid threshold must lie in (0, 1)");
  }
  if (!(steepness > 0.0)) {
    throw InvalidParameter("sigmoid steepness must be positive");
  }
}

double sigmoid_eval(const SigmoidResponse& s, double g) { return s(g); }

SigmoidResponse default_omega() noexcept { return {0.9, 0.4, 0.4, 0.01}; }
SigmoidResponse default_phi() noexcept { return {0.1, 0.9, 0.4, 0.05}; }

double linear_eval(const LinearGradient& g, double x) { return g(x); }

SlopeProfile::SlopeProfile(double p) : p_s(p) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw InvalidParameter("slope parameter P_s must be >= 1");
  }
}

double SlopeProfile::operator()(double x) const noexcept {
  return std::clamp(0.5 + p_s * (x - 0.5), 0.0, 1.0);
}

double slope_profile_eval(const SlopeProfile& p, double x) { return p(x); }

double counter_uniform(std::uint64_t seed, std::uint64_t counter) noexcept {
  // splitmix64 finalizer over (seed, counter)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (counter + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  const double unit = static_cast<double>(z >> 11) * 0x1.0p-53;  // [0, 1)
  return 2.0 * unit - 1.0;
}

Field noisy_eval(const NoisyGradient& g, const Grid1D& grid) {
  if (!(g.amplitude >= 0.0)) {
    throw InvalidParameter("noise amplitude must be nonnegative");
  }
  Field out(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double v = g.base(grid.node(i));
    if (g.amplitude > 0.0) v += g.amplitude * counter_uniform(g.seed, i);
    out[static_cast<Eigen::Index>(i)] = v;
  }
  return out;
}

std::string_view to_string(GradientShape s) noexcept {
  switch (s) {
    case GradientShape::Linear:
      return "linear";
    case GradientShape::Slope:
      return "slope";
    case GradientShape::Power:
      return "power";
  }
  return "linear";
}

GradientShape gradient_shape_from_string(std::string_view s) {
  if (s == "linear") return GradientShape::Linear;
  if (s == "slope") return GradientShape::Slope;
  if (s == "power") return GradientShape::Power;
  throw InvalidParameter("unknown gradient shape '" + std::string(s) + "'");
}

double SpatialGradient::operator()(double x) const {
  switch (shape) {
    case GradientShape::Linear:
      return intercept + slope * x;
    case GradientShape::Slope:
      return intercept + slope * SlopeProfile(shape_param)(x);
    case GradientShape::Power:
      return intercept + slope * std::pow(std::clamp(x, 0.0, 1.0), shape_param);
  }
  return intercept + slope * x;
}

Field SpatialGradient::sample(const Grid1D& grid) const {
  validate();
  Field out(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double v = (*this)(grid.node(i));
    if (noise_amplitude > 0.0) v += noise_amplitude * counter_uniform(noise_seed, i);
    out[static_cast<Eigen::Index>(i)] = v;
  }
  return out;
}

void SpatialGradient::validate() const {
  if (!std::isfinite(intercept) || !std::isfinite(slope)) {
    throw InvalidParameter("gradient coefficients must be finite");
  }
  if (shape == GradientShape::Slope && !(shape_param >= 1.0)) {
    throw InvalidParameter("slope parameter P_s must be >= 1");
  }
  if (shape == GradientShape::Power && !(shape_param > 0.0)) {
    throw InvalidParameter("power-profile exponent must be positive");
  }
  if (!(noise_amplitude >= 0.0)) {
    throw InvalidParameter("noise amplitude must be nonnegative");
  }
}

MorphogenPair MorphogenPath::operator()(double x) const noexcept {
  if (x <= r_lo) return p1;
  if (x >= r_hi) return p2;
  const double t = (x - r_lo) / (r_hi - r_lo);
  return {p1.first + t * (p2.first - p1.first),
          p1.second + t * (p2.second - p1.second)};
}

void MorphogenPath::validate() const {
  if (!(r_lo < r_hi)) {
    throw InvalidParameter("morphogen region requires r_lo < r_hi");
  }
  if (p1.first < 0.0 || p1.second < 0.0 || p2.first < 0.0 || p2.second < 0.0) {
    throw InvalidParameter("morphogen levels must be nonnegative");
  }
}

MorphogenPath MorphogenPath::centred(MorphogenPair p1, MorphogenPair p2,
                                     const Grid1D& grid, double width) {
  const double mid = 0.5 * (grid.x_min() + grid.x_max());
  MorphogenPath m{p1, p2, mid - 0.5 * width, mid + 0.5 * width};
  if (m.r_lo < grid.x_min() || m.r_hi > grid.x_max()) {
    throw InvalidParameter("morphogen region wider than the domain");
  }
  m.validate();
  return m;
}

MorphogenPair morphogen_eval(const MorphogenPath& m, double x) { return m(x); }

}  // namespace hetdyn
