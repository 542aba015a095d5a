#pragma once

#include "hetdyn/grid_kernels.hpp"

#include <cstddef>
#include <cstdint>
#include <utility>

namespace hetdyn {

/// A spatially discretized autonomous system du/dt = f(u) whose state is
/// `components()` fields over `grid()`, stacked component-major.
///
/// Some systems carry a pointwise algebraic constraint (the SL cover
/// fractions sum to one). Steady-state solvers then work on the first
/// `free_components()` fields and `expand()` recovers the rest.
class SpatialSystem {
 public:
  virtual ~SpatialSystem() = default;

  virtual const Grid1D& grid() const = 0;
  virtual std::size_t components() const = 0;
  virtual void rhs(const Field& state, Field& rate) const = 0;

  virtual std::size_t free_components() const { return components(); }
  virtual Field reduce(const Field& state) const { return state; }
  virtual Field expand(const Field& reduced) const { return reduced; }

  /// Jacobian of the reduced right-hand side by central differences.
  virtual Eigen::MatrixXd reduced_jacobian(const Field& state,
                                           double step) const;

  /// Fields outside [first, second] abort a simulation.
  virtual std::pair<double, double> admissible_range() const = 0;

  /// A reproducible random state that satisfies every constraint of the
  /// system; used as the direction of stability perturbations.
  virtual Field random_admissible(std::uint64_t seed) const;

  std::size_t size() const { return grid().size(); }
  std::size_t state_size() const { return components() * size(); }
  Field evaluate(const Field& state) const {
    Field r;
    rhs(state, r);
    return r;
  }
};

inline auto component(Field& stacked, std::size_t c, std::size_t n) {
  return stacked.segment(static_cast<Eigen::Index>(c * n),
                         static_cast<Eigen::Index>(n));
}
inline auto component(const Field& stacked, std::size_t c, std::size_t n) {
  return stacked.segment(static_cast<Eigen::Index>(c * n),
                         static_cast<Eigen::Index>(n));
}

}  // namespace hetdyn
