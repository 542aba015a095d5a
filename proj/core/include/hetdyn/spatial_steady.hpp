#pragma once

#include "hetdyn/diagnostics.hpp"
#include "hetdyn/grid_kernels.hpp"
#include "hetdyn/system.hpp"

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace hetdyn {

enum class SteadyMethod { FixedPoint, Newton };

std::string_view to_string(SteadyMethod m) noexcept;
SteadyMethod steady_method_from_string(std::string_view s);

struct SteadyOptions {
  SteadyMethod method = SteadyMethod::Newton;
  double tolerance = 1e-9;  // max-norm of the right-hand side
  std::size_t max_iterations = 100000;
  /// Forward-Euler time to integrate before iterating (0 = none).
  double relax_time = 0.0;
  double relax_h = 0.05;
  double fd_step = 1e-7;
  bool check_stability = true;
  double perturbation = 1e-3;
  double stability_time = 200.0;
  double return_tolerance = 1e-4;
  std::uint64_t seed = 7;
};

struct SpatialSteadyState {
  Field state;             // stacked, all components
  double l1_grass = 0.0;   // trapezoid L1 norm of the first component
  bool stable = false;
  bool stability_checked = false;
  double residual = 0.0;
  std::size_t iterations = 0;
  double return_distance = 0.0;
};

/// Converges `guess` to a steady state of `system` and, if requested,
/// decides stability by integrating a perturbed copy.
/// Throws NoSteadyState (carrying the best residual) on failure.
SpatialSteadyState spatial_steady_state(const SpatialSystem& system,
                                        const Field& guess,
                                        const SteadyOptions& options = {});

/// Integrates (1 - eps) state + eps r, r a random admissible state, for
/// `stability_time` and returns the max-norm distance to `state`.
double perturbation_return_distance(const SpatialSystem& system,
                                    const Field& state,
                                    const SteadyOptions& options);

/// Position of the steepest crossing of `level` (linear interpolation).
/// Throws NoFront when the field never crosses the level.
double locate_front(const Field& field, const Grid1D& grid, double level = 0.5);

}  // namespace hetdyn
