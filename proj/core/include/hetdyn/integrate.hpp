#pragma once

#include "hetdyn/grid_kernels.hpp"
#include "hetdyn/system.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hetdyn {

enum class RunStatus { Completed, HaltedOutOfRange };

/// A stored trajectory. Snapshots are stacked states (component-major).
struct SimulationRun {
  std::optional<Grid1D> grid;  // empty for nonspatial runs
  std::size_t components = 1;
  std::vector<double> times;
  std::vector<Field> snapshots;
  RunStatus status = RunStatus::Completed;
  std::string diagnostic;
  double final_time = 0.0;
  Field final_state;

  std::size_t nodes() const { return grid ? grid->size() : 1; }
  Field component_at(std::size_t snapshot, std::size_t c) const;
};

using RateFunction = std::function<void(const Field& state, Field& rate)>;
using Observer = std::function<void(double t, const Field& state)>;

struct EulerOptions {
  double h = 0.05;
  double t_end = 1.0;
  std::size_t snapshot_stride = 1;
  /// Largest accepted step; the SL schemes are validated for h <= 0.1.
  double max_step = 0.1;
  /// Every state entry must stay inside this range (with no tolerance
  /// added); leaving it halts the run with a diagnostic.
  std::optional<std::pair<double, double>> range;
  /// Called at t = 0 and after every `observe_stride` steps.
  Observer observer;
  std::size_t observe_stride = 1;
  /// Keep snapshots only every `snapshot_stride` steps; with this off only
  /// the initial and final states are stored.
  bool store_snapshots = true;
};

/// Forward Euler u <- u + h f(u). Throws IntegrationBlowup on NaN/Inf.
SimulationRun euler_simulate(const RateFunction& rhs, Field initial,
                             const EulerOptions& options);

/// Spatial overload: uses the system's admissible range unless the options
/// override it, and records the grid and component count.
SimulationRun euler_simulate(const SpatialSystem& system, Field initial,
                             EulerOptions options);

}  // namespace hetdyn
