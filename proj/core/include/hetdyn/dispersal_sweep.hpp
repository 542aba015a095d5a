#pragma once

#include "hetdyn/grid_kernels.hpp"
#include "hetdyn/sl_dynamics.hpp"
#include "hetdyn/spatial_steady.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace hetdyn {

/// One steady state of the spatial grass-forest model at a dispersal value.
struct DispersalPoint {
  double sigma = 0.0;
  Field state;
  double l1_grass = 0.0;
  bool stable = false;
  double residual = 0.0;
  bool from_continuation = false;  // reached by continuation, not the ensemble
};

enum class DispersalKind { AllGrass, GrassDominated, FrontPinned, ForestDominated };

std::string_view to_string(DispersalKind k) noexcept;

/// Classifies a grass field by the fraction of the domain with G > 1/2.
DispersalKind classify_dispersal_state(const Field& G, const Grid1D& grid);

struct DispersalBranch {
  DispersalKind kind = DispersalKind::FrontPinned;
  std::vector<DispersalPoint> points;  // increasing sigma
  /// Fold localized below the first point / above the last point, if the
  /// branch stops inside the sweep range.
  std::optional<double> fold_low;
  std::optional<double> fold_high;
};

struct DispersalSweep {
  std::vector<double> sigmas;
  std::vector<DispersalBranch> branches;

  /// Sigma values at which at least `count` branches are stable at once.
  std::vector<double> sigmas_with_stable(std::size_t count) const;
};

struct DispersalSweepOptions {
  /// Initial conditions relaxed at every sigma (grass fraction of each).
  std::vector<InitialCondition> ensemble;
  double relax_time = 300.0;
  SteadyOptions steady;  // stability settings are used in the final pass
  double match_factor = 0.2;  // branches match when L2 distance < factor * sqrt(n)
  double fold_tol = 1e-4;
  std::size_t threads = 0;

  DispersalSweepOptions();
};

/// Steady-state branches of the grass-forest model as sigma_F = sigma_W =
/// sigma varies. `base` supplies phi, the alpha gradient and the boundary
/// condition; its sigmas are ignored.
DispersalSweep sweep_dispersal(const Grid1D& grid, const SLParams& base,
                               std::vector<double> sigmas,
                               const DispersalSweepOptions& options = {});

}  // namespace hetdyn
