#pragma once

#include "hetdyn/equilibrium.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace hetdyn {

enum class BranchEvent { SaddleNode, Transcritical, Hopf, BranchEnd };

std::string_view to_string(BranchEvent e) noexcept;

struct BranchLabel {
  std::size_t index = 0;  // into Branch::points
  BranchEvent event = BranchEvent::BranchEnd;
  std::string note;
};

struct Branch {
  std::vector<EquilibriumPoint> points;
  std::vector<BranchLabel> labels;

  /// Parameter values of every label of the given kind, in branch order.
  std::vector<double> event_parameters(BranchEvent e) const;
  bool has(BranchEvent e) const;
};

struct ContinuationOptions {
  double p_min = 0.0;
  double p_max = 1.0;
  int direction = +1;  // initial sign of the parameter increment
  double initial_step_fraction = 1e-3;
  double max_step_fraction = 1e-2;
  double min_step = 1e-7;
  std::size_t max_points = 200000;
  double fold_tol = 1e-5;
  double hopf_tol = 1e-4;
  double corrector_tol = 1e-10;
  /// Points this far outside the physical domain end the branch.
  double admissibility_margin = 0.02;
};

/// Pseudo-arclength continuation of an equilibrium of `model` in its
/// parameter, from `start` until the branch leaves [p_min, p_max] (the
/// last point lands on the boundary), leaves the physical domain, or the
/// corrector fails at the minimum step.
Branch continue_branch(const NonspatialModel& model,
                       const EquilibriumPoint& start,
                       const ContinuationOptions& options = {});

}  // namespace hetdyn
