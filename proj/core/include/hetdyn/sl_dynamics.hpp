#pragma once

#include "hetdyn/grid_kernels.hpp"
#include "hetdyn/heterogeneity.hpp"
#include "hetdyn/system.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <string_view>

namespace hetdyn {

/// Parameters of the nonlocal grass / sapling / savanna-tree / forest
/// model. Unset fields keep the standard defaults.
struct SLParams {
  double mu = 0.1;   // sapling mortality
  double nu = 0.05;  // savanna tree mortality
  SigmoidResponse omega = default_omega();
  SigmoidResponse phi = default_phi();
  SpatialGradient alpha = SpatialGradient::constant(0.5);  // forest birth rate
  SpatialGradient beta = SpatialGradient::constant(0.0);   // savanna birth rate
  double sigma_F = 0.01;
  double sigma_T = 0.01;
  double sigma_W = 0.01;
  BoundaryCondition bc = BoundaryCondition::Reflecting;
  bool normalize_kernels = true;

  void validate() const;

  bool operator==(const SLParams&) const = default;
};

using SL4Point = std::array<double, 4>;  // (G, S, T, F)

/// Cover fractions over a grid; pointwise on the probability simplex.
struct SLState {
  Field G, S, T, F;

  static SLState uniform(std::size_t n, const SL4Point& v);
  static SLState from_stacked(const Field& stacked);
  Field stacked() const;
  std::size_t size() const { return static_cast<std::size_t>(G.size()); }
  /// max over nodes of |G+S+T+F-1| and of any negative part.
  double simplex_violation() const;
};

/// (1 - G) (phi(G) - alpha G): the grass-forest model without dispersal.
double rhs_grassforest_nonspatial(double G, double alpha,
                                  const SigmoidResponse& phi = default_phi());

/// Four-type rates with every kernel integral replaced by the local value.
/// Throws InvalidState if the point is more than 1e-6 off the simplex.
SL4Point rhs_sl4_nonspatial(const SL4Point& state, double alpha, double beta,
                            const SLParams& params);

/// Same rates without the simplex check, for solvers whose iterates may
/// step off the simplex.
SL4Point sl4_local_rates(const SL4Point& state, double alpha, double beta,
                         const SLParams& params) noexcept;

/// Fire-spread and seed-dispersal operators for one run.
struct SLKernels {
  std::shared_ptr<const DiscreteConvolution> w;
  std::shared_ptr<const DiscreteConvolution> seed_T;
  std::shared_ptr<const DiscreteConvolution> seed_F;

  /// Identical sigmas share one matrix.
  static SLKernels build(const Grid1D& grid, const SLParams& params);
  /// Identity operators: the localized limit.
  static SLKernels localized(const Grid1D& grid);
};

Field rhs_grassforest_spatial(const Field& G, const DiscreteConvolution& conv_w,
                              const DiscreteConvolution& conv_F,
                              const Field& alpha,
                              const SigmoidResponse& phi = default_phi());

SLState rhs_sl4_spatial(const SLState& state, const SLKernels& kernels,
                        const Field& alpha, const Field& beta,
                        const SLParams& params);

/// Spatial grass-forest integro-differential equation (one field, G).
class GrassForestSystem final : public SpatialSystem {
 public:
  GrassForestSystem(const Grid1D& grid, const SLParams& params);
  GrassForestSystem(const Grid1D& grid, const SLParams& params,
                    SLKernels kernels);

  const Grid1D& grid() const override { return grid_; }
  std::size_t components() const override { return 1; }
  void rhs(const Field& state, Field& rate) const override;
  Eigen::MatrixXd reduced_jacobian(const Field& state,
                                   double step) const override;
  std::pair<double, double> admissible_range() const override {
    return {-1e-6, 1.0 + 1e-6};
  }

  const Field& alpha() const { return alpha_; }
  const SLParams& params() const { return params_; }
  const SLKernels& kernels() const { return kernels_; }

 private:
  Grid1D grid_;
  SLParams params_;
  SLKernels kernels_;
  Field alpha_;
};

/// Spatial four-type model. State stacks (G, S, T, F); the reduced
/// coordinates for steady-state solves are (G, S, T) with F = 1 - G - S - T.
class SL4System final : public SpatialSystem {
 public:
  SL4System(const Grid1D& grid, const SLParams& params);
  SL4System(const Grid1D& grid, const SLParams& params, SLKernels kernels);

  const Grid1D& grid() const override { return grid_; }
  std::size_t components() const override { return 4; }
  void rhs(const Field& state, Field& rate) const override;
  std::size_t free_components() const override { return 3; }
  Field reduce(const Field& state) const override;
  Field expand(const Field& reduced) const override;
  Eigen::MatrixXd reduced_jacobian(const Field& state,
                                   double step) const override;
  std::pair<double, double> admissible_range() const override {
    return {-1e-6, 1.0 + 1e-6};
  }
  Field random_admissible(std::uint64_t seed) const override;

  const Field& alpha() const { return alpha_; }
  const Field& beta() const { return beta_; }
  const SLParams& params() const { return params_; }
  const SLKernels& kernels() const { return kernels_; }

 private:
  Grid1D grid_;
  SLParams params_;
  SLKernels kernels_;
  Field alpha_;
  Field beta_;
};

enum class InitialKind { Uniform, Ramp, Seed, Random };

std::string_view to_string(InitialKind k) noexcept;
InitialKind initial_kind_from_string(std::string_view s);

/// Initial-condition library for the SL models.
///
///   Uniform  `left` everywhere.
///   Ramp     `left` blended into `right` by a tanh of half-width `width`
///            centred at `location`; width 0 gives a sharp step.
///   Seed     forest pulse exp(-(x-location)^2 / (2 width^2)) scaled by
///            `amplitude` over an all-grass background.
///   Random   independent uniform draws on the simplex at every node.
struct InitialCondition {
  InitialKind kind = InitialKind::Uniform;
  SL4Point left{0.25, 0.25, 0.25, 0.25};
  SL4Point right{0.25, 0.25, 0.25, 0.25};
  double location = 0.5;
  double width = 0.05;
  double amplitude = 0.5;
  std::uint64_t seed = 0;

  bool operator==(const InitialCondition&) const = default;
};

SLState make_sl4_initial(const InitialCondition& ic, const Grid1D& grid);
/// Grass-forest initial field: G = grass fraction of the four-type IC,
/// with the remainder treated as forest.
Field make_grassforest_initial(const InitialCondition& ic, const Grid1D& grid);

/// Random simplex point from the counter generator (flat Dirichlet).
SL4Point random_simplex_point(std::uint64_t seed, std::uint64_t counter);

}  // namespace hetdyn
