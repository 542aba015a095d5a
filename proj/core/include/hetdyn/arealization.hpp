#pragma once

#include "hetdyn/grid_kernels.hpp"
#include "hetdyn/heterogeneity.hpp"
#include "hetdyn/integrate.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace hetdyn {

/// Cortical arealization model: competing identity markers E and N, each
/// with a chemotactic cue C_E, C_N that relaxes towards its marker.
///
///   E_t   = E (1 - E - k1 N) + rho_E + D_E E_xx - chi1 (Phi(E) C_E,x)_x
///   C_E,t = E - C_E + D_CE C_E,xx
/// and symmetrically for (N, C_N) with k2, rho_N, D_N, D_CN, chi2.
/// Phi(z) = a z exp(-a z) saturates the chemotactic response.
struct ArealParams {
  double k1 = 2.0;
  double k2 = 2.0;
  double D_E = 0.2;
  double D_CE = 0.2;
  double D_N = 0.2;
  double D_CN = 0.2;
  double chi1 = 1.5;
  double chi2 = 1.5;
  double alpha_sat = 1.2;
  /// Morphogen sources: the path when `use_path`, else the constant pair.
  bool use_path = false;
  MorphogenPair morphogens{0.1, 0.1};
  MorphogenPath path;

  void validate() const;
  MorphogenPair morphogens_at(double x) const;

  bool operator==(const ArealParams&) const = default;
};

double ricker(double z, double alpha_sat);

struct HomogeneousEquilibrium {
  double E = 0.0;
  double N = 0.0;
  bool stable_k0 = false;
  double residual = 0.0;
};

/// Nonnegative, nontrivial roots of E(1-E-k1 N)+rho_E = 0,
/// N(1-N-k2 E)+rho_N = 0, sorted by E. The trivial root (0, 0) of the
/// unforced system is excluded.
std::vector<HomogeneousEquilibrium> homogeneous_equilibria(double rho_E, double rho_N,
                                                           double k1 = 2.0,
                                                           double k2 = 2.0);

/// 2x2 reaction Jacobian at (E, N).
Eigen::Matrix2d reaction_jacobian(double E, double N, double k1, double k2);

/// Range of rho_E (inside [lo, hi]) with three homogeneous equilibria at
/// fixed rho_N, its ends bisected to 1e-5; none without multiplicity.
std::optional<std::pair<double, double>> bistable_window(
    double rho_N, std::pair<double, double> rho_E_range = {0.0, 0.5},
    double k1 = 2.0, double k2 = 2.0);

/// Linearization about (E, E, N, N) for the cosine mode of wavenumber k;
/// state order (E, C_E, N, C_N).
Eigen::Matrix4d linearized_matrix(const HomogeneousEquilibrium& eq, double k,
                                  const ArealParams& params);

struct DispersionResult {
  std::vector<double> wavenumbers;
  std::vector<double> growth;
  double max_growth = 0.0;
  double argmax_k = 0.0;
};

/// Growth over the no-flux modes k_m = m pi / L, m = 0..n_modes.
/// Throws PreconditionFailed if `eq` is not stable at k = 0.
DispersionResult dispersion(const HomogeneousEquilibrium& eq,
                            const ArealParams& params, double L = 40.0,
                            std::size_t n_modes = 200);

struct TuringHeatmap {
  std::vector<double> rho_E;
  std::vector<double> rho_N;
  /// growth(i_N, i_E): max growth over the k0-stable equilibria, NaN where
  /// there is none.
  Eigen::MatrixXd growth;

  double at(double rho_E, double rho_N) const;  // nearest cell
  bool positive_anywhere() const;
};

TuringHeatmap turing_heatmap(std::pair<double, double> rho_E_range,
                             std::pair<double, double> rho_N_range,
                             std::size_t resolution, const ArealParams& params,
                             double L = 40.0, std::size_t n_modes = 200,
                             std::size_t threads = 0);

/// Fraction of a straight segment P1 -> P2 (sampled at `samples` points)
/// whose k0-stable equilibria have positive growth.
double path_unstable_fraction(MorphogenPair p1, MorphogenPair p2,
                              const ArealParams& params, double L = 40.0,
                              std::size_t samples = 201);

struct ArealRunOptions {
  double h = 0.1;
  double t_end = 200.0;
  double noise = 1e-2;
  std::uint64_t seed = 1;
  std::size_t snapshot_stride = 10;
  bool store_snapshots = true;
  /// Stacked (E, C_E, N, C_N) start; default is the equilibrium + noise.
  std::optional<Field> initial;
  Observer observer;
  std::size_t observe_stride = 1;
};

/// Initial state: per node a k0-stable homogeneous equilibrium of the local
/// morphogens (the E-dominated one where rho_E >= rho_N) with seeded
/// uniform noise of amplitude `noise` added to E and N.
Field areal_initial_state(const ArealParams& params, const Grid1D& grid,
                          double noise, std::uint64_t seed);

/// One semi-implicit step: explicit reaction, source and chemotaxis, then
/// implicit Neumann diffusion for each field.
class ArealStepper {
 public:
  ArealStepper(const ArealParams& params, const Grid1D& grid, double h);
  void step(Field& state) const;
  const Field& rho_E() const { return rho_E_; }
  const Field& rho_N() const { return rho_N_; }

 private:
  struct Tridiagonal {
    Field lower, diag, upper;  // factorized (Thomas) coefficients
    void solve(Eigen::Ref<Field> rhs) const;
  };
  Tridiagonal factor(double D) const;
  void chemotaxis(const Field& u, const Field& c, double chi, Field& out) const;

  ArealParams params_;
  Grid1D grid_;
  double h_;
  Field rho_E_, rho_N_;
  Tridiagonal solve_E_, solve_CE_, solve_N_, solve_CN_;
};

/// Throws IntegrationBlowup on NaN/Inf or when a field drops below -1e-6.
SimulationRun simulate_areal(const ArealParams& params, const Grid1D& grid,
                             const ArealRunOptions& options);

enum class OutcomeKind { Homogeneous, Front, Spikes, Irregular };

std::string_view to_string(OutcomeKind k) noexcept;

struct Outcome {
  OutcomeKind kind = OutcomeKind::Homogeneous;
  std::size_t spikes = 0;
  std::vector<double> spike_positions;
};

/// Classifies a final E field on the window [r_lo - 2, r_hi + 2].
Outcome classify_outcome(const Field& E, const Grid1D& grid, double r_lo,
                         double r_hi);

}  // namespace hetdyn
