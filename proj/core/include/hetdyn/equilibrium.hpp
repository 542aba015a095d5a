#pragma once

#include "hetdyn/heterogeneity.hpp"
#include "hetdyn/sl_dynamics.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hetdyn {

inline constexpr double kEigenTolerance = 1e-7;

enum class Stability { Stable, Unstable, Marginal };

std::string_view to_string(Stability s) noexcept;

/// Stable iff max Re < -tol, Marginal iff |max Re| <= tol.
Stability classify_spectrum(const Eigen::VectorXcd& eigenvalues,
                            double tol = kEigenTolerance);

struct EquilibriumPoint {
  Eigen::VectorXd state;  // full state (G for the scalar model, G,S,T,F for SL4)
  double parameter = 0.0;
  Eigen::VectorXcd eigenvalues;
  Stability stability = Stability::Marginal;

  double max_real_part() const;
};

/// A parameterized ODE du/dt = f(u, p) in reduced coordinates.
class NonspatialModel {
 public:
  virtual ~NonspatialModel() = default;

  virtual std::size_t dimension() const = 0;
  virtual Eigen::VectorXd rhs(const Eigen::VectorXd& u, double p) const = 0;

  virtual Eigen::VectorXd full_state(const Eigen::VectorXd& u) const { return u; }
  virtual Eigen::VectorXd reduced_state(const Eigen::VectorXd& full) const {
    return full;
  }
  /// Distance of u outside the physical domain (0 when admissible).
  virtual double admissibility_violation(const Eigen::VectorXd& u) const = 0;
  /// Deterministic start number k drawn from the physical domain.
  virtual Eigen::VectorXd start_point(std::uint64_t seed, std::uint64_t k) const = 0;
  /// Roots known in closed form; always tried as Newton starts.
  virtual std::vector<Eigen::VectorXd> known_roots(double /*p*/) const { return {}; }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& u, double p,
                           double step = 1e-6) const;
  Eigen::VectorXd parameter_derivative(const Eigen::VectorXd& u, double p,
                                       double step = 1e-6) const;
};

/// (1 - G)(phi(G) - alpha(p) G). With alpha(p) = p the parameter is alpha
/// itself; with a gradient it is the spatial position.
class GrassForestODE final : public NonspatialModel {
 public:
  GrassForestODE(SigmoidResponse phi, std::function<double(double)> alpha_of_p);

  std::size_t dimension() const override { return 1; }
  Eigen::VectorXd rhs(const Eigen::VectorXd& u, double p) const override;
  double admissibility_violation(const Eigen::VectorXd& u) const override;
  Eigen::VectorXd start_point(std::uint64_t seed, std::uint64_t k) const override;
  std::vector<Eigen::VectorXd> known_roots(double p) const override;

 private:
  SigmoidResponse phi_;
  std::function<double(double)> alpha_;
};

/// Four-type model on the simplex, reduced to (G, S, T).
class SL4ODE final : public NonspatialModel {
 public:
  SL4ODE(SLParams params, std::function<double(double)> alpha_of_p,
         std::function<double(double)> beta_of_p);

  std::size_t dimension() const override { return 3; }
  Eigen::VectorXd rhs(const Eigen::VectorXd& u, double p) const override;
  Eigen::VectorXd full_state(const Eigen::VectorXd& u) const override;
  Eigen::VectorXd reduced_state(const Eigen::VectorXd& full) const override;
  double admissibility_violation(const Eigen::VectorXd& u) const override;
  Eigen::VectorXd start_point(std::uint64_t seed, std::uint64_t k) const override;
  std::vector<Eigen::VectorXd> known_roots(double p) const override;

  double alpha(double p) const { return alpha_(p); }
  double beta(double p) const { return beta_(p); }

 private:
  SLParams params_;
  std::function<double(double)> alpha_;
  std::function<double(double)> beta_;
};

/// Equilibrium with eigenvalues and stability attached. `u` is reduced.
EquilibriumPoint make_equilibrium(const NonspatialModel& model,
                                  const Eigen::VectorXd& u, double p);

struct FindOptions {
  std::size_t n_starts = 40;
  std::uint64_t seed = 1;
  double dedup_tol = 1e-6;
  double residual_tol = 1e-10;
  std::size_t max_newton = 100;
  /// Roots further than this outside the physical domain are discarded.
  double admissibility_tol = 1e-9;
};

/// Multi-start damped Newton. Results are sorted by their first component
/// (descending), so the all-grass root comes first.
std::vector<EquilibriumPoint> find_equilibria(const NonspatialModel& model,
                                              double p,
                                              const FindOptions& options = {});

/// Polishes a root by damped Newton; returns false if it does not converge.
bool newton_polish(const NonspatialModel& model, Eigen::VectorXd& u, double p,
                   double residual_tol = 1e-10, std::size_t max_iter = 100);

/// Integrates the ODE (forward Euler, step h) from `start` for time T and
/// reports sustained oscillation: peak-to-peak > amplitude in every
/// component window of the last 40% of the run, without decay between its
/// first and second halves.
bool sustained_oscillation(const NonspatialModel& model, double p,
                           const Eigen::VectorXd& start, double T = 500.0,
                           double h = 0.05, double amplitude = 1e-3);

struct RegimeCell {
  int stable_count = 0;
  bool oscillating = false;

  bool operator==(const RegimeCell&) const = default;
};

struct TwoParamMap {
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<RegimeCell> cells;  // row-major: beta index major, alpha minor

  const RegimeCell& at(std::size_t i_alpha, std::size_t i_beta) const {
    return cells[i_beta * alpha.size() + i_alpha];
  }
  /// Compact integer code: stable count, plus 10 if oscillating.
  int code(std::size_t i_alpha, std::size_t i_beta) const {
    const RegimeCell& c = at(i_alpha, i_beta);
    return c.stable_count + (c.oscillating ? 10 : 0);
  }
};

struct TwoParamOptions {
  std::size_t threads = 0;
  FindOptions find;
  double oscillation_time = 500.0;
  double oscillation_h = 0.05;
  double oscillation_amplitude = 1e-3;
};

/// Regime map of the nonspatial four-type model over an (alpha, beta) box
/// with `resolution` points per axis (endpoints included).
TwoParamMap scan_two_parameter(std::pair<double, double> alpha_range,
                               std::pair<double, double> beta_range,
                               std::size_t resolution, const SLParams& base,
                               const TwoParamOptions& options = {});

/// The three fixed integration starts used by the oscillation test.
std::vector<SL4Point> oscillation_starts();

}  // namespace hetdyn
