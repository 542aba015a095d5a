#include "hetdyn/spatial_steady.hpp"

#include "hetdyn/error.hpp"
#include "hetdyn/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hetdyn {

std::string_view to_string(SteadyMethod m) noexcept {
  return m == SteadyMethod::Newton ? "newton" : "fixed-point";
}

SteadyMethod steady_method_from_string(std::string_view s) {
  if (s == "newton") return SteadyMethod::Newton;
  if (s == "fixed-point" || s == "fixedpoint") return SteadyMethod::FixedPoint;
  throw InvalidParameter("unknown steady-state method '" + std::string(s) + "'");
}

namespace {

struct Solve {
  Field state;
  double residual;
  std::size_t iterations;
};

double max_norm(const Field& v) { return v.lpNorm<Eigen::Infinity>(); }

Solve solve_fixed_point(const SpatialSystem& sys, Field u, const SteadyOptions& opt) {
  Field f = sys.evaluate(u);
  double res = max_norm(f);
  double best = res;
  double tau = 0.5;
  std::size_t it = 0;
  for (; it < opt.max_iterations && res > opt.tolerance; ++it) {
    Field trial = u + tau * f;
    Field ft = sys.evaluate(trial);
    const double rt = max_norm(ft);
    if (!std::isfinite(rt) || rt > 1.5 * res) {
      tau *= 0.5;
      if (tau < 1e-8) break;
      continue;
    }
    u = std::move(trial);
    f = std::move(ft);
    res = rt;
    best = std::min(best, res);
  }
  if (!(res <= opt.tolerance)) {
    throw NoSteadyState("fixed-point iteration did not converge", best);
  }
  return {std::move(u), res, it};
}

Solve solve_newton(const SpatialSystem& sys, const Field& guess,
                   const SteadyOptions& opt) {
  Field v = sys.reduce(guess);
  const Eigen::Index m = v.size();
  Field full = sys.expand(v);
  Field f = sys.evaluate(full);
  double res = max_norm(f);
  double best = res;
  const std::size_t max_newton = std::min<std::size_t>(opt.max_iterations, 60);
  std::size_t it = 0;
  for (; it < max_newton && res > opt.tolerance; ++it) {
    const Eigen::MatrixXd J = sys.reduced_jacobian(full, opt.fd_step);
    const Field delta = J.partialPivLu().solve(-f.head(m));
    if (!delta.allFinite()) break;
    const double norm = f.head(m).norm();
    double lambda = 1.0;
    bool accepted = false;
    while (lambda >= 1.0 / 1024.0) {
      Field vt = v + lambda * delta;
      Field ft_full = sys.expand(vt);
      Field ft = sys.evaluate(ft_full);
      if (ft.allFinite() && ft.head(m).norm() < (1.0 - 1e-4 * lambda) * norm) {
        v = std::move(vt);
        full = std::move(ft_full);
        f = std::move(ft);
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    res = max_norm(f);
    best = std::min(best, res);
    if (!accepted) break;
  }
  if (!(res <= opt.tolerance)) {
    throw NoSteadyState("Newton iteration did not converge", best);
  }
  return {std::move(full), res, it};
}

}  // namespace

double perturbation_return_distance(const SpatialSystem& system, const Field& state,
                                    const SteadyOptions& opt) {
  const Field target = system.random_admissible(opt.seed);
  Field u = (1.0 - opt.perturbation) * state + opt.perturbation * target;
  EulerOptions eo;
  eo.h = opt.relax_h;
  eo.t_end = opt.stability_time;
  eo.store_snapshots = false;
  const auto [lo, hi] = system.admissible_range();
  eo.range = std::make_pair(lo - 1.0, hi + 1.0);
  const SimulationRun run = euler_simulate(system, std::move(u), eo);
  if (run.status != RunStatus::Completed) return std::numeric_limits<double>::infinity();
  return max_norm(run.final_state - state);
}

SpatialSteadyState spatial_steady_state(const SpatialSystem& system, const Field& guess,
                                        const SteadyOptions& opt) {
  if (guess.size() != static_cast<Eigen::Index>(system.state_size())) {
    throw DimensionMismatch("steady-state guess does not match the system grid");
  }
  if (!(opt.tolerance > 0.0)) throw InvalidParameter("tolerance must be positive");
  Field start = guess;
  if (opt.relax_time > 0.0) {
    EulerOptions eo;
    eo.h = opt.relax_h;
    eo.t_end = opt.relax_time;
    eo.store_snapshots = false;
    SimulationRun run = euler_simulate(system, start, eo);
    if (run.status != RunStatus::Completed) {
      throw NoSteadyState("relaxation left the admissible range: " + run.diagnostic,
                          std::numeric_limits<double>::infinity());
    }
    start = std::move(run.final_state);
  }

  Solve s = opt.method == SteadyMethod::Newton ? solve_newton(system, start, opt)
                                               : solve_fixed_point(system, start, opt);
  const auto [lo, hi] = system.admissible_range();
  if (s.state.minCoeff() < lo || s.state.maxCoeff() > hi) {
    throw NoSteadyState("converged to a root outside the admissible range", s.residual);
  }

  SpatialSteadyState out;
  out.residual = s.residual;
  out.iterations = s.iterations;
  out.l1_grass = l1_norm(component(s.state, 0, system.size()), system.grid());
  out.state = std::move(s.state);
  if (opt.check_stability) {
    out.return_distance = perturbation_return_distance(system, out.state, opt);
    out.stable = out.return_distance <= opt.return_tolerance;
    out.stability_checked = true;
  }
  return out;
}

double locate_front(const Field& field, const Grid1D& grid, double level) {
  if (static_cast<std::size_t>(field.size()) != grid.size()) {
    throw DimensionMismatch("locate_front: field does not match the grid");
  }
  double best_slope = -1.0;
  double where = 0.0;
  for (Eigen::Index i = 0; i + 1 < field.size(); ++i) {
    const double a = field[i] - level;
    const double b = field[i + 1] - level;
    if (a * b > 0.0 || field[i] == field[i + 1]) continue;
    const double slope = std::abs(field[i + 1] - field[i]);
    if (slope > best_slope) {
      best_slope = slope;
      const double t = a / (a - b);
      where = grid.node(static_cast<std::size_t>(i)) + t * grid.spacing();
    }
  }
  if (best_slope < 0.0) throw NoFront("field never crosses the level");
  return where;
}

}  // namespace hetdyn
