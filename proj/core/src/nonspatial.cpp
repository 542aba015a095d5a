#include "hetdyn/equilibrium.hpp"

#include "hetdyn/error.hpp"
#include "hetdyn/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace hetdyn {

std::string_view to_string(Stability s) noexcept {
  switch (s) {
    case Stability::Stable:
      return "stable";
    case Stability::Unstable:
      return "unstable";
    case Stability::Marginal:
      return "marginal";
  }
  return "marginal";
}

Stability classify_spectrum(const Eigen::VectorXcd& ev, double tol) {
  if (ev.size() == 0) return Stability::Marginal;
  double m = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i) m = std::max(m, ev[i].real());
  if (m < -tol) return Stability::Stable;
  if (m > tol) return Stability::Unstable;
  return Stability::Marginal;
}

double EquilibriumPoint::max_real_part() const {
  double m = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    m = std::max(m, eigenvalues[i].real());
  }
  return m;
}

Eigen::MatrixXd NonspatialModel::jacobian(const Eigen::VectorXd& u, double p,
                                          double step) const {
  const auto d = static_cast<Eigen::Index>(dimension());
  Eigen::MatrixXd J(d, d);
  Eigen::VectorXd probe = u;
  for (Eigen::Index j = 0; j < d; ++j) {
    probe[j] = u[j] + step;
    const Eigen::VectorXd up = rhs(probe, p);
    probe[j] = u[j] - step;
    const Eigen::VectorXd dn = rhs(probe, p);
    probe[j] = u[j];
    J.col(j) = (up - dn) / (2.0 * step);
  }
  return J;
}

Eigen::VectorXd NonspatialModel::parameter_derivative(const Eigen::VectorXd& u,
                                                      double p,
                                                      double step) const {
  return (rhs(u, p + step) - rhs(u, p - step)) / (2.0 * step);
}

// ---------------------------------------------------------------------------

GrassForestODE::GrassForestODE(SigmoidResponse phi,
                               std::function<double(double)> alpha_of_p)
    : phi_(phi), alpha_(std::move(alpha_of_p)) {
  phi_.validate();
  if (!alpha_) throw InvalidParameter("grass-forest ODE needs an alpha function");
}

Eigen::VectorXd GrassForestODE::rhs(const Eigen::VectorXd& u, double p) const {
  if (u.size() != 1) throw DimensionMismatch("grass-forest ODE is scalar");
  Eigen::VectorXd r(1);
  r[0] = rhs_grassforest_nonspatial(u[0], alpha_(p), phi_);
  return r;
}

double GrassForestODE::admissibility_violation(const Eigen::VectorXd& u) const {
  return std::max({0.0, -u[0], u[0] - 1.0});
}

Eigen::VectorXd GrassForestODE::start_point(std::uint64_t seed,
                                            std::uint64_t k) const {
  Eigen::VectorXd u(1);
  if (k <= 20) {
    u[0] = static_cast<double>(k) / 20.0;
  } else {
    u[0] = 0.5 * (counter_uniform(seed, k) + 1.0);
  }
  return u;
}

std::vector<Eigen::VectorXd> GrassForestODE::known_roots(double) const {
  return {Eigen::VectorXd::Ones(1)};
}

SL4ODE::SL4ODE(SLParams params, std::function<double(double)> alpha_of_p,
               std::function<double(double)> beta_of_p)
    : params_(std::move(params)),
      alpha_(std::move(alpha_of_p)),
      beta_(std::move(beta_of_p)) {
  params_.validate();
  if (!alpha_ || !beta_) {
    throw InvalidParameter("four-type ODE needs alpha and beta functions");
  }
}

Eigen::VectorXd SL4ODE::rhs(const Eigen::VectorXd& u, double p) const {
  if (u.size() != 3) throw DimensionMismatch("four-type ODE has 3 free unknowns");
  const SL4Point x{u[0], u[1], u[2], 1.0 - u[0] - u[1] - u[2]};
  const SL4Point r = sl4_local_rates(x, alpha_(p), beta_(p), params_);
  Eigen::VectorXd out(3);
  out << r[0], r[1], r[2];
  return out;
}

Eigen::VectorXd SL4ODE::full_state(const Eigen::VectorXd& u) const {
  Eigen::VectorXd x(4);
  x << u[0], u[1], u[2], 1.0 - u[0] - u[1] - u[2];
  return x;
}

Eigen::VectorXd SL4ODE::reduced_state(const Eigen::VectorXd& full) const {
  if (full.size() == 3) return full;
  if (full.size() != 4) throw DimensionMismatch("four-type state has 4 entries");
  return full.head(3);
}

double SL4ODE::admissibility_violation(const Eigen::VectorXd& u) const {
  const double f = 1.0 - u[0] - u[1] - u[2];
  return std::max({0.0, -u[0], -u[1], -u[2], -f});
}

Eigen::VectorXd SL4ODE::start_point(std::uint64_t seed, std::uint64_t k) const {
  const SL4Point p = random_simplex_point(seed, k);
  Eigen::VectorXd u(3);
  u << p[0], p[1], p[2];
  return u;
}

std::vector<Eigen::VectorXd> SL4ODE::known_roots(double) const {
  return {Eigen::Vector3d(1.0, 0.0, 0.0)};
}

// ---------------------------------------------------------------------------

EquilibriumPoint make_equilibrium(const NonspatialModel& model,
                                  const Eigen::VectorXd& u, double p) {
  EquilibriumPoint e;
  e.state = model.full_state(u);
  e.parameter = p;
  const Eigen::MatrixXd J = model.jacobian(u, p);
  e.eigenvalues = Eigen::EigenSolver<Eigen::MatrixXd>(J, false).eigenvalues();
  e.stability = classify_spectrum(e.eigenvalues);
  return e;
}

bool newton_polish(const NonspatialModel& model, Eigen::VectorXd& u, double p,
                   double residual_tol, std::size_t max_iter) {
  Eigen::VectorXd f = model.rhs(u, p);
  for (std::size_t it = 0; it < max_iter; ++it) {
    if (!f.allFinite()) return false;
    if (f.lpNorm<Eigen::Infinity>() <= residual_tol) return true;
    const Eigen::MatrixXd J = model.jacobian(u, p);
    const Eigen::VectorXd delta = J.fullPivLu().solve(-f);
    if (!delta.allFinite()) return false;
    const double norm = f.norm();
    double lambda = 1.0;
    bool accepted = false;
    while (lambda >= 1.0 / 1024.0) {
      Eigen::VectorXd trial = u + lambda * delta;
      Eigen::VectorXd ft = model.rhs(trial, p);
      if (ft.allFinite() && ft.norm() < (1.0 - 1e-4 * lambda) * norm) {
        u = std::move(trial);
        f = std::move(ft);
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      // A full step that does not reduce the residual may still be at the
      // rounding floor of an exact root.
      return f.lpNorm<Eigen::Infinity>() <= residual_tol;
    }
  }
  return f.allFinite() && f.lpNorm<Eigen::Infinity>() <= residual_tol;
}

std::vector<EquilibriumPoint> find_equilibria(const NonspatialModel& model,
                                              double p,
                                              const FindOptions& opt) {
  if (opt.n_starts < 20) throw InvalidParameter("find_equilibria needs >= 20 starts");
  std::vector<Eigen::VectorXd> starts = model.known_roots(p);
  for (std::uint64_t k = 0; k < opt.n_starts; ++k) {
    starts.push_back(model.start_point(opt.seed, k));
  }

  std::vector<Eigen::VectorXd> roots;
  for (Eigen::VectorXd u : starts) {
    if (!newton_polish(model, u, p, opt.residual_tol, opt.max_newton)) continue;
    if (model.admissibility_violation(u) > opt.admissibility_tol) continue;
    const bool dup = std::any_of(roots.begin(), roots.end(), [&](const auto& r) {
      return (r - u).template lpNorm<Eigen::Infinity>() < opt.dedup_tol;
    });
    if (!dup) roots.push_back(u);
  }

  std::vector<EquilibriumPoint> out;
  out.reserve(roots.size());
  for (const auto& r : roots) out.push_back(make_equilibrium(model, r, p));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.state[0] > b.state[0];
  });
  return out;
}

// ---------------------------------------------------------------------------

bool sustained_oscillation(const NonspatialModel& model, double p,
                           const Eigen::VectorXd& start, double T, double h,
                           double amplitude) {
  const auto steps = static_cast<std::size_t>(std::llround(T / h));
  const std::size_t window_start = steps - (2 * steps) / 5;
  const std::size_t mid = window_start + (steps - window_start) / 2;
  const auto d = static_cast<Eigen::Index>(model.dimension());

  Eigen::VectorXd u = start;
  Eigen::VectorXd lo1 = Eigen::VectorXd::Constant(d, 1e300), hi1 = -lo1;
  Eigen::VectorXd lo2 = lo1, hi2 = hi1;
  std::vector<double> trace;  // first component over the window
  trace.reserve(steps - window_start + 1);
  for (std::size_t k = 1; k <= steps; ++k) {
    u += h * model.rhs(u, p);
    if (!u.allFinite()) return false;
    if (k < window_start) continue;
    auto& lo = k < mid ? lo1 : lo2;
    auto& hi = k < mid ? hi1 : hi2;
    lo = lo.cwiseMin(u);
    hi = hi.cwiseMax(u);
    trace.push_back(u[0]);
  }
  const Eigen::VectorXd amp1 = hi1 - lo1;
  const Eigen::VectorXd amp2 = hi2 - lo2;
  Eigen::Index c = 0;
  const double total = (hi1.cwiseMax(hi2) - lo1.cwiseMin(lo2)).maxCoeff(&c);
  if (!(total > amplitude)) return false;
  if (amp2[c] < 0.5 * amp1[c] || amp2[c] <= amplitude) return false;

  // Require genuine turning points, not a slow monotone drift.
  std::size_t maxima = 0;
  for (std::size_t i = 1; i + 1 < trace.size(); ++i) {
    if (trace[i] > trace[i - 1] && trace[i] >= trace[i + 1]) ++maxima;
  }
  return maxima >= 2;
}

std::vector<SL4Point> oscillation_starts() {
  return {SL4Point{0.25, 0.25, 0.25, 0.25}, SL4Point{0.7, 0.1, 0.1, 0.1},
          SL4Point{0.1, 0.1, 0.4, 0.4}};
}

TwoParamMap scan_two_parameter(std::pair<double, double> alpha_range,
                               std::pair<double, double> beta_range,
                               std::size_t resolution, const SLParams& base,
                               const TwoParamOptions& opt) {
  if (resolution < 50) throw InvalidParameter("two-parameter scan needs resolution >= 50");
  if (!(alpha_range.second > alpha_range.first) ||
      !(beta_range.second > beta_range.first)) {
    throw InvalidParameter("two-parameter ranges must be increasing");
  }
  TwoParamMap map;
  for (std::size_t i = 0; i < resolution; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(resolution - 1);
    map.alpha.push_back(alpha_range.first + t * (alpha_range.second - alpha_range.first));
    map.beta.push_back(beta_range.first + t * (beta_range.second - beta_range.first));
  }
  map.cells.resize(resolution * resolution);
  const auto starts = oscillation_starts();

  parallel_for(map.cells.size(), opt.threads, [&](std::size_t idx) {
    const double a = map.alpha[idx % resolution];
    const double b = map.beta[idx / resolution];
    const SL4ODE model(base, [a](double) { return a; }, [b](double) { return b; });
    RegimeCell cell;
    for (const auto& e : find_equilibria(model, 0.0, opt.find)) {
      if (e.stability == Stability::Stable) ++cell.stable_count;
    }
    for (const auto& s : starts) {
      if (sustained_oscillation(model, 0.0, Eigen::Vector3d(s[0], s[1], s[2]),
                                opt.oscillation_time, opt.oscillation_h,
                                opt.oscillation_amplitude)) {
        cell.oscillating = true;
        break;
      }
    }
    map.cells[idx] = cell;
  });
  return map;
}

}  // namespace hetdyn
