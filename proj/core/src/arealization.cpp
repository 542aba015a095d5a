#include "hetdyn/arealization.hpp"

#include "hetdyn/diagnostics.hpp"
#include "hetdyn/error.hpp"
#include "hetdyn/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hetdyn {

void ArealParams::validate() const {
  if (!(D_E > 0.0 && D_CE > 0.0 && D_N > 0.0 && D_CN > 0.0)) {
    throw InvalidParameter("arealization diffusivities must be positive");
  }
  if (!(chi1 >= 0.0 && chi2 >= 0.0)) {
    throw InvalidParameter("chemotactic strengths must be >= 0");
  }
  if (!(alpha_sat > 0.0)) throw InvalidParameter("Ricker parameter must be positive");
  if (!std::isfinite(k1) || !std::isfinite(k2)) {
    throw InvalidParameter("competition coefficients must be finite");
  }
  if (use_path) {
    path.validate();
  } else if (!(morphogens.first >= 0.0 && morphogens.second >= 0.0)) {
    throw InvalidParameter("morphogen sources must be >= 0");
  }
}

MorphogenPair ArealParams::morphogens_at(double x) const {
  return use_path ? path(x) : morphogens;
}

double ricker(double z, double a) { return a * z * std::exp(-a * z); }

Eigen::Matrix2d reaction_jacobian(double E, double N, double k1, double k2) {
  Eigen::Matrix2d J;
  J << 1.0 - 2.0 * E - k1 * N, -k1 * E,
       -k2 * N, 1.0 - 2.0 * N - k2 * E;
  return J;
}

namespace {

Eigen::Vector2d lv_residual(const Eigen::Vector2d& u, double rE, double rN,
                            double k1, double k2) {
  return {u[0] * (1.0 - u[0] - k1 * u[1]) + rE, u[1] * (1.0 - u[1] - k2 * u[0]) + rN};
}

bool stable_2x2(const Eigen::Matrix2d& J) {
  return J.trace() < 0.0 && J.determinant() > 0.0;
}

}  // namespace

std::vector<HomogeneousEquilibrium> homogeneous_equilibria(double rE, double rN,
                                                           double k1, double k2) {
  if (!(rE >= 0.0 && rN >= 0.0)) throw InvalidParameter("morphogen sources must be >= 0");
  constexpr double tol = 1e-12;
  std::vector<std::pair<Eigen::Vector2d, double>> roots;
  for (int a = 0; a < 7; ++a) {
    for (int b = 0; b < 7; ++b) {
      Eigen::Vector2d u(1.5 * a / 6.0, 1.5 * b / 6.0);
      Eigen::Vector2d f = lv_residual(u, rE, rN, k1, k2);
      bool ok = false;
      for (int it = 0; it < 200; ++it) {
        const Eigen::Vector2d step =
            reaction_jacobian(u[0], u[1], k1, k2).fullPivLu().solve(-f);
        if (!step.allFinite()) break;
        double lambda = 1.0;
        bool moved = false;
        while (lambda >= 1.0 / 1024.0) {
          const Eigen::Vector2d trial = u + lambda * step;
          const Eigen::Vector2d ft = lv_residual(trial, rE, rN, k1, k2);
          if (ft.norm() < (1.0 - 1e-4 * lambda) * f.norm()) {
            u = trial;
            f = ft;
            moved = true;
            break;
          }
          lambda *= 0.5;
        }
        if (!moved) break;
        if (f.lpNorm<Eigen::Infinity>() <= tol && step.lpNorm<Eigen::Infinity>() < 1e-13) {
          break;
        }
      }
      ok = f.allFinite() && f.lpNorm<Eigen::Infinity>() <= tol;
      if (!ok || u.minCoeff() < -1e-12) continue;
      if (u.lpNorm<1>() < 1e-10) continue;  // the trivial root of the unforced system
      // Degenerate roots converge slowly from different sides; treat two
      // candidates as one when the residual vanishes between them too.
      // Near a degenerate root Newton stalls at different points from
      // different starts; candidates whose midpoint is also a root to
      // 1e-10 are one root, represented by the smaller residual.
      const double res = f.lpNorm<Eigen::Infinity>();
      bool dup = false;
      for (auto& [r, r_res] : roots) {
        const double d = (r - u).norm();
        const bool same =
            d < 1e-8 ||
            (d < 1e-3 &&
             lv_residual(0.5 * (r + u), rE, rN, k1, k2).lpNorm<Eigen::Infinity>() <= 1e-10);
        if (same) {
          if (res < r_res) {
            r = u;
            r_res = res;
          }
          dup = true;
          break;
        }
      }
      if (!dup) roots.emplace_back(u, res);
    }
  }
  std::sort(roots.begin(), roots.end(),
            [](const auto& a, const auto& b) { return a.first[0] > b.first[0]; });
  std::vector<HomogeneousEquilibrium> out;
  for (const auto& [r, r_res] : roots) {
    HomogeneousEquilibrium e;
    e.E = std::max(r[0], 0.0);
    e.N = std::max(r[1], 0.0);
    e.stable_k0 = stable_2x2(reaction_jacobian(e.E, e.N, k1, k2));
    e.residual = lv_residual({e.E, e.N}, rE, rN, k1, k2).lpNorm<Eigen::Infinity>();
    out.push_back(e);
  }
  return out;
}

std::optional<std::pair<double, double>> bistable_window(
    double rN, std::pair<double, double> range, double k1, double k2) {
  if (!(range.second > range.first)) throw InvalidParameter("rho_E range must increase");
  auto multi = [&](double rE) {
    return homogeneous_equilibria(rE, rN, k1, k2).size() >= 3;
  };
  constexpr int samples = 400;
  std::vector<bool> m(samples + 1);
  std::vector<double> x(samples + 1);
  for (int i = 0; i <= samples; ++i) {
    x[i] = range.first + (range.second - range.first) * i / samples;
    m[i] = multi(x[i]);
  }
  auto bisect = [&](double lo, double hi, bool lo_val) {
    while (hi - lo > 1e-5) {
      const double mid = 0.5 * (lo + hi);
      (multi(mid) == lo_val ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  int first = -1, last = -1;
  for (int i = 0; i <= samples; ++i) {
    if (m[i]) {
      if (first < 0) first = i;
      last = i;
    }
  }
  if (first < 0) return std::nullopt;
  const double lo = first == 0 ? x[0] : bisect(x[first - 1], x[first], false);
  const double hi = last == samples ? x[samples] : bisect(x[last], x[last + 1], true);
  return std::make_pair(lo, hi);
}

Eigen::Matrix4d linearized_matrix(const HomogeneousEquilibrium& eq, double k,
                                  const ArealParams& p) {
  const Eigen::Matrix2d J = reaction_jacobian(eq.E, eq.N, p.k1, p.k2);
  const double k2 = k * k;
  Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
  M(0, 0) = J(0, 0) - p.D_E * k2;
  M(0, 1) = p.chi1 * ricker(eq.E, p.alpha_sat) * k2;
  M(0, 2) = J(0, 1);
  M(1, 0) = 1.0;
  M(1, 1) = -1.0 - p.D_CE * k2;
  M(2, 0) = J(1, 0);
  M(2, 2) = J(1, 1) - p.D_N * k2;
  M(2, 3) = p.chi2 * ricker(eq.N, p.alpha_sat) * k2;
  M(3, 2) = 1.0;
  M(3, 3) = -1.0 - p.D_CN * k2;
  return M;
}

DispersionResult dispersion(const HomogeneousEquilibrium& eq, const ArealParams& p,
                            double L, std::size_t n_modes) {
  if (!eq.stable_k0) {
    throw PreconditionFailed("dispersion needs an equilibrium stable without space");
  }
  if (!(L > 0.0)) throw InvalidParameter("domain length must be positive");
  DispersionResult r;
  r.max_growth = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m <= n_modes; ++m) {
    const double k = static_cast<double>(m) * M_PI / L;
    const Eigen::Vector4cd ev =
        Eigen::EigenSolver<Eigen::Matrix4d>(linearized_matrix(eq, k, p), false).eigenvalues();
    double g = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 4; ++i) g = std::max(g, ev[i].real());
    r.wavenumbers.push_back(k);
    r.growth.push_back(g);
    if (g > r.max_growth) {
      r.max_growth = g;
      r.argmax_k = k;
    }
  }
  return r;
}

double TuringHeatmap::at(double rE, double rN) const {
  auto nearest = [](const std::vector<double>& v, double x) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (std::abs(v[i] - x) < std::abs(v[best] - x)) best = i;
    }
    return static_cast<Eigen::Index>(best);
  };
  return growth(nearest(rho_N, rN), nearest(rho_E, rE));
}

bool TuringHeatmap::positive_anywhere() const {
  for (Eigen::Index i = 0; i < growth.size(); ++i) {
    if (growth.data()[i] > 0.0) return true;
  }
  return false;
}

namespace {

double max_stable_growth(double rE, double rN, const ArealParams& p, double L,
                         std::size_t n_modes) {
  double best = std::numeric_limits<double>::quiet_NaN();
  for (const auto& e : homogeneous_equilibria(rE, rN, p.k1, p.k2)) {
    if (!e.stable_k0) continue;
    const double g = dispersion(e, p, L, n_modes).max_growth;
    best = std::isnan(best) ? g : std::max(best, g);
  }
  return best;
}

}  // namespace

TuringHeatmap turing_heatmap(std::pair<double, double> rE_range,
                             std::pair<double, double> rN_range, std::size_t res,
                             const ArealParams& p, double L, std::size_t n_modes,
                             std::size_t threads) {
  if (res < 50) throw InvalidParameter("Turing heatmap needs resolution >= 50");
  p.validate();
  TuringHeatmap h;
  for (std::size_t i = 0; i < res; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(res - 1);
    h.rho_E.push_back(rE_range.first + t * (rE_range.second - rE_range.first));
    h.rho_N.push_back(rN_range.first + t * (rN_range.second - rN_range.first));
  }
  const auto n = static_cast<Eigen::Index>(res);
  h.growth.resize(n, n);
  parallel_for(res * res, threads, [&](std::size_t idx) {
    const std::size_t iN = idx / res, iE = idx % res;
    h.growth(static_cast<Eigen::Index>(iN), static_cast<Eigen::Index>(iE)) =
        max_stable_growth(h.rho_E[iE], h.rho_N[iN], p, L, n_modes);
  });
  return h;
}

double path_unstable_fraction(MorphogenPair p1, MorphogenPair p2, const ArealParams& p,
                              double L, std::size_t samples) {
  if (samples < 2) throw InvalidParameter("need at least two path samples");
  std::size_t unstable = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(samples - 1);
    const double g = max_stable_growth(p1.first + t * (p2.first - p1.first),
                                       p1.second + t * (p2.second - p1.second), p,
                                       L, 200);
    if (g > 0.0) ++unstable;
  }
  return static_cast<double>(unstable) / static_cast<double>(samples);
}

// ---------------------------------------------------------------------------

Field areal_initial_state(const ArealParams& p, const Grid1D& grid, double noise,
                          std::uint64_t seed) {
  const std::size_t n = grid.size();
  const auto m = static_cast<Eigen::Index>(n);
  Field s(4 * m);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [rE, rN] = p.morphogens_at(grid.node(i));
    const auto eqs = homogeneous_equilibria(rE, rN, p.k1, p.k2);
    const HomogeneousEquilibrium* pick = nullptr;
    for (const auto& e : eqs) {
      if (!e.stable_k0) continue;
      const bool better = !pick || (rE >= rN ? e.E > pick->E : e.N > pick->N);
      if (better) pick = &e;
    }
    if (!pick) {
      throw PreconditionFailed("no k0-stable equilibrium for the local morphogens");
    }
    const auto k = static_cast<Eigen::Index>(i);
    s[k] = pick->E + noise * counter_uniform(seed, 2 * i);
    s[m + k] = pick->E;
    s[2 * m + k] = pick->N + noise * counter_uniform(seed, 2 * i + 1);
    s[3 * m + k] = pick->N;
  }
  return s;
}

void ArealStepper::Tridiagonal::solve(Eigen::Ref<Field> d) const {
  const Eigen::Index n = d.size();
  d[0] /= diag[0];
  for (Eigen::Index i = 1; i < n; ++i) d[i] = (d[i] - lower[i] * d[i - 1]) / diag[i];
  for (Eigen::Index i = n - 2; i >= 0; --i) d[i] -= upper[i] * d[i + 1];
}

ArealStepper::Tridiagonal ArealStepper::factor(double D) const {
  // (I - h D L) with the Neumann Laplacian on trapezoid control volumes:
  // interior (u[i-1] - 2u[i] + u[i+1]) / dx^2, ends 2 (u[1] - u[0]) / dx^2.
  const auto n = static_cast<Eigen::Index>(grid_.size());
  const double r = h_ * D / (grid_.spacing() * grid_.spacing());
  Field a = Field::Constant(n, -r), b = Field::Constant(n, 1.0 + 2.0 * r),
        c = Field::Constant(n, -r);
  a[0] = 0.0;
  c[0] = -2.0 * r;
  a[n - 1] = -2.0 * r;
  c[n - 1] = 0.0;
  // Forward elimination once; solve() replays it on each right-hand side.
  Tridiagonal t{a, Field(n), Field(n)};
  t.diag[0] = b[0];
  t.upper[0] = c[0] / t.diag[0];
  for (Eigen::Index i = 1; i < n; ++i) {
    t.diag[i] = b[i] - a[i] * t.upper[i - 1];
    t.upper[i] = i + 1 < n ? c[i] / t.diag[i] : 0.0;
  }
  return t;
}

ArealStepper::ArealStepper(const ArealParams& params, const Grid1D& grid, double h)
    : params_(params), grid_(grid), h_(h) {
  params_.validate();
  if (!(h > 0.0) || h > 0.2) {
    throw InvalidParameter("arealization step must satisfy 0 < h <= 0.2");
  }
  const auto n = static_cast<Eigen::Index>(grid.size());
  rho_E_.resize(n);
  rho_N_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto [rE, rN] = params_.morphogens_at(grid.node(static_cast<std::size_t>(i)));
    rho_E_[i] = rE;
    rho_N_[i] = rN;
  }
  solve_E_ = factor(params_.D_E);
  solve_CE_ = factor(params_.D_CE);
  solve_N_ = factor(params_.D_N);
  solve_CN_ = factor(params_.D_CN);
}

void ArealStepper::chemotaxis(const Field& u, const Field& c, double chi,
                              Field& out) const {
  // -chi d/dx (Phi(u) dc/dx) as a difference of face fluxes; the end
  // control volumes are half cells and the boundary fluxes vanish.
  const Eigen::Index n = u.size();
  const double dx = grid_.spacing();
  out.resize(n);
  double left = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double right = 0.0;
    if (i + 1 < n) {
      const double face = 0.5 * (u[i] + u[i + 1]);
      right = ricker(face, params_.alpha_sat) * (c[i + 1] - c[i]) / dx;
    }
    const double width = (i == 0 || i + 1 == n) ? 0.5 * dx : dx;
    out[i] = -chi * (right - left) / width;
    left = right;
  }
}

void ArealStepper::step(Field& s) const {
  const auto n = static_cast<Eigen::Index>(grid_.size());
  auto E = s.segment(0, n);
  auto CE = s.segment(n, n);
  auto N = s.segment(2 * n, n);
  auto CN = s.segment(3 * n, n);
  thread_local Field E0, N0, chemE, chemN;
  E0 = E;
  N0 = N;
  chemotaxis(E0, CE, params_.chi1, chemE);
  chemotaxis(N0, CN, params_.chi2, chemN);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double e = E0[i], v = N0[i];
    E[i] = e + h_ * (e * (1.0 - e - params_.k1 * v) + rho_E_[i] + chemE[i]);
    N[i] = v + h_ * (v * (1.0 - v - params_.k2 * e) + rho_N_[i] + chemN[i]);
    CE[i] += h_ * (e - CE[i]);
    CN[i] += h_ * (v - CN[i]);
  }
  solve_E_.solve(E);
  solve_CE_.solve(CE);
  solve_N_.solve(N);
  solve_CN_.solve(CN);
}

SimulationRun simulate_areal(const ArealParams& params, const Grid1D& grid,
                             const ArealRunOptions& opt) {
  if (!(opt.t_end >= 0.0)) throw InvalidParameter("t_end must be >= 0");
  if (opt.snapshot_stride < 1 || opt.observe_stride < 1) {
    throw InvalidParameter("strides must be >= 1");
  }
  const ArealStepper stepper(params, grid, opt.h);
  const auto m = static_cast<Eigen::Index>(grid.size());
  Field state = opt.initial ? *opt.initial
                            : areal_initial_state(params, grid, opt.noise, opt.seed);
  if (state.size() != 4 * m) {
    throw DimensionMismatch("arealization state must stack four fields");
  }
  SimulationRun run;
  run.grid = grid;
  run.components = 4;
  run.times.push_back(0.0);
  run.snapshots.push_back(state);
  if (opt.observer) opt.observer(0.0, state);
  const auto steps = static_cast<std::size_t>(std::llround(opt.t_end / opt.h));
  double t = 0.0;
  for (std::size_t k = 1; k <= steps; ++k) {
    stepper.step(state);
    t = static_cast<double>(k) * opt.h;
    if (!state.allFinite()) {
      throw IntegrationBlowup("non-finite arealization state after step " +
                                  std::to_string(k),
                              static_cast<double>(k - 1) * opt.h);
    }
    Eigen::Index where = 0;
    const double low = state.minCoeff(&where);
    if (low < -1e-6) {
      std::ostringstream msg;
      static const char* names[] = {"E", "C_E", "N", "C_N"};
      msg << "field " << names[where / m] << " fell to " << low << " at x="
          << grid.node(static_cast<std::size_t>(where % m)) << ", t=" << t;
      throw IntegrationBlowup(msg.str(), static_cast<double>(k - 1) * opt.h);
    }
    if (opt.observer && k % opt.observe_stride == 0) opt.observer(t, state);
    if (opt.store_snapshots && k % opt.snapshot_stride == 0) {
      run.times.push_back(t);
      run.snapshots.push_back(state);
    }
  }
  if (run.times.back() != t) {
    run.times.push_back(t);
    run.snapshots.push_back(state);
  }
  run.final_time = t;
  run.final_state = std::move(state);
  return run;
}

std::string_view to_string(OutcomeKind k) noexcept {
  switch (k) {
    case OutcomeKind::Homogeneous:
      return "homogeneous";
    case OutcomeKind::Front:
      return "front";
    case OutcomeKind::Spikes:
      return "spikes";
    case OutcomeKind::Irregular:
      return "irregular";
  }
  return "irregular";
}

Outcome classify_outcome(const Field& E, const Grid1D& grid, double r_lo, double r_hi) {
  Outcome out;
  if (E.maxCoeff() - E.minCoeff() < 1e-3) return out;
  out.spike_positions = spike_positions(E, grid, std::make_pair(r_lo - 2.0, r_hi + 2.0));
  out.spikes = out.spike_positions.size();
  if (out.spikes > 0) {
    out.kind = OutcomeKind::Spikes;
    return out;
  }
  // A front is a single steep transition: one crossing of the mid level.
  const double mid = 0.5 * (E.maxCoeff() + E.minCoeff());
  std::size_t crossings = 0;
  for (Eigen::Index i = 0; i + 1 < E.size(); ++i) {
    if ((E[i] - mid) * (E[i + 1] - mid) < 0.0 || (E[i] == mid && i > 0)) ++crossings;
  }
  out.kind = crossings == 1 ? OutcomeKind::Front : OutcomeKind::Irregular;
  return out;
}

}  // namespace hetdyn
