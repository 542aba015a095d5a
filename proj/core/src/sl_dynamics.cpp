#include "hetdyn/sl_dynamics.hpp"

#include "hetdyn/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hetdyn {

namespace {

struct NodeRates {
  double g, s, t, f;
};

// Rates at one node given the convolved fields. Each loss term appears
// once with each sign so the four rates cancel term by term.
inline NodeRates sl4_node(double G, double S, double T, double F, double wG,
                          double JT, double JF, double a, double b,
                          const SLParams& p) {
  const double fire = p.phi(wG) * F;
  const double recruit = p.omega(wG) * S;
  const double invG = a * G * JF;
  const double invS = a * S * JF;
  const double invT = a * T * JF;
  const double sap = b * G * JT;
  const double sdeath = p.mu * S;
  const double tdeath = p.nu * T;
  return {sdeath + tdeath + fire - invG - sap,
          -sdeath - recruit - invS + sap,
          -tdeath + recruit - invT,
          invG + invS + invT - fire};
}

// JF is the forest seed field, the kernel applied to F = 1 - G.
inline double gf_node(double G, double wG, double JF, double a,
                      const SigmoidResponse& phi) {
  return phi(wG) * (1.0 - G) - a * G * JF;
}

void check_grid(const DiscreteConvolution& conv, std::size_t n,
                const char* what) {
  if (conv.grid().size() != n) {
    throw DimensionMismatch(std::string(what) +
                            ": convolution grid does not match the field");
  }
}

}  // namespace

void SLParams::validate() const {
  if (!(mu >= 0.0)) throw InvalidParameter("mu (sapling mortality) must be >= 0");
  if (!(nu >= 0.0)) throw InvalidParameter("nu (tree mortality) must be >= 0");
  omega.validate();
  phi.validate();
  alpha.validate();
  beta.validate();
  if (!(sigma_F > 0.0) || !(sigma_T > 0.0) || !(sigma_W > 0.0)) {
    throw InvalidParameter("kernel sigmas must be positive");
  }
}

SLState SLState::uniform(std::size_t n, const SL4Point& v) {
  const auto m = static_cast<Eigen::Index>(n);
  return {Field::Constant(m, v[0]), Field::Constant(m, v[1]),
          Field::Constant(m, v[2]), Field::Constant(m, v[3])};
}

SLState SLState::from_stacked(const Field& stacked) {
  if (stacked.size() % 4 != 0) {
    throw DimensionMismatch("stacked SL state length must be a multiple of 4");
  }
  const auto n = static_cast<std::size_t>(stacked.size() / 4);
  return {component(stacked, 0, n), component(stacked, 1, n),
          component(stacked, 2, n), component(stacked, 3, n)};
}

Field SLState::stacked() const {
  const auto n = G.size();
  Field out(4 * n);
  out << G, S, T, F;
  return out;
}

double SLState::simplex_violation() const {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < G.size(); ++i) {
    worst = std::max(worst, std::abs(G[i] + S[i] + T[i] + F[i] - 1.0));
    worst = std::max({worst, -G[i], -S[i], -T[i], -F[i]});
  }
  return worst;
}

double rhs_grassforest_nonspatial(double G, double alpha,
                                  const SigmoidResponse& phi) {
  return (1.0 - G) * (phi(G) - alpha * G);
}

SL4Point rhs_sl4_nonspatial(const SL4Point& x, double alpha, double beta,
                            const SLParams& params) {
  const double sum = x[0] + x[1] + x[2] + x[3];
  const double neg = std::min({x[0], x[1], x[2], x[3], 0.0});
  if (std::abs(sum - 1.0) > 1e-6 || neg < -1e-6) {
    throw InvalidState("four-type state is off the simplex (sum " +
                       std::to_string(sum) + ")");
  }
  return sl4_local_rates(x, alpha, beta, params);
}

SL4Point sl4_local_rates(const SL4Point& x, double alpha, double beta,
                         const SLParams& params) noexcept {
  const NodeRates r =
      sl4_node(x[0], x[1], x[2], x[3], x[0], x[2], x[3], alpha, beta, params);
  return {r.g, r.s, r.t, r.f};
}

SLKernels SLKernels::build(const Grid1D& grid, const SLParams& params) {
  const bool norm = params.normalize_kernels && default_normalization(params.bc);
  auto make = [&](double s) {
    return std::make_shared<const DiscreteConvolution>(
        build_convolution(grid, GaussianKernel(s), params.bc, norm));
  };
  SLKernels k;
  k.w = make(params.sigma_W);
  k.seed_F = params.sigma_F == params.sigma_W ? k.w : make(params.sigma_F);
  if (params.sigma_T == params.sigma_W) {
    k.seed_T = k.w;
  } else if (params.sigma_T == params.sigma_F) {
    k.seed_T = k.seed_F;
  } else {
    k.seed_T = make(params.sigma_T);
  }
  return k;
}

SLKernels SLKernels::localized(const Grid1D& grid) {
  auto id = std::make_shared<const DiscreteConvolution>(
      DiscreteConvolution::identity(grid));
  return {id, id, id};
}

Field rhs_grassforest_spatial(const Field& G, const DiscreteConvolution& conv_w,
                              const DiscreteConvolution& conv_F,
                              const Field& alpha, const SigmoidResponse& phi) {
  const auto n = static_cast<std::size_t>(G.size());
  check_grid(conv_w, n, "rhs_grassforest_spatial");
  check_grid(conv_F, n, "rhs_grassforest_spatial");
  if (alpha.size() != G.size()) {
    throw DimensionMismatch("rhs_grassforest_spatial: alpha length mismatch");
  }
  const Field wG = conv_w.apply(G);
  const Field JF = conv_F.apply((1.0 - G.array()).matrix());
  Field out(G.size());
  for (Eigen::Index i = 0; i < G.size(); ++i) {
    out[i] = gf_node(G[i], wG[i], JF[i], alpha[i], phi);
  }
  return out;
}

SLState rhs_sl4_spatial(const SLState& s, const SLKernels& k, const Field& alpha,
                        const Field& beta, const SLParams& params) {
  const std::size_t n = s.size();
  check_grid(*k.w, n, "rhs_sl4_spatial");
  check_grid(*k.seed_T, n, "rhs_sl4_spatial");
  check_grid(*k.seed_F, n, "rhs_sl4_spatial");
  if (alpha.size() != s.G.size() || beta.size() != s.G.size()) {
    throw DimensionMismatch("rhs_sl4_spatial: gradient length mismatch");
  }
  if (s.simplex_violation() > 1e-6) {
    throw InvalidState("rhs_sl4_spatial: state is off the simplex");
  }
  const Field wG = k.w->apply(s.G);
  const Field JT = k.seed_T->apply(s.T);
  const Field JF = k.seed_F->apply(s.F);
  SLState out{Field(s.G.size()), Field(s.G.size()), Field(s.G.size()),
              Field(s.G.size())};
  for (Eigen::Index i = 0; i < s.G.size(); ++i) {
    const NodeRates r = sl4_node(s.G[i], s.S[i], s.T[i], s.F[i], wG[i], JT[i],
                                 JF[i], alpha[i], beta[i], params);
    out.G[i] = r.g;
    out.S[i] = r.s;
    out.T[i] = r.t;
    out.F[i] = r.f;
  }
  return out;
}

// ---------------------------------------------------------------------------

GrassForestSystem::GrassForestSystem(const Grid1D& grid, const SLParams& params)
    : GrassForestSystem(grid, params, SLKernels::build(grid, params)) {}

GrassForestSystem::GrassForestSystem(const Grid1D& grid, const SLParams& params,
                                     SLKernels kernels)
    : grid_(grid), params_(params), kernels_(std::move(kernels)) {
  params_.validate();
  alpha_ = params_.alpha.sample(grid_);
}

void GrassForestSystem::rhs(const Field& G, Field& rate) const {
  const auto n = static_cast<Eigen::Index>(grid_.size());
  if (G.size() != n) throw DimensionMismatch("grass-forest state length mismatch");
  thread_local Field wG, F, JF;
  kernels_.w->apply_into(G, wG);
  F = 1.0 - G.array();
  kernels_.seed_F->apply_into(F, JF);
  rate.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    rate[i] = gf_node(G[i], wG[i], JF[i], alpha_[i], params_.phi);
  }
}

Eigen::MatrixXd GrassForestSystem::reduced_jacobian(const Field& G,
                                                    double step) const {
  // Perturbing G_j shifts each convolved field by step * column j, so
  // every finite-difference column costs O(n) instead of a matvec.
  const auto n = static_cast<Eigen::Index>(grid_.size());
  const Field wG = kernels_.w->apply(G);
  const Field JF = kernels_.seed_F->apply((1.0 - G.array()).matrix());
  const auto& Mw = kernels_.w->matrix();
  const auto& MF = kernels_.seed_F->matrix();
  Eigen::MatrixXd jac(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double dw = step * Mw(i, j);
      const double dF = -step * MF(i, j);
      const double dg = i == j ? step : 0.0;
      const double up = gf_node(G[i] + dg, wG[i] + dw, JF[i] + dF, alpha_[i],
                                params_.phi);
      const double dn = gf_node(G[i] - dg, wG[i] - dw, JF[i] - dF, alpha_[i],
                                params_.phi);
      jac(i, j) = (up - dn) / (2.0 * step);
    }
  }
  return jac;
}

SL4System::SL4System(const Grid1D& grid, const SLParams& params)
    : SL4System(grid, params, SLKernels::build(grid, params)) {}

SL4System::SL4System(const Grid1D& grid, const SLParams& params,
                     SLKernels kernels)
    : grid_(grid), params_(params), kernels_(std::move(kernels)) {
  params_.validate();
  alpha_ = params_.alpha.sample(grid_);
  beta_ = params_.beta.sample(grid_);
}

void SL4System::rhs(const Field& state, Field& rate) const {
  const std::size_t n = grid_.size();
  const auto m = static_cast<Eigen::Index>(n);
  if (state.size() != 4 * m) throw DimensionMismatch("SL4 state length mismatch");
  thread_local Field wG, JT, JF;
  const auto G = component(state, 0, n);
  const auto S = component(state, 1, n);
  const auto T = component(state, 2, n);
  const auto F = component(state, 3, n);
  wG.noalias() = kernels_.w->matrix() * G;
  JT.noalias() = kernels_.seed_T->matrix() * T;
  JF.noalias() = kernels_.seed_F->matrix() * F;
  rate.resize(4 * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const NodeRates r = sl4_node(G[i], S[i], T[i], F[i], wG[i], JT[i], JF[i],
                                 alpha_[i], beta_[i], params_);
    rate[i] = r.g;
    rate[m + i] = r.s;
    rate[2 * m + i] = r.t;
    rate[3 * m + i] = r.f;
  }
}

Field SL4System::random_admissible(std::uint64_t seed) const {
  InitialCondition ic;
  ic.kind = InitialKind::Random;
  ic.seed = seed;
  return make_sl4_initial(ic, grid_).stacked();
}

Field SL4System::reduce(const Field& state) const {
  return state.head(3 * static_cast<Eigen::Index>(grid_.size()));
}

Field SL4System::expand(const Field& reduced) const {
  const std::size_t n = grid_.size();
  const auto m = static_cast<Eigen::Index>(n);
  Field out(4 * m);
  out.head(3 * m) = reduced;
  out.tail(m) = Field::Ones(m) - component(reduced, 0, n) -
                component(reduced, 1, n) - component(reduced, 2, n);
  return out;
}

Eigen::MatrixXd SL4System::reduced_jacobian(const Field& state,
                                            double step) const {
  const std::size_t n = grid_.size();
  const auto m = static_cast<Eigen::Index>(n);
  const Field full = expand(reduce(state));
  const Field G = component(full, 0, n);
  const Field S = component(full, 1, n);
  const Field T = component(full, 2, n);
  const Field F = component(full, 3, n);
  const Field wG = kernels_.w->apply(G);
  const Field JT = kernels_.seed_T->apply(T);
  const Field JF = kernels_.seed_F->apply(F);
  const auto& Mw = kernels_.w->matrix();
  const auto& MT = kernels_.seed_T->matrix();
  const auto& MF = kernels_.seed_F->matrix();

  Eigen::MatrixXd jac(3 * m, 3 * m);
  for (int c = 0; c < 3; ++c) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const Eigen::Index col = c * m + j;
      for (Eigen::Index i = 0; i < m; ++i) {
        // Unknown c at node j moves by +-step; F_j moves the other way.
        const double own = i == j ? step : 0.0;
        const double dw = c == 0 ? step * Mw(i, j) : 0.0;
        const double dT = c == 2 ? step * MT(i, j) : 0.0;
        const double dF = -step * MF(i, j);
        const double dGi = c == 0 ? own : 0.0;
        const double dSi = c == 1 ? own : 0.0;
        const double dTi = c == 2 ? own : 0.0;
        const NodeRates up =
            sl4_node(G[i] + dGi, S[i] + dSi, T[i] + dTi, F[i] - own,
                     wG[i] + dw, JT[i] + dT, JF[i] + dF, alpha_[i], beta_[i],
                     params_);
        const NodeRates dn =
            sl4_node(G[i] - dGi, S[i] - dSi, T[i] - dTi, F[i] + own,
                     wG[i] - dw, JT[i] - dT, JF[i] - dF, alpha_[i], beta_[i],
                     params_);
        const double inv = 1.0 / (2.0 * step);
        jac(i, col) = (up.g - dn.g) * inv;
        jac(m + i, col) = (up.s - dn.s) * inv;
        jac(2 * m + i, col) = (up.t - dn.t) * inv;
      }
    }
  }
  return jac;
}

// ---------------------------------------------------------------------------

std::string_view to_string(InitialKind k) noexcept {
  switch (k) {
    case InitialKind::Uniform:
      return "uniform";
    case InitialKind::Ramp:
      return "ramp";
    case InitialKind::Seed:
      return "seed";
    case InitialKind::Random:
      return "random";
  }
  return "uniform";
}

InitialKind initial_kind_from_string(std::string_view s) {
  if (s == "uniform") return InitialKind::Uniform;
  if (s == "ramp") return InitialKind::Ramp;
  if (s == "seed") return InitialKind::Seed;
  if (s == "random") return InitialKind::Random;
  throw InvalidParameter("unknown initial condition kind '" + std::string(s) + "'");
}

SL4Point random_simplex_point(std::uint64_t seed, std::uint64_t counter) {
  SL4Point p{};
  double sum = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const double u = 0.5 * (counter_uniform(seed, 4 * counter + k) + 1.0);
    p[k] = -std::log1p(-u);  // Exp(1); u < 1 so finite
    sum += p[k];
  }
  for (double& v : p) v /= sum;
  return p;
}

SLState make_sl4_initial(const InitialCondition& ic, const Grid1D& grid) {
  const std::size_t n = grid.size();
  auto check_simplex = [](const SL4Point& v) {
    const double sum = v[0] + v[1] + v[2] + v[3];
    if (std::abs(sum - 1.0) > 1e-9 || *std::min_element(v.begin(), v.end()) < 0.0) {
      throw InvalidParameter("initial-condition state must lie on the simplex");
    }
  };
  SLState s = SLState::uniform(n, ic.left);
  switch (ic.kind) {
    case InitialKind::Uniform:
      check_simplex(ic.left);
      break;
    case InitialKind::Ramp: {
      check_simplex(ic.left);
      check_simplex(ic.right);
      for (std::size_t i = 0; i < n; ++i) {
        const double x = grid.node(i);
        double t;
        if (ic.width > 0.0) {
          t = 0.5 * (1.0 + std::tanh((x - ic.location) / ic.width));
        } else {
          t = x >= ic.location ? 1.0 : 0.0;
        }
        const auto k = static_cast<Eigen::Index>(i);
        s.G[k] = (1 - t) * ic.left[0] + t * ic.right[0];
        s.S[k] = (1 - t) * ic.left[1] + t * ic.right[1];
        s.T[k] = (1 - t) * ic.left[2] + t * ic.right[2];
        s.F[k] = 1.0 - s.G[k] - s.S[k] - s.T[k];
      }
      break;
    }
    case InitialKind::Seed: {
      if (!(ic.amplitude >= 0.0 && ic.amplitude <= 1.0) || !(ic.width > 0.0)) {
        throw InvalidParameter("seed IC needs amplitude in [0,1] and width > 0");
      }
      for (std::size_t i = 0; i < n; ++i) {
        const double z = (grid.node(i) - ic.location) / ic.width;
        const double f = ic.amplitude * std::exp(-0.5 * z * z);
        const auto k = static_cast<Eigen::Index>(i);
        s.G[k] = 1.0 - f;
        s.S[k] = 0.0;
        s.T[k] = 0.0;
        s.F[k] = f;
      }
      break;
    }
    case InitialKind::Random: {
      for (std::size_t i = 0; i < n; ++i) {
        const SL4Point p = random_simplex_point(ic.seed, i);
        const auto k = static_cast<Eigen::Index>(i);
        s.G[k] = p[0];
        s.S[k] = p[1];
        s.T[k] = p[2];
        s.F[k] = p[3];
      }
      break;
    }
  }
  return s;
}

Field make_grassforest_initial(const InitialCondition& ic, const Grid1D& grid) {
  return make_sl4_initial(ic, grid).G;
}

}  // namespace hetdyn
