#include <doctest.h>

#include "hetdyn/arealization.hpp"
#include "hetdyn/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace hetdyn;

namespace {

bool has_root(const std::vector<HomogeneousEquilibrium>& eqs, double E, double N, double tol) {
  for (const auto& e : eqs) {
    if (std::abs(e.E - E) <= tol && std::abs(e.N - N) <= tol) return true;
  }
  return false;
}

HomogeneousEquilibrium best_stable(double rE, double rN) {
  HomogeneousEquilibrium out;
  double best = -1e300;
  for (const auto& e : homogeneous_equilibria(rE, rN)) {
    if (!e.stable_k0) continue;
    const double g = dispersion(e, ArealParams{}).max_growth;
    if (g > best) {
      best = g;
      out = e;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("default arealization parameters") {
  const ArealParams p;
  CHECK(p.k1 == 2.0);
  CHECK(p.k2 == 2.0);
  CHECK(p.D_E == 0.2);
  CHECK(p.D_CE == 0.2);
  CHECK(p.D_N == 0.2);
  CHECK(p.D_CN == 0.2);
  CHECK(p.chi1 == 1.5);
  CHECK(p.chi2 == 1.5);
  CHECK(p.alpha_sat == 1.2);
}

TEST_CASE("ricker saturation") {
  CHECK(ricker(0.0, 1.2) == 0.0);
  CHECK(ricker(1.0 / 1.2, 1.2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  for (double a : {0.5, 1.2, 3.0}) {
    const double d = 1e-6;
    CHECK(ricker(0.5 / a + d, a) > ricker(0.5 / a, a));
    CHECK(ricker(2.0 / a + d, a) < ricker(2.0 / a, a));
  }
}

TEST_CASE("homogeneous equilibria of the unforced system") {
  const auto eqs = homogeneous_equilibria(0.0, 0.0);
  REQUIRE(eqs.size() == 3);
  CHECK(has_root(eqs, 1.0, 0.0, 1e-10));
  CHECK(has_root(eqs, 0.0, 1.0, 1e-10));
  CHECK(has_root(eqs, 1.0 / 3.0, 1.0 / 3.0, 1e-10));
  for (const auto& e : eqs) {
    const bool mixed = std::abs(e.E - 1.0 / 3.0) < 1e-6;
    CHECK(e.stable_k0 == !mixed);
    CHECK(e.residual <= 1e-12);
  }
}

TEST_CASE("symmetric forcing has the closed-form symmetric root") {
  for (double r : {0.05, 0.1, 0.3, 0.6}) {
    const double E = (1.0 + std::sqrt(1.0 + 12.0 * r)) / 6.0;
    CHECK(has_root(homogeneous_equilibria(r, r), E, E, 1e-10));
  }
  CHECK((1.0 + std::sqrt(1.0 + 1.2)) / 6.0 == doctest::Approx(0.41387328290318876));
}

TEST_CASE("the cusp has a single equilibrium") {
  const auto eqs = homogeneous_equilibria(0.25, 0.25);
  REQUIRE(eqs.size() == 1);
  // Triple root: Newton converges slowly, so the position is looser than the
  // residual.
  CHECK(eqs[0].E == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(eqs[0].N == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("equilibria match a brute-force sign scan") {
  // Oracle: cells of a 600 x 600 grid on [0, 1.5]^2 where both residuals
  // change sign seed a plain Newton solve; the converged nonnegative roots
  // must coincide with the library's set.
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  for (int sample = 0; sample < 8; ++sample) {
    const double rE = u(rng), rN = u(rng);
    CAPTURE(rE);
    CAPTURE(rN);
    const auto eqs = homogeneous_equilibria(rE, rN);
    const int m = 600;
    const double hgrid = 1.5 / m;
    auto f = [&](double E, double N) { return E * (1 - E - 2 * N) + rE; };
    auto g = [&](double E, double N) { return N * (1 - N - 2 * E) + rN; };
    std::vector<std::pair<double, double>> roots;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        const double E0 = i * hgrid, N0 = j * hgrid;
        double fmin = 1e9, fmax = -1e9, gmin = 1e9, gmax = -1e9;
        for (int a = 0; a < 2; ++a) {
          for (int b = 0; b < 2; ++b) {
            const double fv = f(E0 + a * hgrid, N0 + b * hgrid);
            const double gv = g(E0 + a * hgrid, N0 + b * hgrid);
            fmin = std::min(fmin, fv);
            fmax = std::max(fmax, fv);
            gmin = std::min(gmin, gv);
            gmax = std::max(gmax, gv);
          }
        }
        if (!(fmin <= 0 && fmax >= 0 && gmin <= 0 && gmax >= 0)) continue;
        double E = E0 + 0.5 * hgrid, N = N0 + 0.5 * hgrid;
        for (int it = 0; it < 50; ++it) {
          const double a11 = 1 - 2 * E - 2 * N, a12 = -2 * E, a21 = -2 * N, a22 = 1 - 2 * N - 2 * E;
          const double det = a11 * a22 - a12 * a21;
          const double fv = f(E, N), gv = g(E, N);
          E -= (a22 * fv - a12 * gv) / det;
          N -= (a11 * gv - a21 * fv) / det;
        }
        if (std::abs(f(E, N)) > 1e-12 || std::abs(g(E, N)) > 1e-12 || E < 0 || N < 0) continue;
        bool seen = false;
        for (const auto& [E1, N1] : roots) seen = seen || (std::abs(E1 - E) < 1e-8 && std::abs(N1 - N) < 1e-8);
        if (!seen) roots.emplace_back(E, N);
      }
    }
    CHECK(roots.size() == eqs.size());
    for (const auto& [E, N] : roots) CHECK(has_root(eqs, E, N, 1e-8));
  }
}

TEST_CASE("bistable window") {
  const auto w = bistable_window(0.1);
  REQUIRE(w);
  CHECK(w->first < w->second);
  // Counting equilibria just inside and outside each end.
  CHECK(homogeneous_equilibria(w->first + 1e-4, 0.1).size() == 3);
  CHECK(homogeneous_equilibria(w->second - 1e-4, 0.1).size() == 3);
  CHECK(homogeneous_equilibria(w->first - 1e-4, 0.1).size() == 1);
  CHECK(homogeneous_equilibria(w->second + 1e-4, 0.1).size() == 1);
  CHECK_FALSE(bistable_window(0.3));
}

TEST_CASE("linearized matrix structure") {
  const ArealParams p;
  const HomogeneousEquilibrium eq{0.4138732829031888, 0.4138732829031888, true, 0.0};
  const Eigen::Matrix4d m0 = linearized_matrix(eq, 0.0, p);
  const Eigen::Matrix2d J = reaction_jacobian(eq.E, eq.N, 2.0, 2.0);
  CHECK(m0(0, 0) == J(0, 0));
  CHECK(m0(0, 2) == J(0, 1));
  CHECK(m0(2, 0) == J(1, 0));
  CHECK(m0(2, 2) == J(1, 1));
  CHECK(m0(0, 1) == 0.0);
  CHECK(m0(2, 3) == 0.0);
  CHECK(m0(1, 0) == 1.0);
  CHECK(m0(1, 1) == -1.0);
  const double k = 1.3;
  const Eigen::Matrix4d mk = linearized_matrix(eq, k, p);
  CHECK(mk(0, 1) == doctest::Approx(1.5 * ricker(eq.E, 1.2) * k * k));
  CHECK(mk(1, 1) == doctest::Approx(-1.0 - k * k * 0.2));
  Eigen::Matrix4d P = Eigen::Matrix4d::Zero();
  P(0, 2) = P(1, 3) = P(2, 0) = P(3, 1) = 1.0;
  CHECK((P * mk * P.transpose() - mk).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("dispersion relation") {
  const ArealParams p;
  const auto eq = best_stable(0.45, 0.45);
  const auto d = dispersion(eq, p);
  CHECK(d.growth.size() == d.wavenumbers.size());
  CHECK(d.growth[0] <= 0.0);
  CHECK(d.max_growth == *std::max_element(d.growth.begin(), d.growth.end()));
  CHECK(d.max_growth > 0.0);
  CHECK(d.wavenumbers[1] == doctest::Approx(std::numbers::pi / 40.0));

  ArealParams no_chi = p;
  no_chi.chi1 = no_chi.chi2 = 0.0;
  for (double rE : {0.0, 0.2, 0.45}) {
    for (const auto& e : homogeneous_equilibria(rE, 0.1)) {
      if (!e.stable_k0) continue;
      double at_zero = -1e300, overall = -1e300;
      for (int i = 0; i <= 1000; ++i) {
        const double k = i * 0.01;
        const double g = linearized_matrix(e, k, no_chi).eigenvalues().real().maxCoeff();
        if (i == 0) at_zero = g;
        overall = std::max(overall, g);
      }
      CHECK(overall <= at_zero + 1e-12);
    }
  }
  const auto unstable = homogeneous_equilibria(0.0, 0.0);
  for (const auto& e : unstable) {
    if (!e.stable_k0) CHECK_THROWS_AS(dispersion(e, p), PreconditionFailed);
  }
}

TEST_CASE("stronger adhesion does not shrink growth (reported)") {
  ArealParams doubled;
  doubled.chi1 = doubled.chi2 = 3.0;
  int violations = 0;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.2, 0.6);
  int samples = 0;
  while (samples < 20) {
    const double rE = u(rng), rN = u(rng);
    const auto eq = best_stable(rE, rN);
    const double g1 = dispersion(eq, ArealParams{}).max_growth;
    if (g1 <= 0.0) continue;
    ++samples;
    if (dispersion(eq, doubled).max_growth < g1) ++violations;
  }
  if (violations) MESSAGE(violations << " of 20 samples lost growth when chi doubled");
  CHECK(samples == 20);
}

TEST_CASE("turing heatmap symmetry and the no-adhesion limit") {
  const auto h = turing_heatmap({0.0, 0.6}, {0.0, 0.6}, 50, ArealParams{}, 40.0, 200);
  CHECK(h.positive_anywhere());
  for (Eigen::Index i = 0; i < 50; ++i) {
    for (Eigen::Index j = 0; j < 50; ++j) {
      const double a = h.growth(i, j), b = h.growth(j, i);
      if (std::isnan(a)) {
        CHECK(std::isnan(b));
      } else {
        CHECK(std::abs(a - b) <= 1e-10);
      }
    }
  }
  ArealParams no_chi;
  no_chi.chi1 = no_chi.chi2 = 0.0;
  CHECK_FALSE(turing_heatmap({0.0, 0.6}, {0.0, 0.6}, 50, no_chi).positive_anywhere());
  CHECK_THROWS_AS(turing_heatmap({0.0, 0.6}, {0.0, 0.6}, 10, no_chi), InvalidParameter);
}

TEST_CASE("the default morphogen path crosses the Turing region") {
  const ArealParams p;
  const double f = path_unstable_fraction(p.path.p1, p.path.p2, p);
  CHECK(f > 0.3);
  CHECK(f < 0.7);
}

TEST_CASE("a Turing-stable equilibrium is a fixed point of the scheme") {
  ArealParams p;
  p.morphogens = {0.05, 0.3};
  const auto eqs = homogeneous_equilibria(0.05, 0.3);
  REQUIRE(eqs.size() == 1);
  REQUIRE(eqs[0].stable_k0);
  REQUIRE(dispersion(eqs[0], p).max_growth <= 0.0);
  const Grid1D g(0.0, 40.0, 400);
  ArealRunOptions o;
  o.t_end = 50.0;
  o.noise = 0.0;
  o.store_snapshots = false;
  const auto run = simulate_areal(p, g, o);
  const Field& s = run.final_state;
  CHECK((s.segment(0, 400).array() - eqs[0].E).abs().maxCoeff() <= 1e-10);
  CHECK((s.segment(800, 400).array() - eqs[0].N).abs().maxCoeff() <= 1e-10);
}

TEST_CASE("trapezoid mass changes only through local reaction terms") {
  ArealParams p;
  p.use_path = true;
  const Grid1D g(0.0, 40.0, 200);
  const double h = 0.1;
  const ArealStepper st(p, g, h);
  Field s = areal_initial_state(p, g, 0.05, 3);
  const Field w = g.trapezoid_weights();
  const Eigen::Index n = 200;
  for (int k = 0; k < 20; ++k) {
    const Field E = s.segment(0, n), CE = s.segment(n, n), N = s.segment(2 * n, n), CN = s.segment(3 * n, n);
    const Field rE = E.array() * (1.0 - E.array() - 2.0 * N.array()) + st.rho_E().array();
    const Field rN = N.array() * (1.0 - N.array() - 2.0 * E.array()) + st.rho_N().array();
    const double mE = w.dot(E + h * rE);
    const double mCE = w.dot(CE + h * (E - CE));
    const double mN = w.dot(N + h * rN);
    const double mCN = w.dot(CN + h * (N - CN));
    st.step(s);
    CHECK(w.dot(s.segment(0, n)) == doctest::Approx(mE).epsilon(1e-12));
    CHECK(w.dot(s.segment(n, n)) == doctest::Approx(mCE).epsilon(1e-12));
    CHECK(w.dot(s.segment(2 * n, n)) == doctest::Approx(mN).epsilon(1e-12));
    CHECK(w.dot(s.segment(3 * n, n)) == doctest::Approx(mCN).epsilon(1e-12));
  }
}

TEST_CASE("relabelling E and N maps trajectories onto each other") {
  ArealParams a;
  a.k1 = 1.8;
  a.k2 = 2.3;
  a.chi1 = 1.2;
  a.chi2 = 1.7;
  a.D_E = 0.15;
  a.D_CE = 0.25;
  a.D_N = 0.3;
  a.D_CN = 0.18;
  a.use_path = true;
  a.path = MorphogenPath{{0.3, 0.5}, {0.5, 0.2}, 10.0, 30.0};
  ArealParams b = a;
  std::swap(b.k1, b.k2);
  std::swap(b.chi1, b.chi2);
  std::swap(b.D_E, b.D_N);
  std::swap(b.D_CE, b.D_CN);
  b.path.p1 = {a.path.p1.second, a.path.p1.first};
  b.path.p2 = {a.path.p2.second, a.path.p2.first};
  const Grid1D g(0.0, 40.0, 200);
  const Eigen::Index n = 200;
  const Field sa = areal_initial_state(a, g, 0.01, 4);
  Field sb(4 * n);
  sb << sa.segment(2 * n, n), sa.segment(3 * n, n), sa.segment(0, n), sa.segment(n, n);
  ArealRunOptions o;
  o.t_end = 20.0;
  o.store_snapshots = false;
  o.initial = sa;
  const Field fa = simulate_areal(a, g, o).final_state;
  o.initial = sb;
  const Field fb = simulate_areal(b, g, o).final_state;
  CHECK((fa.segment(0, n) - fb.segment(2 * n, n)).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((fa.segment(3 * n, n) - fb.segment(n, n)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("outcome classification on constructed fields") {
  const Grid1D g(0.0, 40.0, 400);
  CHECK(classify_outcome(Field::Constant(400, 0.4), g, 10.0, 30.0).kind == OutcomeKind::Homogeneous);
  Field front(400), spikes(400);
  for (std::size_t i = 0; i < 400; ++i) {
    const double x = g.node(i);
    front[static_cast<Eigen::Index>(i)] = 0.5 + 0.4 * std::tanh((x - 20.0) / 0.8);
    double s = 0.1;
    for (double c : {14.0, 18.0, 22.0, 26.0}) s += std::exp(-(x - c) * (x - c) / 0.5);
    spikes[static_cast<Eigen::Index>(i)] = s;
  }
  const auto f = classify_outcome(front, g, 10.0, 30.0);
  CHECK(f.kind == OutcomeKind::Front);
  CHECK(f.spikes == 0);
  const auto sp = classify_outcome(spikes, g, 10.0, 30.0);
  CHECK(sp.kind == OutcomeKind::Spikes);
  CHECK(sp.spikes == 4);
}

TEST_CASE("step limits and blow-up") {
  const Grid1D g(0.0, 40.0, 100);
  CHECK_THROWS_AS(ArealStepper(ArealParams{}, g, 0.3), InvalidParameter);
  ArealRunOptions o;
  o.initial = Field::Constant(400, -1.0);
  o.t_end = 1.0;
  CHECK_THROWS_AS(simulate_areal(ArealParams{}, g, o), IntegrationBlowup);
}
