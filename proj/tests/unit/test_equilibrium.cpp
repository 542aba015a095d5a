#include <doctest.h>

#include "hetdyn/continuation.hpp"
#include "hetdyn/equilibrium.hpp"
#include "hetdyn/error.hpp"
#include "hetdyn/integrate.hpp"

#include <algorithm>
#include <cmath>

using namespace hetdyn;

namespace {

GrassForestODE constant_alpha() {
  return GrassForestODE(default_phi(), [](double a) { return a; });
}

GrassForestODE fig1_model() {
  return GrassForestODE(default_phi(), [](double x) { return 0.5 + 1.25 * x; });
}

SL4ODE fig4_model() {
  return SL4ODE(SLParams{}, [](double x) { return 0.8 + 0.5 * x; },
                [](double x) { return 0.15 + 0.1 * x; });
}

bool contains(const std::vector<EquilibriumPoint>& eqs, double g, double tol) {
  return std::any_of(eqs.begin(), eqs.end(),
                     [&](const auto& e) { return std::abs(e.state[0] - g) <= tol; });
}

// Bisection on phi(G) - a G over a bracket with a sign change.
double bisect_root(double a, double lo, double hi) {
  auto f = [&](double g) { return default_phi()(g) - a * g; };
  REQUIRE(f(lo) * f(hi) < 0.0);
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (lo + hi);
    (f(lo) * f(m) <= 0.0 ? hi : lo) = m;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("spectrum classification") {
  Eigen::VectorXcd ev(2);
  ev << std::complex<double>(-1e-3, 2.0), std::complex<double>(-1.0, 0.0);
  CHECK(classify_spectrum(ev) == Stability::Stable);
  ev[0] = {1e-8, 0.0};
  CHECK(classify_spectrum(ev) == Stability::Marginal);
  ev[0] = {1e-3, 0.0};
  CHECK(classify_spectrum(ev) == Stability::Unstable);
}

TEST_CASE("grass-forest equilibria at alpha = 0.5") {
  const auto model = constant_alpha();
  const auto eqs = find_equilibria(model, 0.5);
  // Oracle: phi(G) - 0.5 G has no sign change on [0, 1), so G = 1 is the
  // only root and it attracts everything below it.
  int changes = 0;
  for (int i = 0; i < 100000; ++i) {
    const double a = i / 100000.0, b = (i + 1) / 100000.0;
    if (b < 1.0 && (default_phi()(a) - 0.5 * a) * (default_phi()(b) - 0.5 * b) < 0.0) ++changes;
  }
  REQUIRE(changes == 0);
  REQUIRE(eqs.size() == 1);
  CHECK(eqs[0].state[0] == 1.0);
  CHECK(eqs[0].stability == Stability::Stable);
}

TEST_CASE("grass-forest equilibria at alpha = 1.75") {
  const auto model = constant_alpha();
  const auto eqs = find_equilibria(model, 1.75);
  CHECK(contains(eqs, 1.0, 0.0));
  const double g_star = bisect_root(1.75, 0.05, 0.07);
  CHECK(g_star == doctest::Approx(0.057627905074679235).epsilon(1e-12));
  CHECK(contains(eqs, g_star, 1e-8));
  for (const auto& e : eqs) {
    CHECK(std::abs(model.rhs(e.state, 1.75)[0]) <= 1e-10);
  }
}

TEST_CASE("four-type equilibria always include all-grass") {
  for (double a : {0.2, 0.7, 1.3}) {
    const SL4ODE m(SLParams{}, [a](double) { return a; }, [](double b) { return b; });
    for (double b : {0.1, 0.9, 1.9}) {
      const auto eqs = find_equilibria(m, b);
      CHECK(contains(eqs, 1.0, 1e-12));
      for (const auto& e : eqs) {
        CHECK(e.state.size() == 4);
        CHECK(m.rhs(m.reduced_state(e.state), b).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK(std::abs(e.state.sum() - 1.0) <= 1e-12);
      }
    }
  }
}

TEST_CASE("stability labels agree with direct simulation") {
  const auto gf = constant_alpha();
  for (double a : {0.6, 1.0, 1.4}) {
    for (const auto& e : find_equilibria(gf, a)) {
      if (e.stability == Stability::Marginal) continue;
      const double start = e.state[0] - 1e-4;  // into the physical domain
      EulerOptions o;
      o.h = 0.01;
      o.t_end = 100.0;
      o.store_snapshots = false;
      const auto run = euler_simulate(
          [&](const Field& s, Field& r) { r = gf.rhs(s, a); }, Field::Constant(1, start), o);
      const double d = std::abs(run.final_state[0] - e.state[0]);
      if (e.stability == Stability::Stable) {
        CHECK(d <= 1e-3);
      } else {
        CHECK(d >= 1e-2);
      }
    }
  }
  const auto sl = fig4_model();
  for (double x : {0.1, 0.5, 0.9}) {
    for (const auto& e : find_equilibria(sl, x)) {
      if (e.stability != Stability::Stable) continue;
      Eigen::VectorXd u = sl.reduced_state(e.state);
      u.array() += 1e-4 * (u.array() > 1e-3).cast<double>() - 0.5e-4;
      u = u.cwiseMax(0.0);
      EulerOptions o;
      o.h = 0.01;
      o.t_end = 100.0;
      o.store_snapshots = false;
      const auto run = euler_simulate([&](const Field& s, Field& r) { r = sl.rhs(s, x); }, u, o);
      CHECK((run.final_state - sl.reduced_state(e.state)).cwiseAbs().maxCoeff() <= 1e-3);
    }
  }
}

TEST_CASE("fig1 continuation: folds, transcritical and the exact grass branch") {
  const auto model = fig1_model();
  std::vector<Branch> branches;
  for (double x0 : {0.0, 1.0}) {
    for (const auto& eq : find_equilibria(model, x0)) {
      if (eq.stability != Stability::Stable) continue;
      ContinuationOptions o;
      o.direction = x0 == 0.0 ? 1 : -1;
      branches.push_back(continue_branch(model, eq, o));
    }
  }
  REQUIRE(branches.size() == 2);
  const Branch& grass = branches[0];
  for (const auto& p : grass.points) CHECK(p.state[0] == 1.0);
  const auto tc = grass.event_parameters(BranchEvent::Transcritical);
  REQUIRE(tc.size() == 1);
  // alpha(x) = phi(1) at the exchange of stability
  CHECK(tc[0] == doctest::Approx((0.8999950846603182 - 0.5) / 1.25).epsilon(1e-4));

  const auto folds = branches[1].event_parameters(BranchEvent::SaddleNode);
  REQUIRE(folds.size() == 2);
  // Oracle: phi(G) = G phi'(G), alpha = phi(G) / G, solved by bisection.
  const double lo = std::min(folds[0], folds[1]);
  const double hi = std::max(folds[0], folds[1]);
  CHECK(lo == doctest::Approx(0.037299399030124115).epsilon(1e-6));
  CHECK(hi == doctest::Approx(0.8875767500321956).epsilon(1e-6));
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
}

TEST_CASE("fold locations are insensitive to the continuation step") {
  const auto model = fig1_model();
  const auto start = find_equilibria(model, 1.0).back();
  ContinuationOptions a;
  a.direction = -1;
  ContinuationOptions b = a;
  b.initial_step_fraction *= 0.5;
  b.max_step_fraction *= 0.5;
  const auto fa = continue_branch(model, start, a).event_parameters(BranchEvent::SaddleNode);
  const auto fb = continue_branch(model, start, b).event_parameters(BranchEvent::SaddleNode);
  REQUIRE(fa.size() == fb.size());
  for (std::size_t i = 0; i < fa.size(); ++i) CHECK(std::abs(fa[i] - fb[i]) < 1e-4);
}

TEST_CASE("continuation points stay on the equilibrium curve") {
  const auto model = fig1_model();
  ContinuationOptions o;
  o.direction = -1;
  const Branch b = continue_branch(model, find_equilibria(model, 1.0).back(), o);
  for (const auto& p : b.points) {
    if (model.admissibility_violation(p.state) > 0.0) continue;
    CHECK(std::abs(model.rhs(p.state, p.parameter)[0]) <= 1e-9);
  }
  for (std::size_t i = 1; i < b.points.size(); ++i) {
    const double ds = std::hypot(b.points[i].parameter - b.points[i - 1].parameter,
                                 b.points[i].state[0] - b.points[i - 1].state[0]);
    CHECK(ds <= 0.05);
  }
}

TEST_CASE("four-type continuation with the fig4 gradient finds a transcritical point") {
  const auto model = fig4_model();
  bool found = false;
  for (const auto& eq : find_equilibria(model, 0.0)) {
    const Branch b = continue_branch(model, eq);
    if (b.has(BranchEvent::Transcritical)) found = true;
  }
  CHECK(found);
}

TEST_CASE("a parameter-free system gives a flat branch without events") {
  const GrassForestODE model(default_phi(), [](double) { return 1.75; });
  const auto eqs = find_equilibria(model, 0.0);
  for (const auto& eq : eqs) {
    if (eq.stability == Stability::Marginal) continue;
    const Branch b = continue_branch(model, eq);
    CHECK(b.points.back().parameter == doctest::Approx(1.0));
    for (const auto& p : b.points) CHECK(p.state[0] == doctest::Approx(eq.state[0]).epsilon(1e-9));
    for (const auto& l : b.labels) CHECK(l.event == BranchEvent::BranchEnd);
  }
}

TEST_CASE("two-parameter regimes") {
  SUBCASE("the fig5a gradient crosses the oscillating region") {
    const auto map = scan_two_parameter({0.2, 1.0}, {1.9, 2.0}, 50, SLParams{});
    CHECK(std::any_of(map.cells.begin(), map.cells.end(), [](const auto& c) { return c.oscillating; }));
    const auto again = scan_two_parameter({0.2, 1.0}, {1.9, 2.0}, 50, SLParams{}, TwoParamOptions{.threads = 2});
    CHECK(map.cells == again.cells);
  }
  SUBCASE("large alpha and small beta leave one stable forest state") {
    const SL4ODE m(SLParams{}, [](double) { return 2.0; }, [](double) { return 0.1; });
    const auto eqs = find_equilibria(m, 0.0);
    std::vector<EquilibriumPoint> stable;
    for (const auto& e : eqs) {
      if (e.stability == Stability::Stable) stable.push_back(e);
    }
    REQUIRE(stable.size() == 1);
    CHECK(stable[0].state[3] > 0.5);
    for (const auto& start : oscillation_starts()) {
      Eigen::Vector3d u(start[0], start[1], start[2]);
      CHECK_FALSE(sustained_oscillation(m, 0.0, u));
    }
  }
  CHECK_THROWS_AS(scan_two_parameter({0, 1}, {0, 1}, 10, SLParams{}), InvalidParameter);
}
