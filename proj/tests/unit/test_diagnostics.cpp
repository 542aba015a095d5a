#include <doctest.h>

#include "hetdyn/diagnostics.hpp"
#include "hetdyn/error.hpp"

#include <cmath>
#include <numbers>

using namespace hetdyn;

namespace {

TimeSeries sample(double (*f)(double), std::size_t n, double dt, double t0 = 0.0) {
  TimeSeries s;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = t0 + dt * static_cast<double>(i);
    s.times.push_back(t);
    s.values.push_back(f(t));
  }
  return s;
}

double sine7(double t) { return std::sin(2.0 * std::numbers::pi * t / 7.0); }
double doubled(double t) {
  return std::cos(2.0 * std::numbers::pi * t / 7.0) + 0.3 * std::cos(std::numbers::pi * t / 7.0);
}
double constant(double) { return 0.42; }
// Incommensurate frequencies: never repeats.
double quasi(double t) { return std::sin(t) + std::sin(std::numbers::sqrt2 * t) + std::sin(std::numbers::pi * t); }

}  // namespace

TEST_CASE("period of a pure sine") {
  const auto c = detect_period(sample(sine7, 8000, 0.05));
  CHECK(c.tag == PeriodTag::Period1);
  REQUIRE(c.base_period);
  CHECK(*c.base_period == doctest::Approx(7.0).epsilon(1e-2));
  CHECK(c.autocorrelation > 0.99);
}

TEST_CASE("alternating peaks give period two") {
  const auto c = detect_period(sample(doubled, 8000, 0.05));
  CHECK(c.tag == PeriodTag::Period2);
  REQUIRE(c.base_period);
  CHECK(*c.base_period == doctest::Approx(14.0).epsilon(1e-2));
}

TEST_CASE("constant and quasi-periodic series") {
  CHECK(detect_period(sample(constant, 5000, 0.1)).tag == PeriodTag::Steady);
  const auto q = detect_period(sample(quasi, 20000, 0.05));
  CHECK(q.tag == PeriodTag::Aperiodic);
  CHECK_FALSE(q.base_period);
  CHECK_FALSE(q.note.empty());
}

TEST_CASE("too few samples after the transient") {
  CHECK_THROWS_AS(detect_period(sample(sine7, 3000, 0.05)), InsufficientData);
  CHECK_THROWS_AS(detect_period(sample(sine7, 8000, 0.05), 1.0), InvalidParameter);
}

TEST_CASE("period is invariant under affine maps and time shifts") {
  const auto base = detect_period(sample(sine7, 8000, 0.05));
  for (auto [a, b] : {std::pair{3.0, -1.0}, std::pair{0.01, 5.0}}) {
    TimeSeries s = sample(sine7, 8000, 0.05);
    for (double& v : s.values) v = a * v + b;
    const auto c = detect_period(s);
    CHECK(c.tag == base.tag);
    CHECK(*c.base_period == doctest::Approx(*base.base_period).epsilon(1e-9));
  }
  const auto shifted = detect_period(sample(sine7, 8000, 0.05, 123.4));
  CHECK(shifted.tag == base.tag);
  CHECK(*shifted.base_period == doctest::Approx(*base.base_period).epsilon(1e-2));
}

TEST_CASE("time series validation") {
  TimeSeries s;
  s.times = {0.0, 1.0, 3.0};
  s.values = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(s.validate(), InvalidParameter);
  s.times = {0.0, 1.0};
  CHECK_THROWS_AS(s.validate(), DimensionMismatch);
}

TEST_CASE("autocorrelation and peaks") {
  std::vector<double> v;
  for (int i = 0; i < 700; ++i) v.push_back(sine7(0.1 * i));
  CHECK(autocorrelation(v, 70) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(autocorrelation(v, 35) == doctest::Approx(-1.0).epsilon(1e-3));
  CHECK(find_peaks(v, 0.5).size() == 10);
  CHECK(find_peaks({0.0, 1.0, 0.9, 0.95, 0.0}, 0.5).size() == 1);
  CHECK(find_peaks({0.0, 1.0, 0.9, 1.0, 0.0}, 0.5).size() == 2);
}

TEST_CASE("spike counting") {
  const auto build = [](std::size_t n, double offset) {
    const Grid1D g(0.0, 40.0, n);
    Field f(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const double x = g.node(i);
      double s = offset;
      for (double c : {8.0, 16.0, 24.0, 32.0}) s += std::exp(-(x - c) * (x - c));
      f[static_cast<Eigen::Index>(i)] = s;
    }
    return std::pair{g, f};
  };
  for (std::size_t n : {400u, 800u}) {
    for (double off : {0.0, 7.5}) {
      const auto [g, f] = build(n, off);
      const auto pos = spike_positions(f, g);
      REQUIRE(pos.size() == 4);
      CHECK(pos[0] == doctest::Approx(8.0).epsilon(0.01));
      CHECK(pos[3] == doctest::Approx(32.0).epsilon(0.01));
      CHECK(count_spikes(f, g, std::pair{10.0, 30.0}) == 2);
    }
  }
  const Grid1D g(0.0, 40.0, 400);
  Field t(400);
  for (std::size_t i = 0; i < 400; ++i) t[static_cast<Eigen::Index>(i)] = std::tanh(g.node(i) - 20.0);
  CHECK(count_spikes(t, g) == 0);
  CHECK(count_spikes(Field::Constant(400, 0.3), g) == 0);
  CHECK_THROWS_AS(count_spikes(t, g, {}, 0.0), InvalidParameter);
  CHECK_THROWS_AS(count_spikes(Field::Zero(10), g), DimensionMismatch);
}

TEST_CASE("l1 norm and spatial averages") {
  const Grid1D g(0.0, 1.0, 101);
  CHECK(l1_norm(Field::Ones(101), g) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(l1_norm(Field::Constant(101, -2.0), g) == doctest::Approx(2.0).epsilon(1e-14));
  Field x(101);
  for (std::size_t i = 0; i < 101; ++i) x[static_cast<Eigen::Index>(i)] = g.node(i);
  CHECK(spatial_mean(x, g) == doctest::Approx(0.5).epsilon(1e-14));

  SimulationRun run;
  run.grid = g;
  run.components = 2;
  Field s(202);
  s << x, Field::Constant(101, 3.0);
  run.times = {0.0, 1.0};
  run.snapshots = {s, 2.0 * s};
  const auto avg = spatial_average(run, 1);
  REQUIRE(avg.size() == 2);
  CHECK(avg.values[0] == doctest::Approx(3.0));
  CHECK(avg.values[1] == doctest::Approx(6.0));
  CHECK(spatial_average(run, 0).values[0] == doctest::Approx(0.5));
  CHECK_THROWS_AS(spatial_average(run, 2), InvalidParameter);
}
