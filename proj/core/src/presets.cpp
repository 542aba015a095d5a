#include "hetdyn/presets.hpp"

#include "hetdyn/error.hpp"
#include "hetdyn/parallel.hpp"
#include "hetdyn/sl_dynamics.hpp"
#include "hetdyn/spatial_steady.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>

namespace hetdyn {

namespace fs = std::filesystem;
using nlohmann::json;

std::string library_version() { return HETDYN_VERSION; }

SimulationRun simulate_config(const RunConfig& c, Observer observer,
                              std::size_t observe_stride) {
  c.validate();
  const Grid1D grid = c.grid.build();
  if (c.model == ModelKind::Areal) {
    ArealRunOptions o;
    o.h = c.h;
    o.t_end = c.t_end;
    o.noise = c.noise;
    o.seed = c.seed;
    o.snapshot_stride = c.snapshot_stride;
    o.observer = std::move(observer);
    o.observe_stride = observe_stride;
    return simulate_areal(c.areal, grid, o);
  }
  EulerOptions o;
  o.h = c.h;
  o.t_end = c.t_end;
  o.snapshot_stride = c.snapshot_stride;
  o.observer = std::move(observer);
  o.observe_stride = observe_stride;
  InitialCondition ic = c.initial;
  ic.seed = c.seed;
  if (c.model == ModelKind::GrassForest) {
    const GrassForestSystem sys(grid, c.sl);
    return euler_simulate(sys, make_grassforest_initial(ic, grid), o);
  }
  const SL4System sys(grid, c.sl);
  return euler_simulate(sys, make_sl4_initial(ic, grid).stacked(), o);
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"fig1",  "fig2",  "fig4",  "fig5a",
                                              "fig5b", "fig5c", "fig6",  "fig7",
                                              "fig8a", "fig8b", "fig8c", "fig8d"};
  return names;
}

namespace {

void set_sigma(SLParams& p, double sigma) { p.sigma_F = p.sigma_T = p.sigma_W = sigma; }

RunConfig grassforest_front_config() {
  RunConfig c = RunConfig::defaults(ModelKind::GrassForest);
  c.sl.alpha = SpatialGradient::linear(0.5, 1.25);
  set_sigma(c.sl, 0.01);
  c.initial.left = {0.5, 0.0, 0.0, 0.5};
  c.t_end = 200.0;
  c.snapshot_stride = 20;
  return c;
}

RunConfig wave_config(double beta_c, double p_s) {
  RunConfig c = RunConfig::defaults(ModelKind::SL4);
  c.sl.alpha = SpatialGradient::linear(0.2, 0.8);
  c.sl.beta = SpatialGradient::linear(beta_c, 0.1);
  if (p_s != 1.0) {
    for (SpatialGradient* g : {&c.sl.alpha, &c.sl.beta}) {
      g->shape = GradientShape::Slope;
      g->shape_param = p_s;
    }
  }
  set_sigma(c.sl, 0.02);
  c.t_end = 4000.0;
  c.snapshot_stride = 200;
  return c;
}

RunConfig areal_config(double width) {
  RunConfig c = RunConfig::defaults(ModelKind::Areal);
  c.areal.use_path = true;
  const MorphogenPath def;
  c.areal.path = MorphogenPath::centred(def.p1, def.p2, c.grid.build(), width);
  return c;
}

}  // namespace

RunConfig preset_config(std::string_view name) {
  if (name == "fig1" || name == "fig2") {
    RunConfig c = grassforest_front_config();
    c.output = "out/" + std::string(name);
    return c;
  }
  if (name == "fig4") {
    RunConfig c = RunConfig::defaults(ModelKind::SL4);
    c.sl.alpha = SpatialGradient::linear(0.8, 0.5);
    c.sl.beta = SpatialGradient::linear(0.15, 0.1);
    set_sigma(c.sl, 0.025);
    c.t_end = 1000.0;
    c.snapshot_stride = 200;
    c.output = "out/fig4";
    return c;
  }
  std::optional<RunConfig> c;
  if (name == "fig5a") c = wave_config(1.9, 1.0);
  if (name == "fig5b") c = wave_config(1.5, 1.0);
  if (name == "fig5c") c = wave_config(0.4, 1.0);
  if (name == "fig6") c = wave_config(1.5, fig6_slopes().front());
  if (name == "fig7" || name == "fig8d") c = RunConfig::defaults(ModelKind::Areal);
  if (name == "fig8a" || name == "fig8b" || name == "fig8c") c = areal_config(fig8_width(name));
  if (!c) throw InvalidParameter("unknown preset '" + std::string(name) + "'");
  c->output = "out/" + std::string(name);
  return *c;
}

// ---------------------------------------------------------------------------

std::optional<StableInterval> stable_multiplicity_interval(
    const std::vector<Branch>& branches, const NonspatialModel& model, std::size_t count) {
  struct Segment {
    double a, b;
  };
  std::vector<Segment> segments;
  std::vector<double> cuts;
  for (const auto& br : branches) {
    for (std::size_t i = 0; i + 1 < br.points.size(); ++i) {
      const auto& p = br.points[i];
      const auto& q = br.points[i + 1];
      cuts.push_back(p.parameter);
      if (p.stability != Stability::Stable || q.stability != Stability::Stable) continue;
      if (model.admissibility_violation(model.reduced_state(p.state)) > 1e-9 ||
          model.admissibility_violation(model.reduced_state(q.state)) > 1e-9) {
        continue;
      }
      segments.push_back({std::min(p.parameter, q.parameter),
                          std::max(p.parameter, q.parameter)});
    }
    if (!br.points.empty()) cuts.push_back(br.points.back().parameter);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::optional<StableInterval> out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    const auto covering = std::count_if(segments.begin(), segments.end(), [&](const Segment& s) {
      return s.a <= mid && mid <= s.b;
    });
    if (static_cast<std::size_t>(covering) < count) continue;
    if (!out) out = StableInterval{cuts[i], cuts[i + 1]};
    out->lo = std::min(out->lo, cuts[i]);
    out->hi = std::max(out->hi, cuts[i + 1]);
  }
  return out;
}

Fig1Result fig1_experiment(std::size_t nodes, bool store_snapshots) {
  RunConfig c = preset_config("fig1");
  c.grid.n = nodes;
  Fig1Result r;
  if (store_snapshots) {
    r.run = simulate_config(c);
  } else {
    RunConfig quiet = c;
    quiet.snapshot_stride = static_cast<std::size_t>(std::llround(c.t_end / c.h));
    r.run = simulate_config(quiet);
  }
  const Grid1D grid = c.grid.build();
  const GrassForestSystem sys(grid, c.sl);
  SteadyOptions so;
  so.method = SteadyMethod::Newton;
  const SpatialSteadyState st = spatial_steady_state(sys, r.run.final_state, so);
  r.steady = st.state;
  r.stable = st.stable;
  r.residual = st.residual;
  r.l1_grass = st.l1_grass;
  for (Eigen::Index i = 0; i + 1 < r.steady.size(); ++i) {
    if ((r.steady[i] - 0.5) * (r.steady[i + 1] - 0.5) < 0.0) ++r.front_crossings;
  }
  r.front = locate_front(r.steady, grid, 0.5);

  const SpatialGradient alpha = c.sl.alpha;
  const GrassForestODE model(c.sl.phi, [alpha](double x) { return alpha(x); });
  for (double x0 : {0.0, 1.0}) {
    for (const auto& eq : find_equilibria(model, x0)) {
      if (eq.stability != Stability::Stable) continue;
      ContinuationOptions o;
      o.direction = x0 == 0.0 ? +1 : -1;
      r.branches.push_back(continue_branch(model, eq, o));
    }
  }
  r.bistable = stable_multiplicity_interval(r.branches, model, 2);
  return r;
}

std::vector<double> fig2_sigmas() {
  std::vector<double> s;
  for (int k = 1; k <= 40; ++k) s.push_back(0.005 * k);
  return s;
}

DispersalSweep fig2_experiment(std::size_t threads) {
  const RunConfig c = preset_config("fig2");
  DispersalSweepOptions o;
  o.threads = threads;
  return sweep_dispersal(c.grid.build(), c.sl, fig2_sigmas(), o);
}

// ---------------------------------------------------------------------------

namespace {

Field banded_state(const Grid1D& grid, const std::vector<double>& cuts,
                   const std::vector<SL4Point>& bands) {
  const std::size_t n = grid.size();
  SLState s = SLState::uniform(n, bands.front());
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t b = 0;
    while (b < cuts.size() && grid.node(i) >= cuts[b]) ++b;
    const auto j = static_cast<Eigen::Index>(i);
    s.G[j] = bands[b][0];
    s.S[j] = bands[b][1];
    s.T[j] = bands[b][2];
    s.F[j] = bands[b][3];
  }
  return s.stacked();
}

std::optional<double> rising_front(const Field& F, const Grid1D& grid) {
  if (!(F[0] < 0.5 && F[F.size() - 1] > 0.5)) return std::nullopt;
  try {
    return locate_front(F, grid, 0.5);
  } catch (const NoFront&) {
    return std::nullopt;
  }
}

constexpr SL4Point kSavanna{0.4, 0.05, 0.5, 0.05};
constexpr SL4Point kGrass{0.9, 0.0, 0.0, 0.1};
constexpr SL4Point kForest{0.05, 0.0, 0.0, 0.95};

}  // namespace

std::vector<std::pair<std::string, Field>> fig4_ensemble(const Grid1D& grid) {
  return {
      {"uniform", banded_state(grid, {}, {{0.25, 0.25, 0.25, 0.25}})},
      {"forest", banded_state(grid, {}, {kForest})},
      {"savanna", banded_state(grid, {}, {{0.3, 0.1, 0.6, 0.0}})},
      {"savanna|grass@0.3", banded_state(grid, {0.3}, {kSavanna, kGrass})},
      {"savanna|grass|forest@0.4,0.7",
       banded_state(grid, {0.4, 0.7}, {kSavanna, kGrass, kForest})},
  };
}

Fig4Result fig4_experiment(std::size_t nodes, double sigma_max, double sigma_step) {
  RunConfig c = preset_config("fig4");
  c.grid.n = nodes;
  const Grid1D grid = c.grid.build();
  const std::size_t n = grid.size();
  const SL4System sys(grid, c.sl);
  Fig4Result r;
  for (auto& [label, start] : fig4_ensemble(grid)) {
    SteadyOptions so;
    so.relax_time = c.t_end;
    Fig4State s;
    s.origin = label;
    const SpatialSteadyState st = spatial_steady_state(sys, start, so);
    s.state = st.state;
    s.stable = st.stable;
    s.return_distance = st.return_distance;
    s.l1_grass = st.l1_grass;
    s.l1_forest = l1_norm(component(st.state, 3, n), grid);
    s.forest_front = rising_front(component(st.state, 3, n), grid);
    r.states.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < r.states.size(); ++i) {
    if (!r.states[i].stable) continue;
    const bool seen = std::any_of(r.distinct_stable.begin(), r.distinct_stable.end(),
                                  [&](std::size_t j) {
                                    return (r.states[i].state - r.states[j].state)
                                               .lpNorm<Eigen::Infinity>() < 1e-4;
                                  });
    if (!seen) r.distinct_stable.push_back(i);
  }
  for (std::size_t i : r.distinct_stable) {
    if (r.states[i].forest_front) {
      r.grass_band = i;
      break;
    }
  }
  if (!r.grass_band) return r;

  Field u = r.states[*r.grass_band].state;
  const double sigma0 = c.sl.sigma_F;
  for (int k = 1;; ++k) {
    const double sigma = sigma0 + k * sigma_step;
    if (sigma > sigma_max + 1e-12) break;
    SLParams p = c.sl;
    set_sigma(p, sigma);
    const SL4System s2(grid, p);
    Fig4Continuation step;
    step.sigma = sigma;
    try {
      const SpatialSteadyState st = spatial_steady_state(s2, u, SteadyOptions{});
      step.converged = true;
      step.stable = st.stable;
      step.forest_front = rising_front(component(st.state, 3, n), grid);
      u = st.state;
    } catch (const NoSteadyState&) {
    }
    r.continuation.push_back(step);
    if (!step.converged || !step.stable || !step.forest_front) {
      r.termination_sigma = sigma;
      break;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------

bool oscillating(const PeriodClass& c) noexcept { return c.tag != PeriodTag::Steady; }

WaveResult wave_experiment(double beta_c, double p_s, double t_end, std::size_t nodes,
                           bool store_snapshots) {
  WaveResult r;
  r.config = wave_config(beta_c, p_s);
  r.config.grid.n = nodes;
  r.config.t_end = t_end;
  RunConfig c = r.config;
  if (!store_snapshots) c.snapshot_stride = static_cast<std::size_t>(std::llround(t_end / c.h));
  const Grid1D grid = c.grid.build();
  r.run = simulate_config(
      c,
      [&](double t, const Field& s) {
        r.forest_average.times.push_back(t);
        r.forest_average.values.push_back(spatial_mean(component(s, 3, grid.size()), grid));
      },
      10);
  r.period = detect_period(r.forest_average, 0.5);
  return r;
}

std::vector<double> fig6_slopes() { return {1.5, 2.0, 2.5, 3.4, 3.42}; }

Fig6Result fig6_experiment(std::size_t threads, double bisection_tol, double t_end) {
  const auto slopes = fig6_slopes();
  std::vector<WaveResult> runs(slopes.size());
  parallel_for(slopes.size(), threads, [&](std::size_t i) {
    runs[i] = wave_experiment(1.5, slopes[i], t_end, 400, true);
  });
  Fig6Result r;
  r.monotone = true;
  bool stopped = false;
  std::optional<std::size_t> last_on;
  for (std::size_t i = 0; i < slopes.size(); ++i) {
    const bool on = oscillating(runs[i].period);
    if (on && stopped) r.monotone = false;
    if (!on) stopped = true;
    if (on && !stopped) last_on = i;
    r.runs.emplace_back(slopes[i], std::move(runs[i]));
  }
  if (last_on && *last_on + 1 < slopes.size()) {
    double lo = slopes[*last_on];
    double hi = slopes[*last_on + 1];
    while (hi - lo > bisection_tol) {
      const double mid = 0.5 * (lo + hi);
      (oscillating(wave_experiment(1.5, mid, t_end).period) ? lo : hi) = mid;
    }
    r.offset = std::make_pair(lo, hi);
  }
  return r;
}

// ---------------------------------------------------------------------------

std::pair<double, double> estimate_cusp(double k1, double k2, double tol) {
  double rn = 0.1;
  auto w = bistable_window(rn, {0.0, 0.6}, k1, k2);
  if (!w) throw PreconditionFailed("no bistable window at rho_N = 0.1");
  // The window drifts with rho_N roughly one to one, so the search range
  // around the previous window must cover the rho_N increment as well.
  auto local = [&](double r, const std::pair<double, double>& prev) {
    const double mid = 0.5 * (prev.first + prev.second);
    const double half = std::max({2.0 * (prev.second - prev.first), 4.0 * (r - rn), 1e-4});
    return bistable_window(r, {std::max(0.0, mid - half), mid + half}, k1, k2);
  };
  double step = 0.01;
  double without = -1.0;
  while (rn < 2.0) {
    const auto next = local(rn + step, *w);
    if (!next) {
      without = rn + step;
      break;
    }
    rn += step;
    w = next;
  }
  if (without < 0.0) throw PreconditionFailed("bistable window does not close");
  while (without - rn > tol) {
    const double mid = 0.5 * (rn + without);
    if (const auto next = local(mid, *w)) {
      rn = mid;
      w = next;
    } else {
      without = mid;
    }
  }
  return {0.5 * (w->first + w->second), rn};
}

Fig7Result fig7_experiment() {
  Fig7Result r;
  for (int i = 0; i <= 200; ++i) {
    const double re = 0.5 * i / 200.0;
    r.rho_E.push_back(re);
    r.equilibria.push_back(homogeneous_equilibria(re, 0.1));
  }
  r.window = bistable_window(0.1);
  r.cusp = estimate_cusp();
  return r;
}

double fig8_width(std::string_view name) {
  if (name == "fig8a") return 4.0;
  if (name == "fig8b") return 12.0;
  if (name == "fig8c") return 24.0;
  throw InvalidParameter("no morphogen width for '" + std::string(name) + "'");
}

Fig8Result fig8_experiment(double width, std::uint64_t seed, bool require_unstable) {
  RunConfig c = areal_config(width);
  c.seed = seed;
  return fig8_experiment(c, require_unstable);
}

Fig8Result fig8_experiment(const RunConfig& config, bool require_unstable) {
  if (config.model != ModelKind::Areal || !config.areal.use_path) {
    throw InvalidParameter("fig8 runs need an areal configuration with a morphogen path");
  }
  Fig8Result r;
  r.config = config;
  const auto& path = r.config.areal.path;
  r.unstable_fraction = path_unstable_fraction(path.p1, path.p2, r.config.areal);
  if (require_unstable && r.unstable_fraction <= 0.0) {
    throw PreconditionFailed("morphogen path never enters the Turing region");
  }
  r.run = simulate_config(r.config);
  const Grid1D grid = r.config.grid.build();
  const Field E = component(r.run.final_state, 0, grid.size());
  r.outcome = classify_outcome(E, grid, path.r_lo, path.r_hi);
  const auto& s = r.outcome.spike_positions;
  for (std::size_t i = 0; i < s.size() && s.size() > 1; ++i) {
    double nn = std::numeric_limits<double>::infinity();
    if (i > 0) nn = std::min(nn, s[i] - s[i - 1]);
    if (i + 1 < s.size()) nn = std::min(nn, s[i + 1] - s[i]);
    r.spacings.push_back(nn);
  }
  return r;
}

TuringHeatmap fig8d_experiment(std::size_t resolution, std::size_t threads) {
  return turing_heatmap({0.0, 0.6}, {0.0, 0.6}, resolution, ArealParams{}, 40.0, 200,
                        threads);
}

// ---------------------------------------------------------------------------

std::vector<fs::path> write_run_artifacts(const SimulationRun& run, std::size_t component,
                                          const fs::path& dir, const std::string& stem) {
  const SpaceTime st = space_time(run, component);
  std::vector<fs::path> out{dir / (stem + ".csv"), dir / (stem + ".f64"),
                            dir / (stem + ".ppm")};
  write_field_csv(out[0], st);
  write_spacetime_binary(out[1], st.values);
  out.push_back(fs::path(out[1].string() + ".meta"));
  render_heatmap(out[2], st.values);
  return out;
}

namespace {

json period_json(const PeriodClass& p) {
  return {{"tag", std::string(to_string(p.tag))},
          {"base_period", p.base_period ? json(*p.base_period) : json(nullptr)},
          {"peaks", p.peaks},
          {"autocorrelation", p.autocorrelation},
          {"note", p.note}};
}

json stability_json(const std::optional<StableInterval>& s) {
  if (!s) return nullptr;
  return {{"lo", s->lo}, {"hi", s->hi}};
}

void write_csv_rows(const fs::path& path, const std::string& header,
                    const std::vector<std::vector<double>>& rows) {
  std::string text = header + "\n";
  char buf[40];
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) text += ',';
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      text += buf;
    }
    text += '\n';
  }
  write_text(path, text);
}

json run_fig1(const fs::path& dir, std::vector<fs::path>& files) {
  const Fig1Result r = fig1_experiment();
  auto a = write_run_artifacts(r.run, 0, dir, "grass");
  files.insert(files.end(), a.begin(), a.end());
  json branches = json::array();
  for (const auto& b : r.branches) {
    json labels = json::array();
    for (const auto& l : b.labels) {
      labels.push_back({{"event", std::string(to_string(l.event))},
                        {"x", b.points[l.index].parameter},
                        {"G", b.points[l.index].state[0]}});
    }
    branches.push_back({{"points", b.points.size()}, {"labels", labels}});
  }
  return {{"front", r.front},
          {"front_crossings", r.front_crossings},
          {"l1_grass", r.l1_grass},
          {"stable", r.stable},
          {"residual", r.residual},
          {"bistable_interval", stability_json(r.bistable)},
          {"nonspatial_branches", branches}};
}

json run_fig2(const fs::path& dir, std::vector<fs::path>& files, std::size_t threads) {
  const DispersalSweep s = fig2_experiment(threads);
  std::vector<std::vector<double>> rows;
  json branches = json::array();
  for (std::size_t b = 0; b < s.branches.size(); ++b) {
    const auto& br = s.branches[b];
    for (const auto& p : br.points) {
      rows.push_back({static_cast<double>(b), p.sigma, p.l1_grass, p.stable ? 1.0 : 0.0,
                      p.from_continuation ? 1.0 : 0.0});
    }
    branches.push_back(
        {{"index", b},
         {"kind", std::string(to_string(br.kind))},
         {"sigma_range", {br.points.front().sigma, br.points.back().sigma}},
         {"fold_low", br.fold_low ? json(*br.fold_low) : json(nullptr)},
         {"fold_high", br.fold_high ? json(*br.fold_high) : json(nullptr)}});
  }
  files.push_back(dir / "branches.csv");
  write_csv_rows(files.back(), "branch,sigma,l1_grass,stable,from_continuation", rows);
  return {{"branches", branches}, {"sigmas_with_three_stable", s.sigmas_with_stable(3)}};
}

json run_fig4(const fs::path& dir, std::vector<fs::path>& files) {
  const Fig4Result r = fig4_experiment();
  const RunConfig c = preset_config("fig4");
  const Grid1D grid = c.grid.build();
  const std::size_t n = grid.size();
  std::vector<std::vector<double>> rows(n);
  std::string header = "x";
  json states = json::array();
  for (std::size_t k = 0; k < r.states.size(); ++k) {
    const auto& s = r.states[k];
    for (const char* comp : {"G", "S", "T", "F"}) {
      header += "," + std::string(comp) + std::to_string(k);
    }
    states.push_back({{"origin", s.origin},
                      {"stable", s.stable},
                      {"return_distance", s.return_distance},
                      {"l1_grass", s.l1_grass},
                      {"l1_forest", s.l1_forest},
                      {"forest_front", s.forest_front ? json(*s.forest_front) : json(nullptr)}});
  }
  for (std::size_t i = 0; i < n; ++i) {
    rows[i].push_back(grid.node(i));
    for (const auto& s : r.states) {
      for (std::size_t comp = 0; comp < 4; ++comp) {
        rows[i].push_back(s.state[static_cast<Eigen::Index>(comp * n + i)]);
      }
    }
  }
  files.push_back(dir / "states.csv");
  write_csv_rows(files.back(), header, rows);
  std::vector<std::vector<double>> cont;
  for (const auto& s : r.continuation) {
    cont.push_back({s.sigma, s.converged ? 1.0 : 0.0, s.stable ? 1.0 : 0.0,
                    s.forest_front.value_or(std::nan(""))});
  }
  files.push_back(dir / "continuation.csv");
  write_csv_rows(files.back(), "sigma,converged,stable,forest_front", cont);
  return {{"states", states},
          {"distinct_stable", r.distinct_stable},
          {"grass_band", r.grass_band ? json(*r.grass_band) : json(nullptr)},
          {"termination_sigma",
           r.termination_sigma ? json(*r.termination_sigma) : json(nullptr)}};
}

json wave_json(const WaveResult& w) {
  return {{"beta_c", w.config.sl.beta.intercept},
          {"slope_parameter", w.config.sl.alpha.shape_param},
          {"period", period_json(w.period)}};
}

void write_series(const fs::path& path, const TimeSeries& ts) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < ts.size(); ++i) rows.push_back({ts.times[i], ts.values[i]});
  write_csv_rows(path, "t,forest_average", rows);
}

json run_fig5(std::string_view name, const fs::path& dir, std::vector<fs::path>& files) {
  const RunConfig c = preset_config(name);
  const WaveResult w =
      wave_experiment(c.sl.beta.intercept, 1.0, c.t_end, c.grid.n, true);
  auto a = write_run_artifacts(w.run, 3, dir, "forest");
  files.insert(files.end(), a.begin(), a.end());
  files.push_back(dir / "forest_average.csv");
  write_series(files.back(), w.forest_average);
  return wave_json(w);
}

json run_fig6(const fs::path& dir, std::vector<fs::path>& files, std::size_t threads) {
  const Fig6Result r = fig6_experiment(threads);
  json runs = json::array();
  for (const auto& [slope, w] : r.runs) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "forest_ps%.2f", slope);
    auto a = write_run_artifacts(w.run, 3, dir, stem);
    files.insert(files.end(), a.begin(), a.end());
    json j = wave_json(w);
    j["oscillating"] = oscillating(w.period);
    runs.push_back(j);
  }
  json offset = nullptr;
  if (r.offset) {
    offset = {{"bracket", {r.offset->first, r.offset->second}},
              {"threshold", 0.5 * (r.offset->first + r.offset->second)}};
  }
  return {{"runs", runs}, {"monotone", r.monotone}, {"offset", offset}};
}

json run_fig7(const fs::path& dir, std::vector<fs::path>& files) {
  const Fig7Result r = fig7_experiment();
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < r.rho_E.size(); ++i) {
    for (const auto& e : r.equilibria[i]) {
      rows.push_back({r.rho_E[i], e.E, e.N, e.stable_k0 ? 1.0 : 0.0});
    }
  }
  files.push_back(dir / "equilibria.csv");
  write_csv_rows(files.back(), "rho_E,E,N,stable", rows);
  json window = nullptr;
  if (r.window) window = {r.window->first, r.window->second};
  return {{"rho_N", 0.1}, {"bistable_window", window}, {"cusp", {r.cusp.first, r.cusp.second}}};
}

json run_fig8(std::string_view name, const fs::path& dir, std::vector<fs::path>& files,
              std::uint64_t seed) {
  const Fig8Result r = fig8_experiment(fig8_width(name), seed, name == "fig8c");
  auto a = write_run_artifacts(r.run, 0, dir, "E");
  files.insert(files.end(), a.begin(), a.end());
  const auto& path = r.config.areal.path;
  return {{"path", {{"p1", {path.p1.first, path.p1.second}},
                    {"p2", {path.p2.first, path.p2.second}},
                    {"r_lo", path.r_lo},
                    {"r_hi", path.r_hi}}},
          {"unstable_fraction", r.unstable_fraction},
          {"outcome", std::string(to_string(r.outcome.kind))},
          {"spikes", r.outcome.spikes},
          {"spike_positions", r.outcome.spike_positions},
          {"spacings", r.spacings}};
}

json run_fig8d(const fs::path& dir, std::vector<fs::path>& files, std::size_t threads) {
  const TuringHeatmap h = fig8d_experiment(100, threads);
  SpaceTime st;
  st.x = h.rho_E;
  st.t = h.rho_N;
  st.values = h.growth;
  files.push_back(dir / "growth.csv");
  write_field_csv(files.back(), st);
  // Image rows run from high rho_N (top) to low.
  files.push_back(dir / "growth.ppm");
  render_heatmap(files.back(), h.growth.colwise().reverse());
  std::size_t positive = 0;
  for (Eigen::Index i = 0; i < h.growth.size(); ++i) {
    if (h.growth.data()[i] > 0.0) ++positive;
  }
  return {{"resolution", h.rho_E.size()},
          {"positive_cells", positive},
          {"max_growth", h.growth.array().isNaN().select(-1e300, h.growth.array()).maxCoeff()}};
}

}  // namespace

PresetReport run_preset(std::string_view name, const PresetOptions& opt) {
  RunConfig config = preset_config(name);
  const std::uint64_t seed = opt.seed.value_or(config.seed);
  config.seed = seed;
  PresetReport rep;
  rep.name = std::string(name);
  rep.directory = opt.out_dir / rep.name;
  fs::create_directories(rep.directory);
  const auto t0 = std::chrono::steady_clock::now();

  json diag;
  auto& files = rep.artifacts;
  if (name == "fig1") diag = run_fig1(rep.directory, files);
  if (name == "fig2") diag = run_fig2(rep.directory, files, opt.threads);
  if (name == "fig4") diag = run_fig4(rep.directory, files);
  if (name == "fig5a" || name == "fig5b" || name == "fig5c") {
    diag = run_fig5(name, rep.directory, files);
  }
  if (name == "fig6") diag = run_fig6(rep.directory, files, opt.threads);
  if (name == "fig7") diag = run_fig7(rep.directory, files);
  if (name == "fig8a" || name == "fig8b" || name == "fig8c") {
    diag = run_fig8(name, rep.directory, files, seed);
  }
  if (name == "fig8d") diag = run_fig8d(rep.directory, files, opt.threads);

  files.push_back(rep.directory / "config.ini");
  write_text(files.back(), serialize_config(config));
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json artifacts = json::array();
  for (const auto& f : files) artifacts.push_back(f.filename().string());
  const json manifest{{"preset", rep.name},
                      {"version", library_version()},
                      {"seed", seed},
                      {"config", serialize_config(config)},
                      {"wall_clock_seconds", wall},
                      {"artifacts", artifacts},
                      {"diagnostics", diag}};
  rep.manifest = manifest.dump(2);
  write_text(rep.directory / "manifest.json", rep.manifest + "\n");
  rep.artifacts.push_back(rep.directory / "manifest.json");
  return rep;
}

}  // namespace hetdyn
