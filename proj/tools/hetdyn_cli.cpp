#include "hetdyn/presets.hpp"
#include "hetdyn/equilibrium.hpp"
#include "hetdyn/error.hpp"
#include "hetdyn/spatial_steady.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hetdyn;

namespace {

struct Common {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
};

RunConfig resolve_config(const Common& c, ModelKind fallback) {
  RunConfig cfg = c.config_path.empty() ? RunConfig::defaults(fallback)
                                        : load_config(c.config_path);
  if (c.seed) {
    cfg.seed = *c.seed;
    cfg.initial.seed = *c.seed;
  }
  if (!c.out_dir.empty()) cfg.output = c.out_dir;
  return cfg;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_table(const fs::path& path, const std::string& header,
                 const std::vector<std::vector<double>>& rows) {
  std::string text = header + "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) text += ',';
      text += fmt(row[i]);
    }
    text += '\n';
  }
  write_text(path, text);
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void finish(const std::string& command, const RunConfig& cfg, const Timer& timer,
            json diagnostics) {
  const fs::path dir = cfg.output;
  write_text(dir / "config.ini", serialize_config(cfg));
  const json manifest{{"command", command},
                      {"version", library_version()},
                      {"seed", cfg.seed},
                      {"config", serialize_config(cfg)},
                      {"wall_clock_seconds", timer.seconds()},
                      {"diagnostics", diagnostics}};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  std::cout << diagnostics.dump() << "\n";
}

const char* component_name(ModelKind m, std::size_t c) {
  static const char* sl[] = {"G", "S", "T", "F"};
  static const char* areal[] = {"E", "C_E", "N", "C_N"};
  if (m == ModelKind::GrassForest) return "G";
  return m == ModelKind::Areal ? areal[c] : sl[c];
}

json write_all_components(const SimulationRun& run, const RunConfig& cfg) {
  json files = json::array();
  for (std::size_t c = 0; c < run.components; ++c) {
    for (const auto& p : write_run_artifacts(run, c, cfg.output, component_name(cfg.model, c))) {
      files.push_back(p.filename().string());
    }
  }
  return files;
}

void cmd_simulate(const Common& c) {
  const Timer timer;
  const RunConfig cfg = resolve_config(c, ModelKind::GrassForest);
  const SimulationRun run = simulate_config(cfg);
  json diag{{"status", run.status == RunStatus::Completed ? "completed" : "halted"},
            {"final_time", run.final_time},
            {"snapshots", run.snapshots.size()},
            {"artifacts", write_all_components(run, cfg)}};
  if (!run.diagnostic.empty()) diag["note"] = run.diagnostic;
  finish("simulate", cfg, timer, diag);
}

std::unique_ptr<SpatialSystem> make_system(const RunConfig& cfg, const Grid1D& grid) {
  if (cfg.model == ModelKind::GrassForest) return std::make_unique<GrassForestSystem>(grid, cfg.sl);
  if (cfg.model == ModelKind::SL4) return std::make_unique<SL4System>(grid, cfg.sl);
  throw InvalidParameter("steady needs model GrassForest or SL4");
}

void cmd_steady(const Common& c, const std::string& method) {
  const Timer timer;
  const RunConfig cfg = resolve_config(c, ModelKind::GrassForest);
  const Grid1D grid = cfg.grid.build();
  const auto sys = make_system(cfg, grid);
  InitialCondition ic = cfg.initial;
  ic.seed = cfg.seed;
  const Field guess = cfg.model == ModelKind::GrassForest
                          ? make_grassforest_initial(ic, grid)
                          : make_sl4_initial(ic, grid).stacked();
  SteadyOptions so;
  so.method = steady_method_from_string(method);
  so.relax_time = cfg.t_end;
  so.relax_h = cfg.h;
  so.seed = cfg.seed;
  const SpatialSteadyState st = spatial_steady_state(*sys, guess, so);
  const std::size_t n = grid.size();
  const std::size_t m = static_cast<std::size_t>(st.state.size()) / n;
  std::string header = "x";
  for (std::size_t k = 0; k < m; ++k) header += std::string(",") + component_name(cfg.model, k);
  std::vector<std::vector<double>> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i].push_back(grid.node(i));
    for (std::size_t k = 0; k < m; ++k) rows[i].push_back(st.state[static_cast<Eigen::Index>(k * n + i)]);
  }
  write_table(fs::path(cfg.output) / "steady.csv", header, rows);
  json diag{{"l1_grass", st.l1_grass},
            {"stable", st.stable},
            {"residual", st.residual},
            {"iterations", st.iterations},
            {"return_distance", st.return_distance}};
  try {
    diag["grass_front"] = locate_front(component(st.state, 0, n), grid, 0.5);
  } catch (const NoFront&) {
    diag["grass_front"] = nullptr;
  }
  finish("steady", cfg, timer, diag);
}

void cmd_sweep(const Common& c, double lo, double hi, double step) {
  const Timer timer;
  const RunConfig cfg = resolve_config(c, ModelKind::GrassForest);
  if (cfg.model != ModelKind::GrassForest) {
    throw InvalidParameter("sweep-dispersal needs model GrassForest");
  }
  if (!(step > 0.0) || !(hi >= lo) || !(lo > 0.0)) throw InvalidParameter("bad sigma range");
  std::vector<double> sigmas;
  for (int k = 0; lo + k * step <= hi + 1e-12; ++k) sigmas.push_back(lo + k * step);
  DispersalSweepOptions o;
  o.threads = c.threads;
  const DispersalSweep s = sweep_dispersal(cfg.grid.build(), cfg.sl, sigmas, o);
  std::vector<std::vector<double>> rows;
  json branches = json::array();
  for (std::size_t b = 0; b < s.branches.size(); ++b) {
    const auto& br = s.branches[b];
    for (const auto& p : br.points) {
      rows.push_back({double(b), p.sigma, p.l1_grass, p.stable ? 1.0 : 0.0});
    }
    branches.push_back({{"kind", std::string(to_string(br.kind))},
                        {"sigma_first", br.points.front().sigma},
                        {"sigma_last", br.points.back().sigma},
                        {"fold_low", br.fold_low ? json(*br.fold_low) : json(nullptr)},
                        {"fold_high", br.fold_high ? json(*br.fold_high) : json(nullptr)}});
  }
  write_table(fs::path(cfg.output) / "branches.csv", "branch,sigma,l1_grass,stable", rows);
  finish("sweep-dispersal", cfg, timer, {{"branches", branches}});
}

void cmd_bifurcate(const Common& c) {
  const Timer timer;
  const RunConfig cfg = resolve_config(c, ModelKind::GrassForest);
  std::unique_ptr<NonspatialModel> model;
  const SpatialGradient alpha = cfg.sl.alpha;
  const SpatialGradient beta = cfg.sl.beta;
  if (cfg.model == ModelKind::GrassForest) {
    model = std::make_unique<GrassForestODE>(cfg.sl.phi, [alpha](double x) { return alpha(x); });
  } else if (cfg.model == ModelKind::SL4) {
    model = std::make_unique<SL4ODE>(cfg.sl, [alpha](double x) { return alpha(x); },
                                     [beta](double x) { return beta(x); });
  } else {
    throw InvalidParameter("bifurcate needs model GrassForest or SL4");
  }
  ContinuationOptions opt;
  opt.p_min = cfg.grid.x_min;
  opt.p_max = cfg.grid.x_max;
  std::vector<std::vector<double>> rows;
  json branches = json::array();
  std::size_t index = 0;
  for (const double p0 : {opt.p_min, opt.p_max}) {
    for (const auto& eq : find_equilibria(*model, p0, FindOptions{.seed = cfg.seed})) {
      ContinuationOptions o = opt;
      o.direction = p0 == opt.p_min ? +1 : -1;
      const Branch br = continue_branch(*model, eq, o);
      json labels = json::array();
      for (const auto& l : br.labels) {
        labels.push_back({{"event", std::string(to_string(l.event))},
                          {"x", br.points[l.index].parameter},
                          {"note", l.note}});
      }
      for (const auto& p : br.points) {
        std::vector<double> row{double(index), p.parameter,
                                p.stability == Stability::Stable ? 1.0 : 0.0};
        for (Eigen::Index k = 0; k < p.state.size(); ++k) row.push_back(p.state[k]);
        rows.push_back(std::move(row));
      }
      branches.push_back({{"start", p0}, {"points", br.points.size()}, {"labels", labels}});
      ++index;
    }
  }
  const std::string header = cfg.model == ModelKind::GrassForest
                                 ? "branch,x,stable,G"
                                 : "branch,x,stable,G,S,T,F";
  write_table(fs::path(cfg.output) / "branches.csv", header, rows);
  finish("bifurcate", cfg, timer, {{"branches", branches}});
}

void cmd_two_param(const Common& c, std::pair<double, double> a, std::pair<double, double> b,
                   std::size_t resolution) {
  const Timer timer;
  const RunConfig cfg = resolve_config(c, ModelKind::SL4);
  TwoParamOptions o;
  o.threads = c.threads;
  const TwoParamMap map = scan_two_parameter(a, b, resolution, cfg.sl, o);
  std::vector<std::vector<double>> rows;
  Eigen::MatrixXd image(static_cast<Eigen::Index>(map.beta.size()),
                        static_cast<Eigen::Index>(map.alpha.size()));
  for (std::size_t j = 0; j < map.beta.size(); ++j) {
    for (std::size_t i = 0; i < map.alpha.size(); ++i) {
      const auto& cell = map.at(i, j);
      rows.push_back({map.alpha[i], map.beta[j], double(cell.stable_count),
                      cell.oscillating ? 1.0 : 0.0});
      image(static_cast<Eigen::Index>(map.beta.size() - 1 - j), static_cast<Eigen::Index>(i)) =
          map.code(i, j);
    }
  }
  const fs::path dir = cfg.output;
  write_table(dir / "regimes.csv", "alpha,beta,stable_count,oscillating", rows);
  render_heatmap(dir / "regimes.ppm", image);
  finish("two-param", cfg, timer, {{"resolution", resolution}});
}

void cmd_turing_map(const Common& c, std::size_t resolution, double hi) {
  const Timer timer;
  const RunConfig cfg = resolve_config(c, ModelKind::Areal);
  const double L = cfg.grid.x_max - cfg.grid.x_min;
  const TuringHeatmap h = turing_heatmap({0.0, hi}, {0.0, hi}, resolution, cfg.areal, L, 200,
                                         c.threads);
  const fs::path dir = cfg.output;
  write_field_csv(dir / "growth.csv", SpaceTime{h.rho_E, h.rho_N, h.growth});
  render_heatmap(dir / "growth.ppm", h.growth.colwise().reverse());
  finish("turing-map", cfg, timer,
         {{"resolution", resolution}, {"positive_anywhere", h.positive_anywhere()}});
}

void cmd_areal(const Common& c) {
  const Timer timer;
  RunConfig cfg = resolve_config(c, ModelKind::Areal);
  if (cfg.model != ModelKind::Areal) throw InvalidParameter("areal-sim needs model Areal");
  const SimulationRun run = simulate_config(cfg);
  json diag{{"final_time", run.final_time}, {"artifacts", write_all_components(run, cfg)}};
  const Grid1D grid = cfg.grid.build();
  if (cfg.areal.use_path) {
    const auto& p = cfg.areal.path;
    const Outcome o = classify_outcome(component(run.final_state, 0, grid.size()), grid,
                                       p.r_lo, p.r_hi);
    diag["outcome"] = std::string(to_string(o.kind));
    diag["spikes"] = o.spikes;
    diag["spike_positions"] = o.spike_positions;
    diag["unstable_fraction"] = path_unstable_fraction(p.p1, p.p2, cfg.areal, grid.x_max() - grid.x_min());
  }
  finish("areal-sim", cfg, timer, diag);
}

void cmd_preset(const Common& c, const std::string& name) {
  PresetOptions o;
  if (!c.out_dir.empty()) o.out_dir = c.out_dir;
  o.seed = c.seed;
  o.threads = c.threads;
  const PresetReport r = run_preset(name, o);
  std::cout << json::parse(r.manifest)["diagnostics"].dump() << "\n";
}

void cmd_render(const std::string& artifact, std::string out, std::optional<double> lo,
                std::optional<double> hi) {
  const fs::path in = artifact;
  Eigen::MatrixXd values;
  if (in.extension() == ".csv") {
    values = read_field_csv(in).values;
  } else if (in.extension() == ".f64") {
    values = read_spacetime_binary(in);
  } else {
    throw InvalidParameter("render expects a field .csv or .f64 artifact");
  }
  if (out.empty()) out = fs::path(in).replace_extension(".ppm").string();
  std::optional<std::pair<double, double>> range;
  if (lo && hi) range = std::make_pair(*lo, *hi);
  render_heatmap(out, values, range);
  std::cout << json{{"image", out}, {"rows", values.rows()}, {"cols", values.cols()}}.dump()
            << "\n";
}

void report(const std::string& kind, const std::string& message, const json& extra = {}) {
  json line{{"error", kind}, {"message", message}};
  if (extra.is_object()) line.update(extra);
  std::cerr << line.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial savanna-forest and cortical arealization dynamics"};
  app.set_version_flag("--version", library_version());
  app.require_subcommand(1);

  Common common;
  app.add_option("--config", common.config_path, "INI run configuration");
  app.add_option("--out", common.out_dir, "Output directory");
  app.add_option("--seed", common.seed, "Random seed override");
  app.add_option("--threads", common.threads, "Worker threads (0 = all cores)");
  // Accept the shared flags after the subcommand as well.
  auto shared = [&](CLI::App* sub) {
    sub->fallthrough();
    return sub;
  };

  auto* simulate = shared(app.add_subcommand("simulate", "Integrate a configured model"));
  std::string method = "newton";
  auto* steady = shared(app.add_subcommand("steady", "Relax and converge to a steady state"));
  steady->add_option("--method", method, "newton or fixed-point");
  double s_lo = 0.005, s_hi = 0.2, s_step = 0.005;
  auto* sweep = shared(app.add_subcommand("sweep-dispersal", "Steady branches versus sigma"));
  sweep->add_option("--sigma-min", s_lo);
  sweep->add_option("--sigma-max", s_hi);
  sweep->add_option("--sigma-step", s_step);
  auto* bifurcate =
      shared(app.add_subcommand("bifurcate", "Nonspatial continuation in position"));
  std::pair<double, double> a_range{0.0, 1.2}, b_range{0.0, 1.2};
  std::size_t two_res = 60;
  auto* two = shared(app.add_subcommand("two-param", "Regime map over (alpha, beta)"));
  two->add_option("--alpha", a_range, "alpha range")->expected(2);
  two->add_option("--beta", b_range, "beta range")->expected(2);
  two->add_option("--resolution", two_res);
  std::size_t map_res = 100;
  double map_hi = 0.6;
  auto* turing = shared(app.add_subcommand("turing-map", "Turing growth over morphogens"));
  turing->add_option("--resolution", map_res);
  turing->add_option("--max", map_hi, "upper end of both morphogen axes");
  auto* areal = shared(app.add_subcommand("areal-sim", "Arealization simulation"));
  std::string preset_name;
  auto* preset = shared(app.add_subcommand("preset", "Run a figure preset"));
  preset->add_option("name", preset_name)->required()->check(CLI::IsMember(preset_names()));
  std::string artifact, image;
  std::optional<double> lo, hi;
  auto* render = shared(app.add_subcommand("render", "Render a field artifact to P6"));
  render->add_option("artifact", artifact)->required();
  render->add_option("--image", image, "output image path");
  render->add_option("--min", lo);
  render->add_option("--max", hi);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    report("usage", e.what());
    return 2;
  }

  try {
    if (*simulate) cmd_simulate(common);
    if (*steady) cmd_steady(common, method);
    if (*sweep) cmd_sweep(common, s_lo, s_hi, s_step);
    if (*bifurcate) cmd_bifurcate(common);
    if (*two) cmd_two_param(common, a_range, b_range, two_res);
    if (*turing) cmd_turing_map(common, map_res, map_hi);
    if (*areal) cmd_areal(common);
    if (*preset) cmd_preset(common, preset_name);
    if (*render) cmd_render(artifact, image, lo, hi);
  } catch (const ParseError& e) {
    report(e.kind(), e.what(), {{"line", e.line()}, {"key", e.key()}});
    return 1;
  } catch (const Error& e) {
    report(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    report("internal", e.what());
    return 1;
  }
  return 0;
}
