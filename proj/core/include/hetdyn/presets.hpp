#pragma once

#include "hetdyn/arealization.hpp"
#include "hetdyn/config.hpp"
#include "hetdyn/continuation.hpp"
#include "hetdyn/diagnostics.hpp"
#include "hetdyn/dispersal_sweep.hpp"
#include "hetdyn/integrate.hpp"
#include "hetdyn/output.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hetdyn {

/// Runs the simulation a configuration describes.
SimulationRun simulate_config(const RunConfig& config, Observer observer = {},
                              std::size_t observe_stride = 1);

/// Names accepted by preset_config and run_preset.
const std::vector<std::string>& preset_names();

/// The configuration behind a preset. Sweep and map presets return their
/// base configuration.
RunConfig preset_config(std::string_view name);

// ---- fig1: front pinning -------------------------------------------------

struct StableInterval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Range of the bifurcation parameter over which at least `count` stable
/// equilibria coexist, read off continued branches (only admissible points
/// count). Empty when no such parameter exists.
std::optional<StableInterval> stable_multiplicity_interval(
    const std::vector<Branch>& branches, const NonspatialModel& model,
    std::size_t count = 2);

struct Fig1Result {
  SimulationRun run;  // convergence from the documented start
  Field steady;       // Newton-polished end state
  bool stable = false;
  double residual = 0.0;
  double l1_grass = 0.0;
  std::size_t front_crossings = 0;  // crossings of G = 1/2
  double front = 0.0;
  std::vector<Branch> branches;  // nonspatial, x as parameter
  std::optional<StableInterval> bistable;
};

Fig1Result fig1_experiment(std::size_t nodes = 400, bool store_snapshots = true);

// ---- fig2: dispersal sweep -----------------------------------------------

std::vector<double> fig2_sigmas();
DispersalSweep fig2_experiment(std::size_t threads = 0);

// ---- fig4: tristability --------------------------------------------------

struct Fig4State {
  std::string origin;  // initial condition label
  Field state;         // stacked (G, S, T, F)
  bool stable = false;
  double return_distance = 0.0;
  double l1_grass = 0.0;
  double l1_forest = 0.0;
  std::optional<double> forest_front;  // rising crossing of F = 1/2
};

struct Fig4Continuation {
  double sigma = 0.0;
  bool converged = false;
  bool stable = false;
  std::optional<double> forest_front;
};

struct Fig4Result {
  std::vector<Fig4State> states;  // one per ensemble member
  std::vector<std::size_t> distinct_stable;  // indices into states
  std::optional<std::size_t> grass_band;     // stable state with a forest front
  std::vector<Fig4Continuation> continuation;
  /// First sigma at which the grass-band branch is lost or unstable.
  std::optional<double> termination_sigma;
};

/// The documented initial-condition ensemble as (label, stacked state).
std::vector<std::pair<std::string, Field>> fig4_ensemble(const Grid1D& grid);

Fig4Result fig4_experiment(std::size_t nodes = 400, double sigma_max = 0.1,
                           double sigma_step = 0.0025);

// ---- fig5 / fig6: waves ----------------------------------------------------

struct WaveResult {
  RunConfig config;
  TimeSeries forest_average;
  PeriodClass period;
  SimulationRun run;  // snapshots only when requested
};

/// Forest-average wave run with beta intercept `beta_c` and slope parameter
/// `p_s` (1 = linear gradient).
WaveResult wave_experiment(double beta_c, double p_s = 1.0, double t_end = 4000.0,
                           std::size_t nodes = 400, bool store_snapshots = false);

struct Fig6Result {
  std::vector<std::pair<double, WaveResult>> runs;  // slope list order
  bool monotone = false;  // oscillations never return after stopping
  /// Bracket of the oscillation offset refined by bisection.
  std::optional<std::pair<double, double>> offset;
};

std::vector<double> fig6_slopes();
Fig6Result fig6_experiment(std::size_t threads = 0, double bisection_tol = 0.005,
                           double t_end = 4000.0);

bool oscillating(const PeriodClass& c) noexcept;

// ---- fig7 / fig8: arealization -------------------------------------------

struct Fig7Result {
  std::vector<double> rho_E;
  std::vector<std::vector<HomogeneousEquilibrium>> equilibria;  // at rho_N = 0.1
  std::optional<std::pair<double, double>> window;
  std::pair<double, double> cusp;
};

/// Point where the bistable window closes, tracked in rho_N from 0.1.
std::pair<double, double> estimate_cusp(double k1 = 2.0, double k2 = 2.0,
                                        double tol = 1e-5);

Fig7Result fig7_experiment();

struct Fig8Result {
  RunConfig config;
  double unstable_fraction = 0.0;
  Outcome outcome;
  std::vector<double> spacings;  // nearest-neighbour spike spacings
  SimulationRun run;
};

/// Morphogen region width for fig8a, fig8b, fig8c.
double fig8_width(std::string_view name);

/// Refuses (PreconditionFailed) when `require_unstable` and the path never
/// enters the Turing region.
Fig8Result fig8_experiment(double width, std::uint64_t seed = 1,
                           bool require_unstable = false);
Fig8Result fig8_experiment(const RunConfig& config, bool require_unstable = false);

TuringHeatmap fig8d_experiment(std::size_t resolution = 100, std::size_t threads = 0);

// ---- artifacts -----------------------------------------------------------

struct PresetOptions {
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
};

struct PresetReport {
  std::string name;
  std::filesystem::path directory;
  std::vector<std::filesystem::path> artifacts;
  std::string manifest;  // JSON text, also written as manifest.json
};

/// Runs a preset and writes its fields (CSV and binary), images and a
/// manifest into `<out_dir>/<name>`.
PresetReport run_preset(std::string_view name, const PresetOptions& options = {});

/// Writes CSV, binary and image artifacts of one run component under
/// `directory` with file stem `stem`; returns the written paths.
std::vector<std::filesystem::path> write_run_artifacts(const SimulationRun& run,
                                                       std::size_t component,
                                                       const std::filesystem::path& directory,
                                                       const std::string& stem);

std::string library_version();

}  // namespace hetdyn
