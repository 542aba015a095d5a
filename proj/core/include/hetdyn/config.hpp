#pragma once

#include "hetdyn/arealization.hpp"
#include "hetdyn/grid_kernels.hpp"
#include "hetdyn/sl_dynamics.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace hetdyn {

enum class ModelKind { GrassForest, SL4, Areal };

std::string_view to_string(ModelKind m) noexcept;
ModelKind model_kind_from_string(std::string_view s);

struct GridSpec {
  double x_min = 0.0;
  double x_max = 1.0;
  std::size_t n = 400;

  Grid1D build() const { return Grid1D(x_min, x_max, n); }
  bool operator==(const GridSpec&) const = default;
};

/// Everything needed to reproduce one simulation. Fields that do not apply
/// to `model` are carried along unchanged.
struct RunConfig {
  ModelKind model = ModelKind::GrassForest;
  GridSpec grid;
  SLParams sl;
  InitialCondition initial;
  ArealParams areal;
  double noise = 1e-2;  // areal initial noise amplitude
  double h = 0.05;
  double t_end = 100.0;
  std::size_t snapshot_stride = 20;
  std::uint64_t seed = 1;
  std::string output = "out";

  /// Defaults for a model: unit domain and h = 0.05 for the SL models,
  /// [0, 40] with h = 0.1 for arealization; 400 nodes throughout.
  static RunConfig defaults(ModelKind model);

  /// Throws InvalidParameter on any violated constraint.
  void validate() const;

  bool operator==(const RunConfig&) const = default;
};

/// Parses INI-style text: `[section]` headers and `key = value` lines,
/// `#` or `;` comments. Sections: run (also the implicit top level), grid,
/// kernels, sl, gradient.alpha, gradient.beta, initial, areal. The model
/// is read first and selects the defaults for every unset key. Unknown
/// keys, malformed values and violated constraints raise ParseError with
/// the line number and key.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Full INI text of every key; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

}  // namespace hetdyn
