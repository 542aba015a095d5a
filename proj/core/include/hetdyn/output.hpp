#pragma once

#include "hetdyn/integrate.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hetdyn {

/// One component of a stored run: values(i, j) at time t[i], node x[j].
struct SpaceTime {
  std::vector<double> x;
  std::vector<double> t;
  Eigen::MatrixXd values;
};

SpaceTime space_time(const SimulationRun& run, std::size_t component);

/// First row `x, x_0, ..., x_{n-1}`, then one `t, v_0, ..., v_{n-1}` row per
/// snapshot, every number with 17 significant digits.
void write_field_csv(const std::filesystem::path& path, const SpaceTime& field);
SpaceTime read_field_csv(const std::filesystem::path& path);

/// Row-major (time x space) little-endian IEEE-754 doubles, with a text
/// sidecar `<path>.meta` giving rows, columns and layout.
void write_spacetime_binary(const std::filesystem::path& path,
                            const Eigen::MatrixXd& values);
Eigen::MatrixXd read_spacetime_binary(const std::filesystem::path& path);

using Rgb = std::array<std::uint8_t, 3>;

/// Blue (lo) through white (midpoint) to red (hi), linear in each half;
/// values are clamped to [lo, hi], NaN maps to grey (128, 128, 128) and a
/// degenerate range maps to white.
Rgb blue_white_red(double v, double lo, double hi) noexcept;

/// Binary P6 pixmap, one pixel per matrix entry (rows top to bottom). The
/// colour range is [min, max] of the finite entries unless given.
void render_heatmap(const std::filesystem::path& path, const Eigen::MatrixXd& values,
                    std::optional<std::pair<double, double>> range = std::nullopt);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace hetdyn
