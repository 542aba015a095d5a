#pragma once

#include "hetdyn/grid_kernels.hpp"
#include "hetdyn/integrate.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hetdyn {

/// Uniformly sampled scalar observable.
struct TimeSeries {
  std::vector<double> times;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  /// Equal lengths, strictly increasing and uniformly spaced times.
  void validate() const;
};

enum class PeriodTag { Steady, Period1, Period2, Aperiodic };

std::string_view to_string(PeriodTag t) noexcept;

struct PeriodClass {
  PeriodTag tag = PeriodTag::Aperiodic;
  std::optional<double> base_period;
  std::string note;
  std::size_t peaks = 0;
  /// Autocorrelation at the reported period (periodic tags) or the largest
  /// autocorrelation peak beyond lag 0 (otherwise).
  double autocorrelation = 0.0;
};

struct PeriodOptions {
  double transient_fraction = 0.5;
  std::size_t min_samples = 2000;
  double prominence_fraction = 0.05;
  double steady_range = 1e-3;
  double cluster_spread = 0.05;
  double height_separation = 0.10;
  double periodic_correlation = 0.9;
  double aperiodic_correlation = 0.8;
};

/// Trapezoid average of one component over the grid, per stored snapshot.
TimeSeries spatial_average(const SimulationRun& run, std::size_t component);

/// Trapezoid average of a single field.
double spatial_mean(const Field& v, const Grid1D& grid);

PeriodClass detect_period(const TimeSeries& series, const PeriodOptions& options);
PeriodClass detect_period(const TimeSeries& series, double transient_fraction = 0.5);

/// Indices of local maxima whose topographic prominence is >= min_prominence.
std::vector<std::size_t> find_peaks(const std::vector<double>& v,
                                    double min_prominence);

/// Pearson correlation of v[0..n-lag) with v[lag..n).
double autocorrelation(const std::vector<double>& v, std::size_t lag);

/// Positions of local maxima of `field` inside `window` (whole grid if
/// empty) with prominence >= prominence_fraction * (range in the window).
std::vector<double> spike_positions(const Field& field, const Grid1D& grid,
                                    std::optional<std::pair<double, double>> window = {},
                                    double prominence_fraction = 0.2);
std::size_t count_spikes(const Field& field, const Grid1D& grid,
                         std::optional<std::pair<double, double>> window = {},
                         double prominence_fraction = 0.2);

/// Trapezoid integral of |v| over the grid.
double l1_norm(const Field& v, const Grid1D& grid);

}  // namespace hetdyn
