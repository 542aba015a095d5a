#include "hetdyn/diagnostics.hpp"

#include "hetdyn/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace hetdyn {

std::string_view to_string(PeriodTag t) noexcept {
  switch (t) {
    case PeriodTag::Steady:
      return "steady";
    case PeriodTag::Period1:
      return "period-1";
    case PeriodTag::Period2:
      return "period-2";
    case PeriodTag::Aperiodic:
      return "aperiodic";
  }
  return "aperiodic";
}

void TimeSeries::validate() const {
  if (times.size() != values.size()) {
    throw DimensionMismatch("time series: times and values differ in length");
  }
  if (times.size() < 2) return;
  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(dt > 0.0)) throw InvalidParameter("time series: times must increase");
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double step = times[i] - times[i - 1];
    if (!(step > 0.0) || std::abs(step - dt) > 1e-6 * dt) {
      throw InvalidParameter("time series: times must be uniformly spaced");
    }
  }
}

double spatial_mean(const Field& v, const Grid1D& grid) {
  if (static_cast<std::size_t>(v.size()) != grid.size()) {
    throw DimensionMismatch("spatial_mean: field does not match the grid");
  }
  return grid.trapezoid_weights().dot(v) / grid.length();
}

TimeSeries spatial_average(const SimulationRun& run, std::size_t c) {
  if (c >= run.components) throw InvalidParameter("spatial_average: unknown component");
  TimeSeries ts;
  ts.times = run.times;
  ts.values.reserve(run.snapshots.size());
  if (!run.grid) {
    for (const auto& s : run.snapshots) ts.values.push_back(s[static_cast<Eigen::Index>(c)]);
    return ts;
  }
  const std::size_t n = run.grid->size();
  const Field w = run.grid->trapezoid_weights() / run.grid->length();
  for (const auto& s : run.snapshots) ts.values.push_back(w.dot(component(s, c, n)));
  return ts;
}

double l1_norm(const Field& v, const Grid1D& grid) {
  if (static_cast<std::size_t>(v.size()) != grid.size()) {
    throw DimensionMismatch("l1_norm: field does not match the grid");
  }
  return grid.trapezoid_weights().dot(v.cwiseAbs());
}

std::vector<std::size_t> find_peaks(const std::vector<double>& v,
                                    double min_prominence) {
  std::vector<std::size_t> out;
  const std::size_t n = v.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(v[i] > v[i - 1] && v[i] >= v[i + 1])) continue;
    // Walk outwards to the nearest higher sample on each side; the
    // prominence is the height above the higher of the two valley floors.
    double left_min = v[i];
    std::size_t j = i;
    while (j > 0) {
      --j;
      if (v[j] > v[i]) break;
      left_min = std::min(left_min, v[j]);
    }
    double right_min = v[i];
    j = i;
    while (j + 1 < n) {
      ++j;
      if (v[j] > v[i]) break;
      right_min = std::min(right_min, v[j]);
    }
    if (v[i] - std::max(left_min, right_min) >= min_prominence) out.push_back(i);
  }
  return out;
}

double autocorrelation(const std::vector<double>& v, std::size_t lag) {
  if (lag >= v.size() - 1) return 0.0;
  const std::size_t m = v.size() - lag;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    ma += v[i];
    mb += v[i + lag];
  }
  ma /= static_cast<double>(m);
  mb /= static_cast<double>(m);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double a = v[i] - ma;
    const double b = v[i + lag] - mb;
    sab += a * b;
    saa += a * a;
    sbb += b * b;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

namespace {

double relative_spread(const std::vector<double>& v, double scale) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return (*hi - *lo) / scale;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Best correlation within one sample of `lag`.
double correlation_near(const std::vector<double>& v, double lag) {
  const auto c = static_cast<long>(std::llround(lag));
  double best = -1.0;
  for (long l = std::max(1L, c - 1); l <= c + 1; ++l) {
    best = std::max(best, autocorrelation(v, static_cast<std::size_t>(l)));
  }
  return best;
}

std::pair<double, std::size_t> largest_correlation_peak(const std::vector<double>& v) {
  const std::size_t max_lag = v.size() / 2;
  std::vector<double> r(max_lag + 1);
  for (std::size_t l = 0; l <= max_lag; ++l) r[l] = autocorrelation(v, l);
  double best = -1.0;
  std::size_t where = 0;
  for (std::size_t l = 1; l + 1 <= max_lag; ++l) {
    if (r[l] > r[l - 1] && r[l] >= r[l + 1] && r[l] > best) {
      best = r[l];
      where = l;
    }
  }
  return {best, where};
}

}  // namespace

PeriodClass detect_period(const TimeSeries& series, double transient_fraction) {
  PeriodOptions opt;
  opt.transient_fraction = transient_fraction;
  return detect_period(series, opt);
}

PeriodClass detect_period(const TimeSeries& series, const PeriodOptions& opt) {
  series.validate();
  if (!(opt.transient_fraction >= 0.0 && opt.transient_fraction < 1.0)) {
    throw InvalidParameter("transient fraction must lie in [0, 1)");
  }
  const auto skip = static_cast<std::size_t>(
      std::floor(opt.transient_fraction * static_cast<double>(series.size())));
  std::vector<double> v(series.values.begin() + static_cast<long>(skip),
                        series.values.end());
  if (v.size() < opt.min_samples) {
    throw InsufficientData("detect_period needs " + std::to_string(opt.min_samples) +
                           " post-transient samples, got " + std::to_string(v.size()));
  }
  const double dt = series.times[1] - series.times[0];
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double range = *hi_it - *lo_it;

  PeriodClass out;
  if (range < opt.steady_range) {
    out.tag = PeriodTag::Steady;
    out.note = "post-transient range below threshold";
    return out;
  }

  const auto peaks = find_peaks(v, opt.prominence_fraction * range);
  out.peaks = peaks.size();
  std::vector<double> intervals, heights;
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    heights.push_back(v[peaks[i]]);
    if (i > 0) intervals.push_back(dt * static_cast<double>(peaks[i] - peaks[i - 1]));
  }

  std::ostringstream note;
  std::optional<double> period;
  PeriodTag tag = PeriodTag::Aperiodic;
  if (peaks.size() >= 3) {
    const double mean_interval = mean_of(intervals);
    if (relative_spread(intervals, mean_interval) < opt.cluster_spread &&
        relative_spread(heights, range) < opt.cluster_spread) {
      tag = PeriodTag::Period1;
      period = mean_interval;
    } else if (peaks.size() >= 5) {
      std::vector<double> even, odd, pairs;
      for (std::size_t i = 0; i < heights.size(); ++i) {
        (i % 2 == 0 ? even : odd).push_back(heights[i]);
      }
      for (std::size_t i = 0; i + 1 < intervals.size(); i += 2) {
        pairs.push_back(intervals[i] + intervals[i + 1]);
      }
      const double mean_pair = mean_of(pairs);
      if (relative_spread(even, range) < opt.cluster_spread &&
          relative_spread(odd, range) < opt.cluster_spread &&
          std::abs(mean_of(even) - mean_of(odd)) > opt.height_separation * range &&
          relative_spread(pairs, mean_pair) < opt.cluster_spread) {
        tag = PeriodTag::Period2;
        period = mean_pair;
      }
    }
  }

  if (period) {
    const double r = correlation_near(v, *period / dt);
    out.autocorrelation = r;
    if (r >= opt.periodic_correlation) {
      out.tag = tag;
      out.base_period = period;
      note << peaks.size() << " peaks; autocorrelation " << r << " at the period";
      out.note = note.str();
      return out;
    }
    note << "peak clustering suggested " << to_string(tag)
         << " but autocorrelation at the period is only " << r << "; ";
  }
  const auto [best, lag] = largest_correlation_peak(v);
  out.tag = PeriodTag::Aperiodic;
  out.autocorrelation = best;
  note << peaks.size() << " peaks; largest autocorrelation peak " << best
       << " at lag " << dt * static_cast<double>(lag);
  if (best >= opt.aperiodic_correlation) note << " (inconclusive: correlated)";
  out.note = note.str();
  return out;
}

std::vector<double> spike_positions(const Field& field, const Grid1D& grid,
                                    std::optional<std::pair<double, double>> window,
                                    double prominence_fraction) {
  if (!(prominence_fraction > 0.0 && prominence_fraction < 1.0)) {
    throw InvalidParameter("prominence fraction must lie in (0, 1)");
  }
  if (static_cast<std::size_t>(field.size()) != grid.size()) {
    throw DimensionMismatch("count_spikes: field does not match the grid");
  }
  std::size_t first = 0, last = grid.size() - 1;
  if (window) {
    while (first < grid.size() && grid.node(first) < window->first) ++first;
    while (last > 0 && grid.node(last) > window->second) --last;
  }
  if (first >= last) return {};
  std::vector<double> v(field.data() + first, field.data() + last + 1);
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double range = *hi - *lo;
  if (range <= 0.0) return {};
  std::vector<double> out;
  for (std::size_t i : find_peaks(v, prominence_fraction * range)) {
    out.push_back(grid.node(first + i));
  }
  return out;
}

std::size_t count_spikes(const Field& field, const Grid1D& grid,
                         std::optional<std::pair<double, double>> window,
                         double prominence_fraction) {
  return spike_positions(field, grid, window, prominence_fraction).size();
}

}  // namespace hetdyn
