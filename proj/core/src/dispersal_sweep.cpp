#include "hetdyn/dispersal_sweep.hpp"

#include "hetdyn/error.hpp"
#include "hetdyn/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace hetdyn {

std::string_view to_string(DispersalKind k) noexcept {
  switch (k) {
    case DispersalKind::AllGrass:
      return "all-grass";
    case DispersalKind::GrassDominated:
      return "grass-dominated";
    case DispersalKind::FrontPinned:
      return "front-pinned";
    case DispersalKind::ForestDominated:
      return "forest-dominated";
  }
  return "front-pinned";
}

DispersalKind classify_dispersal_state(const Field& G, const Grid1D& grid) {
  if ((G.array() - 1.0).abs().maxCoeff() < 1e-9) return DispersalKind::AllGrass;
  const Field above = (G.array() > 0.5).cast<double>().matrix();
  const double fraction = grid.trapezoid_weights().dot(above) / grid.length();
  if (fraction < 0.2) return DispersalKind::ForestDominated;
  if (fraction > 0.7) return DispersalKind::GrassDominated;
  return DispersalKind::FrontPinned;
}

std::vector<double> DispersalSweep::sigmas_with_stable(std::size_t count) const {
  std::vector<double> out;
  for (double s : sigmas) {
    std::size_t stable = 0;
    for (const auto& b : branches) {
      for (const auto& p : b.points) {
        if (p.sigma == s && p.stable) ++stable;
      }
    }
    if (stable >= count) out.push_back(s);
  }
  return out;
}

DispersalSweepOptions::DispersalSweepOptions() {
  InitialCondition grass;
  grass.left = {0.95, 0.0, 0.0, 0.05};
  InitialCondition forest;
  forest.left = {0.05, 0.0, 0.0, 0.95};
  InitialCondition mixed;
  mixed.left = {0.5, 0.0, 0.0, 0.5};
  InitialCondition step;
  step.kind = InitialKind::Ramp;
  step.left = grass.left;
  step.right = forest.left;
  step.location = 0.5;
  step.width = 0.0;
  ensemble = {grass, forest, mixed, step};
}

namespace {

class SystemCache {
 public:
  SystemCache(const Grid1D& grid, const SLParams& base) : grid_(grid), base_(base) {}

  std::shared_ptr<const GrassForestSystem> get(double sigma) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(sigma);
    if (it != cache_.end()) return it->second;
    SLParams p = base_;
    p.sigma_F = p.sigma_W = p.sigma_T = sigma;
    auto sys = std::make_shared<const GrassForestSystem>(grid_, p);
    if (cache_.size() > 64) cache_.clear();
    cache_.emplace(sigma, sys);
    return sys;
  }

 private:
  Grid1D grid_;
  SLParams base_;
  std::mutex mutex_;
  std::map<double, std::shared_ptr<const GrassForestSystem>> cache_;
};

struct Found {
  Field state;
  double residual;
};

// Newton only, no relaxation and no stability check.
std::optional<Found> newton_at(const GrassForestSystem& sys, const Field& guess,
                               const SteadyOptions& base) {
  SteadyOptions o = base;
  o.method = SteadyMethod::Newton;
  o.relax_time = 0.0;
  o.check_stability = false;
  try {
    auto r = spatial_steady_state(sys, guess, o);
    return Found{std::move(r.state), r.residual};
  } catch (const NoSteadyState&) {
    return std::nullopt;
  }
}

double distance(const Field& a, const Field& b) { return (a - b).norm(); }

}  // namespace

DispersalSweep sweep_dispersal(const Grid1D& grid, const SLParams& base,
                               std::vector<double> sigmas,
                               const DispersalSweepOptions& opt) {
  if (sigmas.empty()) throw InvalidParameter("sweep_dispersal needs sigma values");
  if (!std::is_sorted(sigmas.begin(), sigmas.end()) ||
      std::adjacent_find(sigmas.begin(), sigmas.end()) != sigmas.end()) {
    throw InvalidParameter("sigma values must be strictly increasing");
  }
  if (!(sigmas.front() > 0.0)) throw InvalidParameter("sigma values must be positive");
  const std::size_t K = sigmas.size();
  const auto n = static_cast<Eigen::Index>(grid.size());
  const double match = opt.match_factor * std::sqrt(static_cast<double>(n));
  SystemCache cache(grid, base);

  // Ensemble relaxation at every sigma, plus the exact all-grass state.
  std::vector<std::vector<Found>> found(K);
  parallel_for(K, opt.threads, [&](std::size_t k) {
    const auto sys = cache.get(sigmas[k]);
    std::vector<Found> states{{Field::Ones(n), 0.0}};
    for (const auto& ic : opt.ensemble) {
      SteadyOptions o = opt.steady;
      o.relax_time = opt.relax_time;
      o.check_stability = false;
      try {
        auto r = spatial_steady_state(*sys, make_grassforest_initial(ic, grid), o);
        const bool dup = std::any_of(states.begin(), states.end(), [&](const Found& f) {
          return (f.state - r.state).lpNorm<Eigen::Infinity>() < 1e-6;
        });
        if (!dup) states.push_back({std::move(r.state), r.residual});
      } catch (const NoSteadyState&) {
      }
    }
    found[k] = std::move(states);
  });

  // Link states across neighbouring sigmas by nearest field.
  struct Work {
    std::vector<std::size_t> index;  // sigma index per point
    std::vector<Found> states;
    std::vector<bool> continued;
    std::optional<double> fold_low, fold_high;
  };
  std::vector<Work> work;
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<bool> used(found[k].size(), false);
    for (auto& w : work) {
      if (w.index.back() + 1 != k) continue;
      double best = match;
      std::size_t pick = found[k].size();
      for (std::size_t j = 0; j < found[k].size(); ++j) {
        const double d = distance(found[k][j].state, w.states.back().state);
        if (!used[j] && d < best) {
          best = d;
          pick = j;
        }
      }
      if (pick < found[k].size()) {
        used[pick] = true;
        w.index.push_back(k);
        w.states.push_back(found[k][pick]);
        w.continued.push_back(false);
      }
    }
    for (std::size_t j = 0; j < found[k].size(); ++j) {
      if (!used[j]) work.push_back({{k}, {found[k][j]}, {false}, {}, {}});
    }
  }

  // Natural continuation in sigma from each branch end, with adaptive
  // steps; a step collapsing below fold_tol marks a fold.
  auto extend = [&](Work& w, int dir) {
    for (;;) {
      const std::size_t end = dir > 0 ? w.index.back() : w.index.front();
      if ((dir > 0 && end + 1 >= K) || (dir < 0 && end == 0)) return;
      const std::size_t target = dir > 0 ? end + 1 : end - 1;
      double s = sigmas[end];
      Field u = dir > 0 ? w.states.back().state : w.states.front().state;
      double step = sigmas[target] - s;
      bool reached = false;
      std::optional<Found> last;
      while (std::abs(step) >= opt.fold_tol) {
        const double trial = std::abs(sigmas[target] - (s + step)) < 1e-15
                                 ? sigmas[target]
                                 : s + step;
        auto r = newton_at(*cache.get(trial), u, opt.steady);
        if (r && distance(r->state, u) < match) {
          s = trial;
          u = r->state;
          last = std::move(r);
          if (s == sigmas[target]) {
            reached = true;
            break;
          }
          const double remaining = sigmas[target] - s;
          step = std::abs(2.0 * step) < std::abs(remaining) ? 2.0 * step : remaining;
        } else {
          step *= 0.5;
        }
      }
      if (!reached) {
        (dir > 0 ? w.fold_high : w.fold_low) = s;
        return;
      }
      if (dir > 0) {
        w.index.push_back(target);
        w.states.push_back(std::move(*last));
        w.continued.push_back(true);
      } else {
        w.index.insert(w.index.begin(), target);
        w.states.insert(w.states.begin(), std::move(*last));
        w.continued.insert(w.continued.begin(), true);
      }
    }
  };
  parallel_for(work.size(), opt.threads, [&](std::size_t i) {
    extend(work[i], +1);
    extend(work[i], -1);
  });

  // Branches that continued into one another describe the same solution set.
  std::vector<bool> dead(work.size(), false);
  for (std::size_t a = 0; a < work.size(); ++a) {
    for (std::size_t b = a + 1; b < work.size() && !dead[a]; ++b) {
      if (dead[b]) continue;
      bool same = false;
      for (std::size_t i = 0; i < work[a].index.size() && !same; ++i) {
        for (std::size_t j = 0; j < work[b].index.size(); ++j) {
          if (work[a].index[i] == work[b].index[j] &&
              (work[a].states[i].state - work[b].states[j].state)
                      .lpNorm<Eigen::Infinity>() < 1e-6) {
            same = true;
            break;
          }
        }
      }
      if (!same) continue;
      // Keep the union, preferring points of the longer branch.
      Work& keep = work[a].index.size() >= work[b].index.size() ? work[a] : work[b];
      Work& drop = &keep == &work[a] ? work[b] : work[a];
      for (std::size_t j = 0; j < drop.index.size(); ++j) {
        if (std::find(keep.index.begin(), keep.index.end(), drop.index[j]) !=
            keep.index.end()) {
          continue;
        }
        const auto pos = std::lower_bound(keep.index.begin(), keep.index.end(),
                                          drop.index[j]) - keep.index.begin();
        keep.index.insert(keep.index.begin() + pos, drop.index[j]);
        keep.states.insert(keep.states.begin() + pos, drop.states[j]);
        keep.continued.insert(keep.continued.begin() + pos, drop.continued[j]);
      }
      if (!keep.fold_low) keep.fold_low = drop.fold_low;
      if (!keep.fold_high) keep.fold_high = drop.fold_high;
      dead[&drop == &work[a] ? a : b] = true;
    }
  }

  DispersalSweep out;
  out.sigmas = sigmas;
  for (std::size_t i = 0; i < work.size(); ++i) {
    if (dead[i]) continue;
    DispersalBranch br;
    br.fold_low = work[i].fold_low;
    br.fold_high = work[i].fold_high;
    for (std::size_t j = 0; j < work[i].index.size(); ++j) {
      DispersalPoint p;
      p.sigma = sigmas[work[i].index[j]];
      p.state = work[i].states[j].state;
      p.residual = work[i].states[j].residual;
      p.l1_grass = l1_norm(p.state, grid);
      p.from_continuation = work[i].continued[j];
      br.points.push_back(std::move(p));
    }
    out.branches.push_back(std::move(br));
  }

  // Stability of every point, then a branch label from its middle point.
  std::vector<DispersalPoint*> all;
  for (auto& b : out.branches) {
    for (auto& p : b.points) all.push_back(&p);
  }
  parallel_for(all.size(), opt.threads, [&](std::size_t i) {
    const auto sys = cache.get(all[i]->sigma);
    const double d = perturbation_return_distance(*sys, all[i]->state, opt.steady);
    all[i]->stable = d <= opt.steady.return_tolerance;
  });
  for (auto& b : out.branches) {
    b.kind = classify_dispersal_state(b.points[b.points.size() / 2].state, grid);
  }
  std::sort(out.branches.begin(), out.branches.end(),
            [](const DispersalBranch& a, const DispersalBranch& b) {
              if (a.kind != b.kind) return a.kind < b.kind;
              return a.points.front().sigma < b.points.front().sigma;
            });
  return out;
}

}  // namespace hetdyn
