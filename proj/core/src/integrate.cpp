#include "hetdyn/integrate.hpp"

#include "hetdyn/error.hpp"

#include <cmath>
#include <sstream>

namespace hetdyn {

Field SimulationRun::component_at(std::size_t snapshot, std::size_t c) const {
  if (snapshot >= snapshots.size() || c >= components) {
    throw InvalidParameter("snapshot or component index out of range");
  }
  return component(snapshots[snapshot], c, nodes());
}

SimulationRun euler_simulate(const RateFunction& rhs, Field state,
                             const EulerOptions& opt) {
  if (!(opt.h > 0.0) || !std::isfinite(opt.h)) {
    throw InvalidParameter("time step h must be positive");
  }
  if (opt.h > opt.max_step) {
    throw InvalidParameter("time step h exceeds the stable limit " +
                           std::to_string(opt.max_step));
  }
  if (!(opt.t_end >= 0.0)) throw InvalidParameter("t_end must be >= 0");
  if (opt.snapshot_stride < 1 || opt.observe_stride < 1) {
    throw InvalidParameter("snapshot and observer strides must be >= 1");
  }
  if (!state.allFinite()) {
    throw IntegrationBlowup("initial state is not finite", 0.0);
  }

  const auto steps = static_cast<std::size_t>(std::llround(opt.t_end / opt.h));
  SimulationRun run;
  run.times.push_back(0.0);
  run.snapshots.push_back(state);
  if (opt.observer) opt.observer(0.0, state);

  Field rate(state.size());
  double t = 0.0;
  std::size_t k = 0;
  for (k = 1; k <= steps; ++k) {
    rhs(state, rate);
    state.noalias() += opt.h * rate;
    t = static_cast<double>(k) * opt.h;

    if (!state.allFinite()) {
      throw IntegrationBlowup("non-finite state after step " + std::to_string(k),
                              static_cast<double>(k - 1) * opt.h);
    }
    if (opt.range) {
      const double lo = state.minCoeff();
      const double hi = state.maxCoeff();
      if (lo < opt.range->first || hi > opt.range->second) {
        Eigen::Index where = 0;
        if (lo < opt.range->first) {
          state.minCoeff(&where);
        } else {
          state.maxCoeff(&where);
        }
        std::ostringstream msg;
        msg << "state left [" << opt.range->first << ", " << opt.range->second
            << "] at t=" << t << " (entry " << where << ", value "
            << state[where] << ")";
        run.status = RunStatus::HaltedOutOfRange;
        run.diagnostic = msg.str();
        break;
      }
    }
    if (opt.observer && k % opt.observe_stride == 0) opt.observer(t, state);
    if (opt.store_snapshots && k % opt.snapshot_stride == 0) {
      run.times.push_back(t);
      run.snapshots.push_back(state);
    }
  }
  if (run.times.back() != t) {
    run.times.push_back(t);
    run.snapshots.push_back(state);
  }
  run.final_time = t;
  run.final_state = std::move(state);
  return run;
}

SimulationRun euler_simulate(const SpatialSystem& system, Field initial,
                             EulerOptions options) {
  if (initial.size() != static_cast<Eigen::Index>(system.state_size())) {
    throw DimensionMismatch("initial state does not match the system size");
  }
  if (!options.range) options.range = system.admissible_range();
  SimulationRun run = euler_simulate(
      [&system](const Field& u, Field& r) { system.rhs(u, r); },
      std::move(initial), options);
  run.grid = system.grid();
  run.components = system.components();
  return run;
}

}  // namespace hetdyn
