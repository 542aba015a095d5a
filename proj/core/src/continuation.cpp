#include "hetdyn/continuation.hpp"

#include "hetdyn/error.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace hetdyn {

std::string_view to_string(BranchEvent e) noexcept {
  switch (e) {
    case BranchEvent::SaddleNode:
      return "saddle-node";
    case BranchEvent::Transcritical:
      return "transcritical";
    case BranchEvent::Hopf:
      return "hopf";
    case BranchEvent::BranchEnd:
      return "branch-end";
  }
  return "branch-end";
}

std::vector<double> Branch::event_parameters(BranchEvent e) const {
  std::vector<double> out;
  for (const auto& l : labels) {
    if (l.event == e) out.push_back(points[l.index].parameter);
  }
  return out;
}

bool Branch::has(BranchEvent e) const {
  return std::any_of(labels.begin(), labels.end(),
                     [e](const BranchLabel& l) { return l.event == e; });
}

namespace {

using Vec = Eigen::VectorXd;

class Tracker {
 public:
  Tracker(const NonspatialModel& model, const ContinuationOptions& opt)
      : model_(model), opt_(opt), d_(static_cast<Eigen::Index>(model.dimension())) {}

  Eigen::Index dim() const { return d_; }
  Vec u(const Vec& y) const { return y.head(d_); }
  double p(const Vec& y) const { return y[d_]; }

  Eigen::MatrixXd extended_jacobian(const Vec& y) const {
    Eigen::MatrixXd A(d_, d_ + 1);
    A.leftCols(d_) = model_.jacobian(u(y), p(y));
    A.col(d_) = model_.parameter_derivative(u(y), p(y));
    return A;
  }

  /// Unit tangent of the solution curve, oriented along `ref`.
  Vec tangent(const Vec& y, const Vec& ref) const {
    Eigen::MatrixXd A(d_ + 1, d_ + 1);
    A.topRows(d_) = extended_jacobian(y);
    A.row(d_) = ref.transpose();
    Vec rhs = Vec::Zero(d_ + 1);
    rhs[d_] = 1.0;
    Vec t = A.fullPivLu().solve(rhs);
    if (!t.allFinite() || t.norm() == 0.0) return ref;
    t.normalize();
    if (t.dot(ref) < 0.0) t = -t;
    return t;
  }

  /// Newton on {f(u,p) = 0, dir . (z - base) = s}. Returns the corrected
  /// point or nothing; `iterations` receives the iteration count.
  std::optional<Vec> correct(const Vec& base, const Vec& dir, double s,
                             int* iterations = nullptr) const {
    Vec z = base + s * dir;
    const double step_bound = std::max(10.0 * s, 1e-3);
    for (int it = 1; it <= 15; ++it) {
      const Vec f = model_.rhs(u(z), p(z));
      if (!f.allFinite()) return std::nullopt;
      Eigen::MatrixXd A(d_ + 1, d_ + 1);
      A.topRows(d_) = extended_jacobian(z);
      A.row(d_) = dir.transpose();
      Vec r(d_ + 1);
      r.head(d_) = f;
      r[d_] = dir.dot(z - base) - s;
      const Vec dz = A.fullPivLu().solve(-r);
      if (!dz.allFinite() || dz.norm() > step_bound) return std::nullopt;
      z += dz;
      const double res = model_.rhs(u(z), p(z)).lpNorm<Eigen::Infinity>();
      if (res <= opt_.corrector_tol && dz.lpNorm<Eigen::Infinity>() <= 1e-8) {
        if (iterations) *iterations = it;
        return z;
      }
    }
    return std::nullopt;
  }

  EquilibriumPoint point(const Vec& y) const {
    return make_equilibrium(model_, u(y), p(y));
  }

 private:
  const NonspatialModel& model_;
  const ContinuationOptions& opt_;
  Eigen::Index d_;
};

struct Signature {
  int real_unstable = 0;
  int complex_unstable = 0;
};

Signature signature(const Eigen::VectorXcd& ev) {
  Signature s;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const double re = ev[i].real();
    const double im = std::abs(ev[i].imag());
    if (re <= 0.0) continue;
    if (im > 1e-9 * std::max(1.0, std::abs(ev[i]))) {
      ++s.complex_unstable;
    } else {
      ++s.real_unstable;
    }
  }
  return s;
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

struct Event {
  double s;  // arclength offset from the interval start
  Vec y;
  BranchEvent kind;
  std::string note;
};

}  // namespace

Branch continue_branch(const NonspatialModel& model,
                       const EquilibriumPoint& start,
                       const ContinuationOptions& opt) {
  if (!(opt.p_max > opt.p_min)) throw InvalidParameter("continuation range is empty");
  if (opt.direction != 1 && opt.direction != -1) {
    throw InvalidParameter("continuation direction must be +1 or -1");
  }
  const double range = opt.p_max - opt.p_min;
  const double s_max = opt.max_step_fraction * range;
  Tracker tr(model, opt);
  const Eigen::Index d = tr.dim();

  Vec u0 = model.reduced_state(start.state);
  if (!newton_polish(model, u0, start.parameter, opt.corrector_tol)) {
    throw PreconditionFailed("continuation start is not a converged equilibrium");
  }
  Vec y(d + 1);
  y << u0, start.parameter;

  Branch branch;
  branch.points.push_back(tr.point(y));
  Vec ref = Vec::Zero(d + 1);
  ref[d] = opt.direction;
  Vec tan = tr.tangent(y, ref);
  Vec dir = tan;
  double s = opt.initial_step_fraction * range;

  auto end_branch = [&](const std::string& why) {
    branch.labels.push_back({branch.points.size() - 1, BranchEvent::BranchEnd, why});
  };

  while (branch.points.size() < opt.max_points) {
    int iters = 0;
    std::optional<Vec> z = tr.correct(y, dir, s, &iters);
    if (!z) {
      s *= 0.5;
      if (s < opt.min_step) {
        end_branch("corrector failed at the minimum step");
        break;
      }
      continue;
    }
    if (model.admissibility_violation(tr.u(*z)) > opt.admissibility_margin) {
      end_branch("branch left the physical domain");
      break;
    }

    bool last = false;
    double s_used = s;
    Vec y_new = *z;
    const double pz = tr.p(*z);
    if (pz > opt.p_max || pz < opt.p_min) {
      const double pb = pz > opt.p_max ? opt.p_max : opt.p_min;
      const double w = (pb - tr.p(y)) / (pz - tr.p(y));
      Vec ub = tr.u(y) + w * (tr.u(*z) - tr.u(y));
      if (!newton_polish(model, ub, pb, opt.corrector_tol)) {
        end_branch("could not land on the range boundary");
        break;
      }
      y_new << ub, pb;
      s_used = dir.dot(y_new - y);
      last = true;
    }

    const Vec tan_new = tr.tangent(y_new, dir);
    const EquilibriumPoint ep_new = tr.point(y_new);
    const EquilibriumPoint& ep_old = branch.points.back();
    const Signature sig_old = signature(ep_old.eigenvalues);
    const Signature sig_new = signature(ep_new.eigenvalues);
    std::vector<Event> events;

    const bool fold = sign_of(tan[d]) != 0 && sign_of(tan_new[d]) != 0 &&
                      sign_of(tan[d]) != sign_of(tan_new[d]);
    if (fold && s_used > 0.0) {
      double lo = 0.0, hi = s_used;
      Vec ylo = y, yhi = y_new;
      const int sgn_lo = sign_of(tan[d]);
      for (int k = 0; k < 200; ++k) {
        if (std::abs(tr.p(yhi) - tr.p(ylo)) < 0.1 * opt.fold_tol &&
            hi - lo < opt.fold_tol) {
          break;
        }
        const double mid = 0.5 * (lo + hi);
        const auto zm = tr.correct(y, dir, mid);
        if (!zm) break;
        if (sign_of(tr.tangent(*zm, dir)[d]) == sgn_lo) {
          lo = mid;
          ylo = *zm;
        } else {
          hi = mid;
          yhi = *zm;
        }
      }
      // The fold is the parameter extremum of the bracket.
      const bool hi_extreme = sgn_lo > 0 ? tr.p(yhi) > tr.p(ylo) : tr.p(yhi) < tr.p(ylo);
      events.push_back({hi_extreme ? hi : lo, hi_extreme ? yhi : ylo,
                        BranchEvent::SaddleNode, "fold"});
    }

    auto bisect_signature = [&](auto key, double tol, BranchEvent kind,
                                const char* note) {
      double lo = 0.0, hi = s_used;
      Vec ylo = y, yhi = y_new;
      const int key_lo = key(sig_old);
      for (int k = 0; k < 200; ++k) {
        if (std::abs(tr.p(yhi) - tr.p(ylo)) < tol && hi - lo < tol) break;
        const double mid = 0.5 * (lo + hi);
        const auto zm = tr.correct(y, dir, mid);
        if (!zm) break;
        if (key(signature(tr.point(*zm).eigenvalues)) == key_lo) {
          lo = mid;
          ylo = *zm;
        } else {
          hi = mid;
          yhi = *zm;
        }
      }
      events.push_back({hi, yhi, kind, note});
    };
    if (!fold && sig_old.real_unstable != sig_new.real_unstable && s_used > 0.0) {
      bisect_signature([](const Signature& g) { return g.real_unstable; },
                       opt.fold_tol, BranchEvent::Transcritical,
                       "real eigenvalue crosses zero");
    }
    if (sig_old.complex_unstable != sig_new.complex_unstable && s_used > 0.0) {
      bisect_signature([](const Signature& g) { return g.complex_unstable; },
                       opt.hopf_tol, BranchEvent::Hopf,
                       "complex pair crosses the imaginary axis");
    }

    std::sort(events.begin(), events.end(),
              [](const Event& a, const Event& b) { return a.s < b.s; });
    for (const auto& ev : events) {
      // An event landing on an existing endpoint labels that point.
      if ((ev.y - y).norm() < 1e-14) {
        branch.labels.push_back({branch.points.size() - 1, ev.kind, ev.note});
        continue;
      }
      if ((ev.y - y_new).norm() < 1e-14) continue;
      branch.points.push_back(tr.point(ev.y));
      branch.labels.push_back({branch.points.size() - 1, ev.kind, ev.note});
    }
    branch.points.push_back(ep_new);
    for (const auto& ev : events) {
      if ((ev.y - y_new).norm() < 1e-14) {
        branch.labels.push_back({branch.points.size() - 1, ev.kind, ev.note});
      }
    }
    if (last) break;

    const Vec step = y_new - y;
    if (step.norm() > 0.0) dir = step.normalized();
    tan = tan_new;
    y = y_new;
    if (iters <= 4) s = std::min(1.5 * s, s_max);
  }
  if (branch.points.size() >= opt.max_points) end_branch("point budget exhausted");
  std::stable_sort(branch.labels.begin(), branch.labels.end(),
                   [](const BranchLabel& a, const BranchLabel& b) {
                     return a.index < b.index;
                   });
  return branch;
}

}  // namespace hetdyn
