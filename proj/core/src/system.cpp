#include "hetdyn/system.hpp"

#include "hetdyn/heterogeneity.hpp"

#include <algorithm>

namespace hetdyn {

Eigen::MatrixXd SpatialSystem::reduced_jacobian(const Field& state,
                                                double step) const {
  const Field base = reduce(state);
  const auto m = base.size();
  Eigen::MatrixXd jac(m, m);
  Field probe = base;
  Field up, dn;
  for (Eigen::Index j = 0; j < m; ++j) {
    probe[j] = base[j] + step;
    rhs(expand(probe), up);
    probe[j] = base[j] - step;
    rhs(expand(probe), dn);
    probe[j] = base[j];
    jac.col(j) = (up.head(m) - dn.head(m)) / (2.0 * step);
  }
  return jac;
}

Field SpatialSystem::random_admissible(std::uint64_t seed) const {
  const auto [lo, hi] = admissible_range();
  const double a = std::max(lo, 0.0);
  const double b = std::min(hi, 1.0);
  Field out(static_cast<Eigen::Index>(state_size()));
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double u = 0.5 * (counter_uniform(seed, static_cast<std::uint64_t>(i)) + 1.0);
    out[i] = a + (b - a) * u;
  }
  return out;
}

}  // namespace hetdyn
