#include "hetdyn/grid_kernels.hpp"

#include "hetdyn/error.hpp"

#include <cmath>
#include <iostream>
#include <numbers>
#include <string>

namespace hetdyn {

namespace {

constexpr double kTruncationSigmas = 8.0;

}  // namespace

Grid1D::Grid1D(double x_min, double x_max, std::size_t n)
    : x_min_(x_min), x_max_(x_max), n_(n), spacing_(0.0) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min)) {
    throw InvalidParameter("grid requires finite x_min < x_max");
  }
  if (n < 3) {
    throw InvalidParameter("grid requires at least 3 nodes, got " +
                           std::to_string(n));
  }
  spacing_ = (x_max - x_min) / static_cast<double>(n - 1);
}

Field Grid1D::nodes() const {
  Field x(static_cast<Eigen::Index>(n_));
  for (std::size_t i = 0; i < n_; ++i) x[static_cast<Eigen::Index>(i)] = node(i);
  return x;
}

Field Grid1D::trapezoid_weights() const {
  Field w = Field::Constant(static_cast<Eigen::Index>(n_), spacing_);
  w[0] *= 0.5;
  w[w.size() - 1] *= 0.5;
  return w;
}

double gaussian_eval(double x, double sigma) {
  if (!(sigma > 0.0)) {
    throw InvalidParameter("gaussian sigma must be positive");
  }
  const double z = x / sigma;
  return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * sigma);
}

GaussianKernel::GaussianKernel(double s) : sigma(s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw InvalidParameter("kernel sigma must be positive and finite");
  }
}

double GaussianKernel::operator()(double x) const noexcept {
  const double z = x / sigma;
  return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * sigma);
}

std::string_view to_string(BoundaryCondition bc) noexcept {
  switch (bc) {
    case BoundaryCondition::Open:
      return "Open";
    case BoundaryCondition::Periodic:
      return "Periodic";
    case BoundaryCondition::Reflecting:
      return "Reflecting";
  }
  return "Reflecting";
}

BoundaryCondition boundary_condition_from_string(std::string_view s) {
  if (s == "Open" || s == "open") return BoundaryCondition::Open;
  if (s == "Periodic" || s == "periodic") return BoundaryCondition::Periodic;
  if (s == "Reflecting" || s == "reflecting") return BoundaryCondition::Reflecting;
  throw InvalidParameter("unknown boundary condition '" + std::string(s) + "'");
}

Field DiscreteConvolution::apply(const Field& field) const {
  Field out;
  apply_into(field, out);
  return out;
}

void DiscreteConvolution::apply_into(const Field& field, Field& out) const {
  if (field.size() != matrix_.cols()) {
    throw DimensionMismatch("convolution expects a field of length " +
                            std::to_string(matrix_.cols()) + ", got " +
                            std::to_string(field.size()));
  }
  out.noalias() = matrix_ * field;
}

DiscreteConvolution DiscreteConvolution::identity(const Grid1D& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  return DiscreteConvolution(Eigen::MatrixXd::Identity(n, n), grid,
                             BoundaryCondition::Reflecting, true, 0.0, false);
}

DiscreteConvolution build_convolution(const Grid1D& grid, GaussianKernel kernel,
                                      BoundaryCondition bc, bool normalize) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  const double h = grid.spacing();
  const double len = grid.length();
  const double cutoff = kTruncationSigmas * kernel.sigma;

  const bool underresolved = kernel.sigma < 2.0 * h;
  if (underresolved) {
    std::clog << "warning: kernel sigma " << kernel.sigma
              << " is below two grid spacings (" << 2.0 * h
              << "); the discrete convolution is underresolved\n";
  }

  // Offsets from x_min keep the image sums free of x_min.
  Field u(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    u[i] = grid.node(static_cast<std::size_t>(i)) - grid.x_min();
  }

  auto truncated = [&](double d) {
    return std::abs(d) <= cutoff ? kernel(d) : 0.0;
  };

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  switch (bc) {
    case BoundaryCondition::Open: {
      const Field w = grid.trapezoid_weights();
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
          m(i, j) = truncated(u[i] - u[j]) * w[j];
        }
      }
      break;
    }
    case BoundaryCondition::Periodic: {
      const double period = static_cast<double>(n) * h;
      const int images = static_cast<int>(std::ceil(cutoff / period)) + 1;
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
          double acc = 0.0;
          for (int k = -images; k <= images; ++k) {
            acc += truncated(u[i] - u[j] - k * period);
          }
          m(i, j) = acc * h;
        }
      }
      break;
    }
    case BoundaryCondition::Reflecting: {
      const Field w = grid.trapezoid_weights();
      const double period = 2.0 * len;
      const int images = static_cast<int>(std::ceil(cutoff / period)) + 1;
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
          double acc = 0.0;
          for (int k = -images; k <= images; ++k) {
            acc += truncated(u[i] - u[j] - k * period);
            acc += truncated(u[i] + u[j] - k * period);
          }
          m(i, j) = acc * w[j];
        }
      }
      break;
    }
  }

  const bool normalized = normalize && bc != BoundaryCondition::Open;
  if (normalized) {
    const Field sums = m.rowwise().sum();
    for (Eigen::Index i = 0; i < n; ++i) m.row(i) /= sums[i];
  }
  return DiscreteConvolution(std::move(m), grid, bc, normalized, kernel.sigma,
                             underresolved);
}

}  // namespace hetdyn
