#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string_view>

namespace hetdyn {

using Field = Eigen::VectorXd;

/// Uniform grid on [x_min, x_max] with `n` nodes, both endpoints included.
class Grid1D {
 public:
  Grid1D(double x_min, double x_max, std::size_t n);

  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  double length() const noexcept { return x_max_ - x_min_; }
  std::size_t size() const noexcept { return n_; }
  double spacing() const noexcept { return spacing_; }

  /// Node i; node 0 is x_min and node n-1 is x_max exactly.
  double node(std::size_t i) const noexcept {
    return i + 1 == n_ ? x_max_ : x_min_ + static_cast<double>(i) * spacing_;
  }
  Field nodes() const;

  /// Composite trapezoid weights (spacing, halved at both ends).
  Field trapezoid_weights() const;

  friend bool operator==(const Grid1D& a, const Grid1D& b) noexcept {
    return a.x_min_ == b.x_min_ && a.x_max_ == b.x_max_ && a.n_ == b.n_;
  }

 private:
  double x_min_;
  double x_max_;
  std::size_t n_;
  double spacing_;
};

/// Normal density with zero mean and standard deviation sigma.
double gaussian_eval(double x, double sigma);

struct GaussianKernel {
  double sigma;

  explicit GaussianKernel(double s);
  double operator()(double x) const noexcept;
};

enum class BoundaryCondition { Open, Periodic, Reflecting };

std::string_view to_string(BoundaryCondition bc) noexcept;
BoundaryCondition boundary_condition_from_string(std::string_view s);

/// Dense quadrature matrix realizing y -> \int J(x - y) u(y) dy on a grid.
///
/// Immutable once built. The matrix is the hot path of every nonlocal
/// right-hand side, so callers should build it once per run and share it.
class DiscreteConvolution {
 public:
  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
  const Grid1D& grid() const noexcept { return grid_; }
  BoundaryCondition boundary() const noexcept { return bc_; }
  bool row_normalized() const noexcept { return row_normalized_; }
  double sigma() const noexcept { return sigma_; }
  bool underresolved() const noexcept { return underresolved_; }

  Field apply(const Field& field) const;
  void apply_into(const Field& field, Field& out) const;

  /// The localized limit: the identity operator on `grid`.
  static DiscreteConvolution identity(const Grid1D& grid);

  friend DiscreteConvolution build_convolution(const Grid1D&, GaussianKernel,
                                               BoundaryCondition, bool);

 private:
  DiscreteConvolution(Eigen::MatrixXd m, Grid1D g, BoundaryCondition bc,
                      bool normalized, double sigma, bool underresolved)
      : matrix_(std::move(m)),
        grid_(g),
        bc_(bc),
        row_normalized_(normalized),
        sigma_(sigma),
        underresolved_(underresolved) {}

  Eigen::MatrixXd matrix_;
  Grid1D grid_;
  BoundaryCondition bc_;
  bool row_normalized_;
  double sigma_;
  bool underresolved_;
};

/// Trapezoid discretization of the Gaussian convolution under `bc`.
///
///   Open        zero extension outside the domain (mass leaves).
///   Periodic    wraparound; the grid is treated as n cells of width
///               `spacing`, so the matrix is exactly circulant.
///   Reflecting  mirror about both endpoints, then 2L-periodic.
///
/// Kernel tails beyond 8 sigma are dropped. `normalize` rescales rows to
/// sum to one and is ignored for Open. A kernel narrower than two grid
/// spacings still builds but is flagged `underresolved()` and a warning is
/// written to std::clog.
DiscreteConvolution build_convolution(const Grid1D& grid, GaussianKernel kernel,
                                      BoundaryCondition bc, bool normalize);

/// Default for `normalize`: on for Periodic/Reflecting, off for Open.
inline bool default_normalization(BoundaryCondition bc) noexcept {
  return bc != BoundaryCondition::Open;
}

}  // namespace hetdyn
