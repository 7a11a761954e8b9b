#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "catsync/series.hpp"

namespace catsync {

using MatrixField = std::vector<Eigen::Matrix3d>;

/// Orthonormal basis {y₊, y₋, y₃} as columns: y± = (x±, 0), y₃ = (0, 0, 1).
Eigen::Matrix3d eigen_basis();
Eigen::Matrix3d to_eigen_basis(const Eigen::Matrix3d& cartesian);
Eigen::Matrix3d from_eigen_basis(const Eigen::Matrix3d& eig);

/// Order-n coefficients 𝔐⁽ⁿ⁾(φ) of the tangent map along the conjugated
/// trajectory, DS^{2π}(H(φ), W(φ)) = (𝟙 + 𝔐(φ)) Λ, in the eigenbasis.
struct MSeries {
  std::vector<MatrixField> orders;

  int order() const { return static_cast<int>(orders.size()); }
  const MatrixField& at(int n) const;
};

/// Needs series orders 1..n_max−1 in the bundle.
MSeries m_series(const SeriesBundle& bundle, int n_max);

/// Off-diagonal conjugator K(φ) and multiplier corrections ν_i(φ), per order.
struct TangentFrame {
  std::vector<MatrixField> K;
  std::vector<std::array<PhiFunction, 3>> nu;

  int order() const { return static_cast<int>(K.size()); }
};

TangentFrame first_order_frame(const MSeries& ms, const TorusGrid& grid, OrbitSum how);

/// Appends order n to `frame` (orders 1..n−1 must be present).
void higher_order_frame(int n, TangentFrame& frame, const MSeries& ms,
                        const TorusGrid& grid, OrbitSum how);

TangentFrame build_frame(const MSeries& ms, const TorusGrid& grid, int n_max,
                         OrbitSum how);

/// λ_i(φ) = λ_i + Σ εⁿ ν_i⁽ⁿ⁾(φ), i ∈ {+, −, clock}.
std::array<PhiFunction, 3> multipliers(const TangentFrame& frame, double epsilon,
                                       int n_max = -1);

/// max over the sample of ‖DS(H(φ))(𝟙+K(φ)) − (𝟙+K(Sφ))(Λ+N(φ))‖_max, the
/// tangent map taken from direct integration.
double tangent_residual(const SeriesBundle& bundle, const TangentFrame& frame,
                        const Manifold& m, const std::vector<int>& sample,
                        double dt, int n_max = -1);

}  // namespace catsync
