#pragma once

#include <Eigen/Core>

#include "catsync/cat_map.hpp"
#include "catsync/coupling.hpp"

namespace catsync {

/// Point (x, w) of 𝕋²×𝕋. Map outputs are always reduced mod 2π.
struct FullState {
  double x1 = 0.0;
  double x2 = 0.0;
  double w = 0.0;

  FullState reduced() const {
    return {wrap_angle(x1), wrap_angle(x2), wrap_angle(w)};
  }
  TorusPoint x() const { return {x1, x2}; }
};

inline constexpr double kDefaultDt = kTwoPi / 512.0;

/// Advances ẋ = εf, ẇ = 1 + εg from t0 to t1 inside one kick period with
/// classical RK4. The step is dt rounded down so that an integer number of
/// steps lands exactly on t1. Requires 0 ≤ t0 < t1 ≤ 2π and dt > 0.
FullState flow_segment(const FullState& s, const CouplingSpec& spec, double t0,
                       double t1, double dt = kDefaultDt);

/// Time-2π map: kick x → Sx at t = 0⁺, then the smooth flow over (0, 2π].
FullState poincare_map(const FullState& s, const CouplingSpec& spec,
                       double dt = kDefaultDt);

/// DS_ε^{2π}(s)·y.
Eigen::Vector3d tangent_step(const FullState& s, const Eigen::Vector3d& y,
                             const CouplingSpec& spec, double dt = kDefaultDt);

struct MapWithJacobian {
  FullState image;
  Eigen::Matrix3d jacobian;  // Cartesian (x₁, x₂, w) coordinates
};

/// Image and full Jacobian of the Poincaré map, integrated jointly.
MapWithJacobian poincare_with_jacobian(const FullState& s,
                                       const CouplingSpec& spec,
                                       double dt = kDefaultDt);

/// Block matrix diag(S, 1) applied by the kick to tangent vectors.
Eigen::Matrix3d kick_matrix();

}  // namespace catsync
