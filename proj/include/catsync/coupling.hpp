#pragma once

#include <Eigen/Core>

#include "catsync/trig_poly.hpp"

namespace catsync {

/// Perturbation (f₁, f₂, g) and coupling strength of the kicked flow
///   ẋ = δ(t)(log S)x + ε f(x,w,t),   ẇ = 1 + ε g(x,w,t).
struct CouplingSpec {
  TrigPoly f1;
  TrigPoly f2;
  TrigPoly g;
  double epsilon = 0.0;

  /// Throws ConfigError when ε < 0 or not finite.
  void validate() const;

  bool f_is_zero() const { return f1.is_zero() && f2.is_zero(); }

  friend bool operator==(const CouplingSpec&, const CouplingSpec&) = default;

  /// Component i of 𝐟 = (f₁, f₂, g).
  const TrigPoly& component(int i) const {
    return i == 0 ? f1 : (i == 1 ? f2 : g);
  }

  CouplingSpec with_epsilon(double eps) const {
    CouplingSpec c = *this;
    c.epsilon = eps;
    return c;
  }
};

/// Value of 𝐟 and its Jacobian ∂𝐟 with respect to (x₁, x₂, w).
struct FieldJet {
  Eigen::Vector3d value;
  Eigen::Matrix3d jacobian;
};

FieldJet evaluate_field(const CouplingSpec& spec, double x1, double x2,
                        double w, double t);

/// The example coupling with f = 0 and g = sin(w−t) + sin(x₂+w+t).
CouplingSpec locking_example(double epsilon);

/// Same g with f = (cos(x₁+w+t), 0).
CouplingSpec bidirectional_example(double epsilon);

}  // namespace catsync
