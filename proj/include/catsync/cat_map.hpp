#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace catsync {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduce an angle into [0, 2π).
inline double wrap_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod can return exactly 2π after the correction for tiny negatives
  return r >= kTwoPi ? 0.0 : r;
}

/// Signed shortest difference of two angles, in (−π, π].
inline double angle_delta(double a, double b) {
  double d = wrap_angle(a - b);
  return d > std::numbers::pi ? d - kTwoPi : d;
}

using Vec2 = std::array<double, 2>;

/// The hyperbolic automorphism S = [[2,1],[1,1]] of the 2-torus together
/// with its spectral data. S is symmetric, so x₊ and x₋ are orthonormal.
struct CatMap {
  static constexpr int s11 = 2, s12 = 1, s21 = 1, s22 = 1;

  double lambda_plus;
  double lambda_minus;
  Vec2 x_plus;   // unstable direction, (1, λ₊−2)/𝒩₊
  Vec2 x_minus;  // stable direction, −(1, λ₋−2)/𝒩₋

  static const CatMap& get();

  double log_lambda_plus() const { return std::log(lambda_plus); }

  /// λ_i for i ∈ {0: +, 1: −, 2: clock}; the clock multiplier is 1.
  double multiplier(int i) const {
    return i == 0 ? lambda_plus : (i == 1 ? lambda_minus : 1.0);
  }
};

struct TorusPoint {
  Vec2 phi{0.0, 0.0};

  TorusPoint() = default;
  TorusPoint(double p1, double p2) : phi{wrap_angle(p1), wrap_angle(p2)} {}
};

/// S·φ mod 2π, multiply first, reduce after.
TorusPoint apply_cat(const TorusPoint& p);

/// S⁻¹·φ mod 2π with S⁻¹ = [[1,−1],[−1,2]].
TorusPoint apply_cat_inverse(const TorusPoint& p);

}  // namespace catsync
