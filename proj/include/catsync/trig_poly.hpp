#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace catsync {

enum class Trig : std::uint8_t { cos, sin };

/// Integer wavevector over the arguments (x₁, x₂, w, t).
struct Wavevector {
  int k1 = 0;
  int k2 = 0;
  int kw = 0;
  int kt = 0;

  friend bool operator==(const Wavevector&, const Wavevector&) = default;
};

struct TrigTerm {
  double coeff = 0.0;
  Wavevector k;
  Trig kind = Trig::cos;

  friend bool operator==(const TrigTerm&, const TrigTerm&) = default;
};

/// Real direction in argument space (x₁, x₂, w, t) used for derivatives.
using Direction = std::array<double, 4>;

/// Multi-index (q₊, q₋, q_w) of a Taylor coefficient taken along the
/// cat-map eigendirections x± and the clock phase w.
struct MultiIndex {
  int plus = 0;
  int minus = 0;
  int clock = 0;

  int order() const { return plus + minus + clock; }
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

/// All multi-indices with |q| ≤ max_order in graded order (|q| ascending).
std::vector<MultiIndex> multi_indices_up_to(int max_order);

/// Finite trigonometric polynomial on 𝕋²×𝕋×𝕋,
///   P(x₁,x₂,w,t) = Σ c·{cos,sin}(k₁x₁ + k₂x₂ + k_w w + k_t t).
/// Derivatives are exact and stay inside the class.
class TrigPoly {
 public:
  TrigPoly() = default;
  explicit TrigPoly(std::vector<TrigTerm> terms);

  const std::vector<TrigTerm>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  double operator()(double x1, double x2, double w, double t) const;

  /// Value and gradient with respect to (x₁, x₂, w) in one pass.
  double eval_with_gradient(double x1, double x2, double w, double t,
                            std::array<double, 3>& grad) const;

  /// Directional derivative d·∇ over (x₁, x₂, w, t).
  TrigPoly derivative(const Direction& d) const;
  TrigPoly d_x1() const { return derivative({1, 0, 0, 0}); }
  TrigPoly d_x2() const { return derivative({0, 1, 0, 0}); }
  TrigPoly d_w() const { return derivative({0, 0, 1, 0}); }
  TrigPoly d_t() const { return derivative({0, 0, 0, 1}); }

  /// ∫_{t0}^{t1} P(x₁, x₂, w₀ + s, s) ds, evaluated in closed form.
  double integrate_along_clock(double x1, double x2, double w0, double t0,
                               double t1) const;

  /// Taylor coefficients (1/q!) ∂₊^{q₊} ∂₋^{q₋} ∂_w^{q_w} P at a point, one
  /// per entry of `indices`, written to `out` (accumulated, not assigned).
  /// ∂± are derivatives along the unit vectors x± of the cat map.
  void accumulate_taylor(double x1, double x2, double w, double t,
                         const std::vector<MultiIndex>& indices,
                         double* out) const;

  TrigPoly operator+(const TrigPoly& other) const;
  TrigPoly operator*(double s) const;

  /// Human-readable form, e.g. "1*sin(w-t) + 1*sin(x2+w+t)".
  std::string to_string() const;

  friend bool operator==(const TrigPoly&, const TrigPoly&) = default;

 private:
  std::vector<TrigTerm> terms_;
};

}  // namespace catsync
