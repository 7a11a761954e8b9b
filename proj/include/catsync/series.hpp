#pragma once

#include <array>
#include <string>
#include <vector>

#include "catsync/coupling.hpp"
#include "catsync/grid.hpp"

namespace catsync {

enum class Exec { serial, parallel };

struct PhaseRoot {
  double w0 = 0.0;
  double gamma = 0.0;  // Γ = ∫₀^{2π} ∂_w g(Sφ, w₀+t, t) dt (φ-averaged)
  bool admissible = false;
};

/// Locking phase w₀, dissipation rate Γ < 0 and the auxiliary parameter μ.
struct PhaseConstants {
  double w0 = 0.0;
  double gamma = 0.0;
  double mu = 0.0;
  std::vector<PhaseRoot> roots;  // all zeros of the averaged γ̄₀
  double phi_spread0 = 0.0;      // max_φ |γ̄₀(φ, w₀)|
  double phi_spread1 = 0.0;      // max_φ |γ̄₁(φ, w₀) − Γ|
};

struct PhaseOptions {
  int n_phi = 64;
  int scan_points = 1024;
  double tol_root = 1e-12;
  double tol_phi = 1e-10;
};

/// γ̄₀(φ, w) = ∫₀^{2π} g(Sφ, w + t, t) dt.
double gamma_bar0(const TrigPoly& g, const TorusPoint& phi, double w);

/// γ̄₁(φ, w) = ∫₀^{2π} ∂_w g(Sφ, w + t, t) dt.
double gamma_bar1(const TrigPoly& g, const TorusPoint& phi, double w);

/// Finds w₀ with γ̄₀(·, w₀) ≡ 0 and Γ < 0. Among several admissible roots
/// the one with the most negative Γ wins. Throws HypothesisError.
PhaseConstants solve_w0(const TrigPoly& g, const PhaseOptions& opt = {});

/// Γ(φ, t, τ) = ∫_τ^t ∂_w g(Sφ, w₀ + s, s) ds.
double gamma_envelope(const TrigPoly& g, double w0, double t, double tau,
                      const TorusPoint& phi);

struct SeriesSettings {
  int n_phi = 64;
  int n_t = 256;
  int m_sum = 40;
  Exec exec = Exec::parallel;
};

/// Coefficients of one order n: ξ⁽ⁿ⁾, a±⁽ⁿ⁾ on (φ, t) and U⁽ⁿ⁾, h±⁽ⁿ⁾ on φ.
struct SeriesOrder {
  GridFunction xi;
  GridFunction a_plus;
  GridFunction a_minus;
  PhiFunction U;
  PhiFunction h_plus;
  PhiFunction h_minus;

  double sup_norm() const;
};

struct SeriesDiagnostics {
  double tail_bound = 0.0;           // λ₊^{−M_sum}
  double interpolation_error = 0.0;  // S maps the grid to itself
  std::vector<double> sup_norms;     // per order
  std::vector<double> cohomology_residual;  // per order, max over all equations
};

/// Order-by-order solution of the invariance equations. Immutable once an
/// order has been appended.
class SeriesBundle {
 public:
  SeriesBundle(CouplingSpec spec, PhaseConstants constants,
               SeriesSettings settings);

  const CouplingSpec& spec() const { return spec_; }
  const PhaseConstants& constants() const { return constants_; }
  const SeriesSettings& settings() const { return settings_; }
  const TorusGrid& grid() const { return grid_; }
  const TimeGrid& times() const { return times_; }

  int order() const { return static_cast<int>(orders_.size()); }
  const SeriesOrder& at(int n) const;  // 1-based

  /// e^{μΓ(φ, t_k, 0)} on the grid.
  const GridFunction& clock_decay() const { return decay_; }
  /// λ = e^{μΓ}.
  double lambda_clock() const;

  /// Hyperbolic m-sums truncated at M_sum; the clock sum is resummed exactly
  /// along the (periodic) grid orbits.
  OrbitSum hyperbolic_sum() const { return OrbitSum::truncated(settings_.m_sum); }
  OrbitSum clock_sum() const { return OrbitSum::periodic(); }

  void append(SeriesOrder next) { orders_.push_back(std::move(next)); }

  SeriesDiagnostics diagnostics() const;

  /// Displacement coefficients along the conjugated trajectory at (p, t_k):
  /// d[0] (+), d[1] (−), d[2] (clock), each indexed by order 1..n (d[·][0]=0).
  void displacements(int p, int k, int n, std::array<std::vector<double>, 3>& d) const;

 private:
  CouplingSpec spec_;
  PhaseConstants constants_;
  SeriesSettings settings_;
  TorusGrid grid_;
  TimeGrid times_;
  GridFunction decay_;
  std::vector<SeriesOrder> orders_;
};

/// ε^k coefficients of D₊^{q₊} D₋^{q₋} D₃^{q₃} for every q in `indices` and
/// k = 0..kmax, where D_α = Σ_{j≥1} ε^j d[α][j]. out[k * indices.size() + qi].
void displacement_powers(const std::array<std::vector<double>, 3>& d, int kmax,
                         const std::vector<MultiIndex>& indices, double* out);

/// Order-1 coefficients.
SeriesOrder first_order(const SeriesBundle& bundle);

/// Order-n coefficients from orders 1..n−1 (throws MissingOrder).
SeriesOrder higher_order(int n, const SeriesBundle& bundle);

/// Convenience: builds orders 1..n_max.
SeriesBundle build_series(const CouplingSpec& spec, const PhaseConstants& constants,
                          const SeriesSettings& settings, int n_max);

/// H(φ) = φ + Σ εⁿ h⁽ⁿ⁾(φ), W(φ) = w₀ + Σ εⁿ U⁽ⁿ⁾(φ) on the grid.
struct Manifold {
  double epsilon = 0.0;
  std::vector<TorusPoint> H;
  PhiFunction W;
  bool radius_warning = false;
  double heuristic_radius = 0.0;
};

Manifold assemble_manifold(const SeriesBundle& bundle, double epsilon,
                           int n_max = -1);

/// Coefficient growth fit of sup_n ≤ C₃ⁿ μ^{−[(2n−1)/3]}.
struct GrowthFit {
  double c3 = 0.0;        // smallest constant satisfying the bound
  double slope = 0.0;     // least squares slope of log(sup_n μ^{[(2n−1)/3]})
  double radius = 0.0;    // μ^{2/3} / C₃
};

GrowthFit fit_growth(const std::vector<double>& sup_norms, double mu);

/// sup over sample indices of |S_ε^{2π}(H(φ), W(φ)) − (H(Sφ), W(Sφ))|.
double conjugation_residual(const SeriesBundle& bundle, const Manifold& m,
                            const std::vector<int>& sample, double dt);

}  // namespace catsync
