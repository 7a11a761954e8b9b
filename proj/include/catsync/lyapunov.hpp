#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "catsync/dynamics.hpp"
#include "catsync/series.hpp"
#include "catsync/tangent.hpp"

namespace catsync {

enum class SpectrumMethod { qr_direct, perturbative, birkhoff_multiplier };

std::string to_string(SpectrumMethod m);
SpectrumMethod parse_method(const std::string& s);

/// Exponents per Poincaré iterate, sorted Λ₊ ≥ Λ₀ ≥ Λ₋.
struct SpectrumRecord {
  double epsilon = 0.0;
  double lambda_plus = 0.0;
  double lambda_zero = 0.0;
  double lambda_minus = 0.0;
  std::array<double, 3> stderr_{0.0, 0.0, 0.0};
  double dimension = 0.0;
  int dimension_k = 0;
  bool dimension_flag = false;  // all negative, or D_L above the phase dimension
  int n_iter = 0;
  int n_transient = 0;
  SpectrumMethod method = SpectrumMethod::qr_direct;
  /// Exponent carried by the clock direction and its distance to the stable
  /// hyperbolic one; the sign change of the gap locates ε_c.
  double clock_exponent = 0.0;
  double transverse_gap = 0.0;
  double clock_alignment = 0.0;  // QR only: mean (q₃·e_w)²
};

struct QrOptions {
  int n_iter = 100000;
  int n_transient = 1000;
  double dt = kDefaultDt;
  std::uint64_t seed = 1;
  int batches = 20;
};

/// Uniform random point of 𝕋³.
FullState random_state(std::uint64_t seed);

/// Tangent propagation of an orthonormal frame, re-orthonormalized every
/// iterate; standard errors from batch means.
SpectrumRecord spectrum_qr(const CouplingSpec& spec, double epsilon,
                           const QrOptions& opt);

struct KaplanYorke {
  double value = 0.0;
  int k = 0;
  bool flagged = false;
};

/// D_L = k + (Λ₁+…+Λ_k)/|Λ_{k+1}| for descending exponents. k is capped at
/// n−1 so the formula stays defined; values above n are flagged.
KaplanYorke kaplan_yorke(std::vector<double> exponents);
double lyapunov_dimension(SpectrumRecord& rec);

/// Series, 𝔐 coefficients and frame with μ tied to ε.
struct PerturbativeModel {
  SeriesBundle bundle;
  MSeries mseries;
  TangentFrame frame;
  int n_max = 0;
};

PerturbativeModel build_perturbative(const CouplingSpec& spec, double epsilon,
                                     const SeriesSettings& settings, int n_max,
                                     const PhaseOptions& phase = {});

/// Averages of log λ_i(φ) over the grid (an S-invariant union of periodic
/// orbits, weighted uniformly).
SpectrumRecord spectrum_perturbative(const PerturbativeModel& model, double epsilon);

/// Same averages along one S-orbit φ_k = S^k φ₀ (bilinear interpolation of
/// the multipliers off the grid).
SpectrumRecord spectrum_birkhoff(const PerturbativeModel& model, double epsilon,
                                 int n_points, std::uint64_t seed);

struct SweepOptions {
  SpectrumMethod method = SpectrumMethod::qr_direct;
  QrOptions qr;
  SeriesSettings series;
  int n_max = 3;
  double tol = 1e-4;   // bracket width that ends the bisection
  Exec exec = Exec::parallel;
};

struct SweepResult {
  std::vector<SpectrumRecord> records;  // ε strictly increasing
  std::optional<double> epsilon_c;
  std::optional<double> closed_form;    // log λ₊ / (−Γ), only for f = 0
  std::vector<SpectrumRecord> refinement;  // bisection evaluations
};

SpectrumRecord spectrum_at(const CouplingSpec& spec, double epsilon,
                           const SweepOptions& opt);

/// Spectra over an ε-grid (parallel over ε).
std::vector<SpectrumRecord> sweep(const CouplingSpec& spec,
                                  const std::vector<double>& eps_grid,
                                  const SweepOptions& opt);

/// Locates the sign change of Λ₀ − Λ₋ on the grid, bisects it down to tol,
/// then refines with a parabola through three evaluations.
SweepResult find_epsilon_c(const CouplingSpec& spec, const std::vector<double>& eps_grid,
                           const SweepOptions& opt);

std::vector<FullState> attractor_cloud(const CouplingSpec& spec, double epsilon,
                                       int n_points,
                                       int n_transient, std::uint64_t seed,
                                       double dt = kDefaultDt);

std::string sweep_csv(const SweepResult& r);
std::string record_json(const SpectrumRecord& r);

}  // namespace catsync
