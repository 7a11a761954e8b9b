#pragma once

#include <cstddef>
#include <vector>

#include "catsync/cat_map.hpp"

namespace catsync {

/// Uniform N×N grid on 𝕋². Because S has integer entries, it maps grid
/// points to grid points: (i, j) ↦ (2i + j, i + j) mod N. Every quantity
/// evaluated at S^m φ for φ on the grid is therefore an exact lookup.
class TorusGrid {
 public:
  explicit TorusGrid(int n);

  int n() const { return n_; }
  int size() const { return n_ * n_; }
  int index(int i, int j) const;
  TorusPoint point(int idx) const;

  int forward(int idx) const { return fwd_[idx]; }
  int backward(int idx) const { return bwd_[idx]; }
  /// Index of S^m φ_idx, m of either sign.
  int shift(int idx, int m) const;

  /// Cycle decomposition of the permutation induced by S.
  const std::vector<std::vector<int>>& cycles() const { return cycles_; }

  /// Indices of an m×m sub-grid (m must divide n).
  std::vector<int> subsample(int m) const;

 private:
  int n_;
  std::vector<int> fwd_;
  std::vector<int> bwd_;
  std::vector<std::vector<int>> cycles_;
};

/// Function of φ sampled on a TorusGrid.
using PhiFunction = std::vector<double>;

/// How the infinite geometric sums along S-orbits are evaluated.
struct OrbitSum {
  enum class Mode { truncated, periodic };
  Mode mode = Mode::truncated;
  int terms = 40;  // used by truncated mode

  static OrbitSum truncated(int m) { return {Mode::truncated, m}; }
  static OrbitSum periodic() { return {Mode::periodic, 0}; }
};

/// u(φ) = Σ_{m≥0} r^m b(S^m φ), |r| < 1.
PhiFunction forward_orbit_sum(const TorusGrid& grid, double r,
                              const PhiFunction& b, OrbitSum how);

/// u(φ) = Σ_{k≥0} r^k b(S^{−k−1} φ), |r| < 1.
PhiFunction backward_orbit_sum(const TorusGrid& grid, double r,
                               const PhiFunction& b, OrbitSum how);

/// Solves λ_i k(φ) − λ_j k(Sφ) = −b(φ) for λ_i ≠ λ_j > 0, choosing the
/// convergent direction along the orbit.
PhiFunction solve_twisted_cohomology(const TorusGrid& grid, double lambda_i,
                                     double lambda_j, const PhiFunction& b,
                                     OrbitSum how);

/// Bilinear interpolation of a grid function at an arbitrary point.
double bilinear(const TorusGrid& grid, const PhiFunction& f,
                const TorusPoint& p);

/// Uniform grid t_k = k·2π/nt on [0, 2π], both endpoints stored.
struct TimeGrid {
  int nt = 256;

  explicit TimeGrid(int n);
  int nodes() const { return nt + 1; }
  double step() const { return kTwoPi / nt; }
  double t(int k) const { return k * step(); }
};

/// F[k] = ∫₀^{t_k} f. Simpson on even nodes, a three-point rule for the
/// half panels at odd nodes. Requires an even number of intervals.
void cumulative_simpson(const double* f, double* out, int nt, double h);

/// Samples of a function of (φ, t) on TorusGrid × TimeGrid, φ-major.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(int n_phi_points, int nt)
      : np_(n_phi_points), nt_(nt),
        v_(static_cast<std::size_t>(n_phi_points) * (nt + 1), 0.0) {}

  int phi_points() const { return np_; }
  int nt() const { return nt_; }
  bool empty() const { return v_.empty(); }

  double* row(int p) { return v_.data() + static_cast<std::size_t>(p) * (nt_ + 1); }
  const double* row(int p) const {
    return v_.data() + static_cast<std::size_t>(p) * (nt_ + 1);
  }
  double& operator()(int p, int k) { return row(p)[k]; }
  double operator()(int p, int k) const { return row(p)[k]; }

  /// Slice at the last time node (t = 2π).
  PhiFunction at_end() const;
  double sup_norm() const;

  const std::vector<double>& data() const { return v_; }
  std::vector<double>& data() { return v_; }

 private:
  int np_ = 0;
  int nt_ = 0;
  std::vector<double> v_;
};

double sup_norm(const PhiFunction& f);

}  // namespace catsync
