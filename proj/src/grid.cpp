#include "catsync/grid.hpp"

#include <algorithm>
#include <cmath>

#include "catsync/errors.hpp"

namespace catsync {

namespace {

int mod(int a, int n) {
  const int r = a % n;
  return r < 0 ? r + n : r;
}

}  // namespace

TorusGrid::TorusGrid(int n) : n_(n) {
  if (n < 1) throw ConfigError("grid: n_phi must be positive");
  const int sz = n * n;
  fwd_.resize(sz);
  bwd_.resize(sz);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int idx = i * n + j;
      fwd_[idx] = index(CatMap::s11 * i + CatMap::s12 * j,
                        CatMap::s21 * i + CatMap::s22 * j);
      bwd_[idx] = index(i - j, -i + 2 * j);
    }
  std::vector<char> seen(sz, 0);
  for (int start = 0; start < sz; ++start) {
    if (seen[start]) continue;
    std::vector<int> cyc;
    for (int p = start; !seen[p]; p = fwd_[p]) {
      seen[p] = 1;
      cyc.push_back(p);
    }
    cycles_.push_back(std::move(cyc));
  }
}

int TorusGrid::index(int i, int j) const { return mod(i, n_) * n_ + mod(j, n_); }

TorusPoint TorusGrid::point(int idx) const {
  const double h = kTwoPi / n_;
  return {h * (idx / n_), h * (idx % n_)};
}

int TorusGrid::shift(int idx, int m) const {
  for (; m > 0; --m) idx = fwd_[idx];
  for (; m < 0; ++m) idx = bwd_[idx];
  return idx;
}

std::vector<int> TorusGrid::subsample(int m) const {
  if (m < 1 || n_ % m != 0)
    throw ConfigError("grid: sample size must divide n_phi");
  const int stride = n_ / m;
  std::vector<int> out;
  out.reserve(m * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) out.push_back(index(i * stride, j * stride));
  return out;
}

namespace {

// Σ_{k≥0} r^k b(c_{(i+dir·k) mod L}) along one cycle, for every i.
void cycle_sum(const std::vector<int>& cyc, double r, const PhiFunction& b,
               int dir, PhiFunction& out) {
  const int L = static_cast<int>(cyc.size());
  auto at = [&](int i) { return cyc[mod(i, L)]; };
  // first element directly, then the stable recurrence u_i = b_i + r u_{i+dir}
  double head = 0.0;
  double rk = 1.0;
  for (int k = 0; k < L; ++k, rk *= r) head += rk * b[at(dir * k)];
  head /= (1.0 - std::pow(r, L));
  out[at(0)] = head;
  double next = head;
  for (int s = 1; s < L; ++s) {
    const int i = -dir * s;
    next = b[at(i)] + r * next;
    out[at(i)] = next;
  }
}

}  // namespace

PhiFunction forward_orbit_sum(const TorusGrid& grid, double r,
                              const PhiFunction& b, OrbitSum how) {
  PhiFunction out(grid.size(), 0.0);
  if (how.mode == OrbitSum::Mode::periodic) {
    for (const auto& cyc : grid.cycles()) cycle_sum(cyc, r, b, +1, out);
    return out;
  }
  for (int p = 0; p < grid.size(); ++p) {
    double acc = 0.0;
    double rm = 1.0;
    int q = p;
    for (int m = 0; m <= how.terms; ++m, rm *= r, q = grid.forward(q))
      acc += rm * b[q];
    out[p] = acc;
  }
  return out;
}

PhiFunction backward_orbit_sum(const TorusGrid& grid, double r,
                               const PhiFunction& b, OrbitSum how) {
  PhiFunction out(grid.size(), 0.0);
  if (how.mode == OrbitSum::Mode::periodic) {
    // shift by one: v(φ) = Σ r^k b(S^{-k} φ), then u(φ) = v(S^{-1} φ)
    PhiFunction v(grid.size(), 0.0);
    for (const auto& cyc : grid.cycles()) cycle_sum(cyc, r, b, -1, v);
    for (int p = 0; p < grid.size(); ++p) out[p] = v[grid.backward(p)];
    return out;
  }
  for (int p = 0; p < grid.size(); ++p) {
    double acc = 0.0;
    double rk = 1.0;
    int q = grid.backward(p);
    for (int k = 0; k < how.terms; ++k, rk *= r, q = grid.backward(q))
      acc += rk * b[q];
    out[p] = acc;
  }
  return out;
}

PhiFunction solve_twisted_cohomology(const TorusGrid& grid, double lambda_i,
                                     double lambda_j, const PhiFunction& b,
                                     OrbitSum how) {
  PhiFunction out;
  if (lambda_j < lambda_i) {
    out = forward_orbit_sum(grid, lambda_j / lambda_i, b, how);
    for (double& v : out) v *= -1.0 / lambda_i;
  } else {
    out = backward_orbit_sum(grid, lambda_i / lambda_j, b, how);
    for (double& v : out) v /= lambda_j;
  }
  return out;
}

double bilinear(const TorusGrid& grid, const PhiFunction& f,
                const TorusPoint& p) {
  const int n = grid.n();
  const double h = kTwoPi / n;
  const double u = p.phi[0] / h;
  const double v = p.phi[1] / h;
  const int i0 = static_cast<int>(std::floor(u));
  const int j0 = static_cast<int>(std::floor(v));
  const double fu = u - i0;
  const double fv = v - j0;
  const double f00 = f[grid.index(i0, j0)];
  const double f10 = f[grid.index(i0 + 1, j0)];
  const double f01 = f[grid.index(i0, j0 + 1)];
  const double f11 = f[grid.index(i0 + 1, j0 + 1)];
  return (1 - fu) * ((1 - fv) * f00 + fv * f01) + fu * ((1 - fv) * f10 + fv * f11);
}

TimeGrid::TimeGrid(int n) : nt(n) {
  if (n < 2 || n % 2 != 0)
    throw ConfigError("grid: n_t must be a positive even integer");
}

void cumulative_simpson(const double* f, double* out, int nt, double h) {
  out[0] = 0.0;
  for (int k = 0; k + 2 <= nt; k += 2) {
    out[k + 1] = out[k] + h / 12.0 * (5.0 * f[k] + 8.0 * f[k + 1] - f[k + 2]);
    out[k + 2] = out[k] + h / 3.0 * (f[k] + 4.0 * f[k + 1] + f[k + 2]);
  }
}

PhiFunction GridFunction::at_end() const {
  PhiFunction out(np_);
  for (int p = 0; p < np_; ++p) out[p] = row(p)[nt_];
  return out;
}

double GridFunction::sup_norm() const {
  double m = 0.0;
  for (double x : v_) m = std::max(m, std::abs(x));
  return m;
}

double sup_norm(const PhiFunction& f) {
  double m = 0.0;
  for (double x : f) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace catsync
