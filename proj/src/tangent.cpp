#include "catsync/tangent.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "catsync/dynamics.hpp"
#include "catsync/errors.hpp"

namespace catsync {

Eigen::Matrix3d eigen_basis() {
  const CatMap& cat = CatMap::get();
  Eigen::Matrix3d p = Eigen::Matrix3d::Zero();
  p(0, 0) = cat.x_plus[0];
  p(1, 0) = cat.x_plus[1];
  p(0, 1) = cat.x_minus[0];
  p(1, 1) = cat.x_minus[1];
  p(2, 2) = 1.0;
  return p;
}

Eigen::Matrix3d to_eigen_basis(const Eigen::Matrix3d& cartesian) {
  const Eigen::Matrix3d p = eigen_basis();
  return p.transpose() * cartesian * p;
}

Eigen::Matrix3d from_eigen_basis(const Eigen::Matrix3d& eig) {
  const Eigen::Matrix3d p = eigen_basis();
  return p * eig * p.transpose();
}

const MatrixField& MSeries::at(int n) const {
  if (n < 1 || n > order())
    throw MissingOrder("m_series: order " + std::to_string(n) + " not computed");
  return orders[n - 1];
}

MSeries m_series(const SeriesBundle& bundle, int n_max) {
  if (n_max < 1) throw ConfigError("m_series: n_max must be >= 1");
  if (bundle.order() < n_max - 1)
    throw MissingOrder("m_series: order " + std::to_string(n_max) +
                       " needs series orders 1.." + std::to_string(n_max - 1));
  const CatMap& cat = CatMap::get();
  const TorusGrid& grid = bundle.grid();
  const int nt = bundle.times().nt;
  const double h = bundle.times().step();
  const double w0 = bundle.constants().w0;
  const auto& spec = bundle.spec();
  const int L = n_max - 1;  // highest displacement order needed

  const std::vector<MultiIndex> idx = multi_indices_up_to(n_max);
  std::size_t nlow = 0;  // prefix with |q| <= L
  while (nlow < idx.size() && idx[nlow].order() <= L) ++nlow;
  const std::vector<MultiIndex> low(idx.begin(), idx.begin() + nlow);
  std::map<std::array<int, 3>, int> where;
  for (std::size_t i = 0; i < idx.size(); ++i)
    where[{idx[i].plus, idx[i].minus, idx[i].clock}] = static_cast<int>(i);
  // shifted[qi][j] = index of q + e_j
  std::vector<std::array<int, 3>> shifted(nlow);
  for (std::size_t qi = 0; qi < nlow; ++qi) {
    const auto& q = low[qi];
    shifted[qi] = {where.at({q.plus + 1, q.minus, q.clock}),
                   where.at({q.plus, q.minus + 1, q.clock}),
                   where.at({q.plus, q.minus, q.clock + 1})};
  }

  MSeries out;
  out.orders.assign(n_max, MatrixField(grid.size(), Eigen::Matrix3d::Zero()));
  const bool parallel = bundle.settings().exec == Exec::parallel;
#pragma omp parallel for schedule(dynamic, 4) if (parallel)
  for (int p = 0; p < grid.size(); ++p) {
    const std::size_t nq = idx.size();
    std::vector<double> tf1(nq), tf2(nq), tg(nq), C((L + 1) * nlow);
    std::array<std::vector<double>, 3> d;
    std::array<std::vector<double>, 3> T;  // eigen components of f
    for (auto& v : T) v.resize(nq);
    // J[l][k]: ε^l coefficient of ∂f along the trajectory at t_k
    std::vector<std::vector<Eigen::Matrix3d>> J(L + 1, std::vector<Eigen::Matrix3d>(nt + 1));
    const TorusPoint s = apply_cat(grid.point(p));
    for (int k = 0; k <= nt; ++k) {
      const double t = k * h;
      std::fill(tf1.begin(), tf1.end(), 0.0);
      std::fill(tf2.begin(), tf2.end(), 0.0);
      std::fill(tg.begin(), tg.end(), 0.0);
      spec.f1.accumulate_taylor(s.phi[0], s.phi[1], w0 + t, t, idx, tf1.data());
      spec.f2.accumulate_taylor(s.phi[0], s.phi[1], w0 + t, t, idx, tf2.data());
      spec.g.accumulate_taylor(s.phi[0], s.phi[1], w0 + t, t, idx, tg.data());
      for (std::size_t qi = 0; qi < nq; ++qi) {
        T[0][qi] = cat.x_plus[0] * tf1[qi] + cat.x_plus[1] * tf2[qi];
        T[1][qi] = cat.x_minus[0] * tf1[qi] + cat.x_minus[1] * tf2[qi];
        T[2][qi] = tg[qi];
      }
      if (L == 0) {
        C[0] = 1.0;
      } else {
        bundle.displacements(p, k, L, d);
        displacement_powers(d, L, low, C.data());
      }
      for (int l = 0; l <= L; ++l) {
        Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
        const double* c = C.data() + l * nlow;
        for (std::size_t qi = 0; qi < nlow; ++qi) {
          if (c[qi] == 0.0) continue;
          const MultiIndex& q = low[qi];
          const int qq[3] = {q.plus, q.minus, q.clock};
          for (int j = 0; j < 3; ++j) {
            const double fac = (qq[j] + 1) * c[qi];
            const int sj = shifted[qi][j];
            for (int i = 0; i < 3; ++i) m(i, j) += fac * T[i][sj];
          }
        }
        J[l][k] = m;
      }
    }
    // T⁽ⁿ⁾(τ) = ∫₀^τ Σ_l J⁽ˡ⁾ T⁽ⁿ⁻¹⁻ˡ⁾, T⁽⁰⁾ = 𝟙
    std::vector<std::vector<Eigen::Matrix3d>> Y(n_max + 1,
                                                std::vector<Eigen::Matrix3d>(nt + 1));
    for (int k = 0; k <= nt; ++k) Y[0][k].setIdentity();
    std::vector<double> f(nt + 1), F(nt + 1);
    std::vector<Eigen::Matrix3d> integrand(nt + 1);
    for (int n = 1; n <= n_max; ++n) {
      for (int k = 0; k <= nt; ++k) {
        Eigen::Matrix3d acc = Eigen::Matrix3d::Zero();
        for (int l = 0; l <= std::min(L, n - 1); ++l) acc += J[l][k] * Y[n - 1 - l][k];
        integrand[k] = acc;
      }
      for (int e = 0; e < 9; ++e) {
        for (int k = 0; k <= nt; ++k) f[k] = integrand[k](e / 3, e % 3);
        cumulative_simpson(f.data(), F.data(), nt, h);
        for (int k = 0; k <= nt; ++k) Y[n][k](e / 3, e % 3) = F[k];
      }
      out.orders[n - 1][p] = Y[n][nt];
    }
  }
  return out;
}

namespace {

void append_order(int n, TangentFrame& fr, const MSeries& ms, const TorusGrid& grid,
                  OrbitSum how) {
  if (fr.order() != n - 1)
    throw MissingOrder("tangent frame: order " + std::to_string(n) +
                       " needs exactly orders 1.." + std::to_string(n - 1));
  const CatMap& cat = CatMap::get();
  const MatrixField& Mn = ms.at(n);
  const int np = grid.size();
  std::array<PhiFunction, 3> nu;
  for (int i = 0; i < 3; ++i) {
    nu[i].assign(np, 0.0);
    for (int p = 0; p < np; ++p) {
      double v = Mn[p](i, i) * cat.multiplier(i);
      for (int n1 = 1; n1 < n; ++n1) {
        const MatrixField& M1 = ms.at(n1);
        const MatrixField& K2 = fr.K[n - n1 - 1];
        for (int j = 0; j < 3; ++j) v += M1[p](i, j) * cat.multiplier(j) * K2[p](j, i);
      }
      nu[i][p] = v;
    }
  }
  MatrixField K(np, Eigen::Matrix3d::Zero());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      PhiFunction b(np);
      for (int p = 0; p < np; ++p) {
        double v = Mn[p](i, j) * cat.multiplier(j);
        for (int n1 = 1; n1 < n; ++n1) {
          const int n2 = n - n1;
          v -= fr.K[n1 - 1][grid.forward(p)](i, j) * fr.nu[n2 - 1][j][p];
          const MatrixField& M1 = ms.at(n1);
          for (int jp = 0; jp < 3; ++jp)
            v += M1[p](i, jp) * cat.multiplier(jp) * fr.K[n2 - 1][p](jp, j);
        }
        b[p] = v;
      }
      const PhiFunction k =
          solve_twisted_cohomology(grid, cat.multiplier(i), cat.multiplier(j), b, how);
      for (int p = 0; p < np; ++p) K[p](i, j) = k[p];
    }
  fr.K.push_back(std::move(K));
  fr.nu.push_back(std::move(nu));
}

}  // namespace

TangentFrame first_order_frame(const MSeries& ms, const TorusGrid& grid, OrbitSum how) {
  TangentFrame fr;
  append_order(1, fr, ms, grid, how);
  return fr;
}

void higher_order_frame(int n, TangentFrame& frame, const MSeries& ms,
                        const TorusGrid& grid, OrbitSum how) {
  if (n < 2) throw MissingOrder("higher_order_frame: n must be >= 2");
  append_order(n, frame, ms, grid, how);
}

TangentFrame build_frame(const MSeries& ms, const TorusGrid& grid, int n_max,
                         OrbitSum how) {
  TangentFrame fr = first_order_frame(ms, grid, how);
  for (int n = 2; n <= n_max; ++n) higher_order_frame(n, fr, ms, grid, how);
  return fr;
}

std::array<PhiFunction, 3> multipliers(const TangentFrame& frame, double epsilon,
                                       int n_max) {
  if (n_max < 0) n_max = frame.order();
  if (n_max > frame.order()) throw MissingOrder("multipliers: order not computed");
  const CatMap& cat = CatMap::get();
  const std::size_t np = frame.order() > 0 ? frame.nu[0][0].size() : 0;
  std::array<PhiFunction, 3> out;
  for (int i = 0; i < 3; ++i) {
    out[i].assign(np, cat.multiplier(i));
    double en = 1.0;
    for (int n = 1; n <= n_max; ++n) {
      en *= epsilon;
      for (std::size_t p = 0; p < np; ++p) out[i][p] += en * frame.nu[n - 1][i][p];
    }
  }
  return out;
}

double tangent_residual(const SeriesBundle& bundle, const TangentFrame& frame,
                        const Manifold& m, const std::vector<int>& sample, double dt,
                        int n_max) {
  if (n_max < 0) n_max = frame.order();
  const CatMap& cat = CatMap::get();
  const CouplingSpec spec = bundle.spec().with_epsilon(m.epsilon);
  const TorusGrid& grid = bundle.grid();
  const double eps = m.epsilon;
  auto K_at = [&](int p) {
    Eigen::Matrix3d k = Eigen::Matrix3d::Zero();
    double en = 1.0;
    for (int n = 1; n <= n_max; ++n) {
      en *= eps;
      k += en * frame.K[n - 1][p];
    }
    return k;
  };
  double worst = 0.0;
  for (int p : sample) {
    const FullState s = FullState{m.H[p].phi[0], m.H[p].phi[1], m.W[p]}.reduced();
    const Eigen::Matrix3d ds = to_eigen_basis(poincare_with_jacobian(s, spec, dt).jacobian);
    Eigen::Matrix3d lam = Eigen::Matrix3d::Zero();
    double en = 1.0;
    for (int i = 0; i < 3; ++i) lam(i, i) = cat.multiplier(i);
    for (int n = 1; n <= n_max; ++n) {
      en *= eps;
      for (int i = 0; i < 3; ++i) lam(i, i) += en * frame.nu[n - 1][i][p];
    }
    const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
    const Eigen::Matrix3d r = ds * (I + K_at(p)) - (I + K_at(grid.forward(p))) * lam;
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace catsync
