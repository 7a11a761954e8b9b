#include <doctest.h>

#include <cmath>

#include "catsync/dynamics.hpp"
#include "catsync/errors.hpp"
#include "catsync/tangent.hpp"

using namespace catsync;

namespace {

SeriesBundle bundle_for(const CouplingSpec& spec, int n, int n_phi = 16, int n_t = 64) {
  PhaseConstants pc = solve_w0(spec.g);
  pc.mu = spec.epsilon;
  SeriesSettings s;
  s.n_phi = n_phi;
  s.n_t = n_t;
  return build_series(spec, pc, s, n);
}

}  // namespace

TEST_CASE("eigenbasis transforms are inverse to each other") {
  const Eigen::Matrix3d p = eigen_basis();
  CHECK((p.transpose() * p - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-15);
  Eigen::Matrix3d a;
  a << 1.5, -2, 0.3, 4, 0.1, -7, 2, 2, 9;
  CHECK((from_eigen_basis(to_eigen_basis(a)) - a).cwiseAbs().maxCoeff() < 1e-13);
  // The kick is diagonal in the eigenbasis.
  const Eigen::Matrix3d k = to_eigen_basis(kick_matrix());
  const CatMap& c = CatMap::get();
  CHECK(k(0, 0) == doctest::Approx(c.lambda_plus).epsilon(1e-14));
  CHECK(k(1, 1) == doctest::Approx(c.lambda_minus).epsilon(1e-14));
  CHECK(std::abs(k(0, 1)) < 1e-14);
}

TEST_CASE("first tangent coefficient matches a finite difference in epsilon") {
  const double eps = 1e-3;
  const CouplingSpec spec = bidirectional_example(eps);
  const SeriesBundle b = bundle_for(spec, 3, 16, 128);
  const MSeries ms = m_series(b, 3);
  const Manifold m = assemble_manifold(b, eps, 3);
  const CatMap& c = CatMap::get();
  const Eigen::Matrix3d lam_inv = Eigen::Vector3d(1 / c.lambda_plus, 1 / c.lambda_minus, 1.0).asDiagonal();
  double worst = 0.0;
  for (int p : {0, 37, 100, 201}) {
    const FullState s = FullState{m.H[p].phi[0], m.H[p].phi[1], m.W[p]}.reduced();
    const Eigen::Matrix3d ds = to_eigen_basis(poincare_with_jacobian(s, spec, kTwoPi / 1024).jacobian);
    const Eigen::Matrix3d fd = (ds * lam_inv - Eigen::Matrix3d::Identity()) / eps;
    const Eigen::Matrix3d series = ms.at(1)[p] + eps * ms.at(2)[p] + eps * eps * ms.at(3)[p];
    worst = std::max(worst, (fd - series).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("f = 0 keeps the hyperbolic rows of the tangent map exact") {
  const CouplingSpec spec = locking_example(0.05);
  const SeriesBundle b = bundle_for(spec, 2);
  const MSeries ms = m_series(b, 3);
  const TangentFrame fr = build_frame(ms, b.grid(), 3, b.hyperbolic_sum());
  for (int n = 1; n <= 3; ++n)
    for (const auto& m : ms.at(n)) CHECK(m.topRows(2).cwiseAbs().maxCoeff() == 0.0);
  const auto lam = multipliers(fr, 0.05);
  const CatMap& c = CatMap::get();
  for (std::size_t p = 0; p < lam[0].size(); ++p) {
    CHECK(lam[0][p] == c.lambda_plus);
    CHECK(lam[1][p] == c.lambda_minus);
  }
  // Mean log λ₃ against εΓ, up to O(ε²).
  double mean = 0.0;
  for (double x : lam[2]) mean += std::log(x);
  mean /= static_cast<double>(lam[2].size());
  CHECK(mean == doctest::Approx(-kTwoPi * 0.05).epsilon(0.2));
  const auto lam0 = multipliers(fr, 0.0);
  CHECK(lam0[2][5] == 1.0);
  CHECK(lam0[0][5] == c.lambda_plus);
}

TEST_CASE("order-1 conjugator solves its twisted cohomology equation") {
  const CouplingSpec spec = bidirectional_example(0.02);
  const SeriesBundle b = bundle_for(spec, 1);
  const MSeries ms = m_series(b, 1);
  const TangentFrame fr = first_order_frame(ms, b.grid(), b.hyperbolic_sum());
  const TorusGrid& g = b.grid();
  const CatMap& c = CatMap::get();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      for (int p = 0; p < g.size(); ++p) {
        if (i == j) {
          CHECK(fr.nu[0][i][p] == doctest::Approx(ms.at(1)[p](i, i) * c.multiplier(i)));
          CHECK(fr.K[0][p](i, i) == 0.0);
          continue;
        }
        const double lhs = c.multiplier(i) * fr.K[0][p](i, j) - c.multiplier(j) * fr.K[0][g.forward(p)](i, j);
        CHECK(lhs == doctest::Approx(-ms.at(1)[p](i, j) * c.multiplier(j)).epsilon(1e-12).scale(1.0));
      }
    }
  TangentFrame empty;
  CHECK_THROWS_AS(higher_order_frame(3, empty, ms, g, b.hyperbolic_sum()), MissingOrder);
  CHECK_THROWS_AS(m_series(b, 3), MissingOrder);
}

TEST_CASE("gauge change leaves orbit averages of log multipliers invariant") {
  const CouplingSpec spec = locking_example(0.05);
  const SeriesBundle b = bundle_for(spec, 1);
  const MSeries ms = m_series(b, 2);
  const TangentFrame fr = build_frame(ms, b.grid(), 2, b.hyperbolic_sum());
  const auto lam = multipliers(fr, 0.05);
  const TorusGrid& g = b.grid();
  auto l = [&](int p) { return 2.0 + std::sin(g.point(p).phi[0]) * std::cos(g.point(p).phi[1]); };
  // y' = l y  ⇒  λ'(φ) = λ(φ) l(Sφ) / l(φ).
  const int start = 7, steps = 500;
  double s = 0.0, s_gauge = 0.0;
  int p = start;
  for (int k = 0; k < steps; ++k) {
    s += std::log(lam[2][p]);
    s_gauge += std::log(lam[2][p] * l(g.forward(p)) / l(p));
    p = g.forward(p);
  }
  const double boundary = (std::log(l(p)) - std::log(l(start))) / steps;
  CHECK(s_gauge / steps - s / steps == doctest::Approx(boundary).epsilon(1e-12).scale(1.0));
}

TEST_CASE("tangent residual decreases with the truncation order") {
  const double eps = 0.02;
  const CouplingSpec spec = locking_example(eps);
  const SeriesBundle b = bundle_for(spec, 3, 16, 128);
  const MSeries ms = m_series(b, 3);
  const TangentFrame fr = build_frame(ms, b.grid(), 3, b.hyperbolic_sum());
  const auto sample = b.grid().subsample(4);
  double prev = 1e9;
  for (int n = 1; n <= 3; ++n) {
    const double r = tangent_residual(b, fr, assemble_manifold(b, eps, n), sample, kTwoPi / 1024, n);
    CHECK(r < prev);
    prev = r;
  }
  CHECK(prev < 1e3 * std::pow(eps, 4));
}
