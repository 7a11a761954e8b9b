#include <doctest.h>

#include <array>
#include <cmath>

#include <Eigen/LU>
#include <boost/numeric/odeint.hpp>

#include "catsync/cat_map.hpp"
#include "catsync/coupling.hpp"
#include "catsync/dynamics.hpp"
#include "catsync/errors.hpp"
#include "catsync/trig_poly.hpp"

using namespace catsync;

namespace {

double state_error(const FullState& a, const FullState& b) {
  return std::max({std::abs(angle_delta(a.x1, b.x1)), std::abs(angle_delta(a.x2, b.x2)),
                   std::abs(angle_delta(a.w, b.w))});
}

}  // namespace

TEST_CASE("cat map spectral data") {
  const CatMap& c = CatMap::get();
  CHECK(c.lambda_plus == doctest::Approx((3.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-15));
  CHECK(c.lambda_plus * c.lambda_minus == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(c.log_lambda_plus() == doctest::Approx(0.9624236501192069).epsilon(1e-14));
  // S x± = λ± x±, orthonormal.
  for (int s = 0; s < 2; ++s) {
    const Vec2 x = s == 0 ? c.x_plus : c.x_minus;
    const double l = s == 0 ? c.lambda_plus : c.lambda_minus;
    CHECK(2 * x[0] + x[1] == doctest::Approx(l * x[0]).epsilon(1e-14));
    CHECK(x[0] + x[1] == doctest::Approx(l * x[1]).epsilon(1e-14));
    CHECK(x[0] * x[0] + x[1] * x[1] == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(std::abs(c.x_plus[0] * c.x_minus[0] + c.x_plus[1] * c.x_minus[1]) < 1e-15);
}

TEST_CASE("apply_cat on small examples") {
  const TorusPoint p = apply_cat(TorusPoint(1.0, 0.5));
  CHECK(p.phi[0] == doctest::Approx(2.5));
  CHECK(p.phi[1] == doctest::Approx(1.5));
  const TorusPoint q = apply_cat(TorusPoint(3.0, 2.0));  // (8, 5) mod 2π
  CHECK(q.phi[0] == doctest::Approx(8.0 - kTwoPi));
  CHECK(q.phi[1] == doctest::Approx(5.0));
  const TorusPoint r = apply_cat_inverse(apply_cat(TorusPoint(0.3, 6.1)));
  CHECK(std::abs(angle_delta(r.phi[0], 0.3)) < 1e-13);
  CHECK(std::abs(angle_delta(r.phi[1], 6.1)) < 1e-13);
  CHECK(wrap_angle(-1e-300) < kTwoPi);
  CHECK(angle_delta(0.1, kTwoPi - 0.1) == doctest::Approx(0.2));
}

TEST_CASE("trig polynomial derivatives, clock integrals and Taylor data") {
  const TrigPoly g = locking_example(0.0).g;
  const double x1 = 0.7, x2 = 1.9, w = 2.2, t = 0.4, h = 1e-6;
  CHECK(g.d_w()(x1, x2, w, t) ==
        doctest::Approx((g(x1, x2, w + h, t) - g(x1, x2, w - h, t)) / (2 * h)).epsilon(1e-8));
  CHECK(g.d_x2()(x1, x2, w, t) ==
        doctest::Approx((g(x1, x2 + h, w, t) - g(x1, x2 - h, w, t)) / (2 * h)).epsilon(1e-8));

  // Closed-form clock integral against composite Simpson.
  const int n = 2000;
  double s = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double u = 0.3 + (2.0 - 0.3) * k / n;
    s += (k == 0 || k == n ? 1 : (k % 2 ? 4 : 2)) * g(x1, x2, 1.0 + u, u);
  }
  s *= (2.0 - 0.3) / n / 3.0;
  CHECK(g.integrate_along_clock(x1, x2, 1.0, 0.3, 2.0) == doctest::Approx(s).epsilon(1e-10));

  // Taylor coefficients along x± and w against finite differences.
  const CatMap& c = CatMap::get();
  const TrigPoly f = bidirectional_example(0.0).f1 + g;
  const auto idx = multi_indices_up_to(2);
  std::vector<double> tay(idx.size(), 0.0);
  f.accumulate_taylor(x1, x2, w, t, idx, tay.data());
  auto at = [&](double a, double b, double dw) {
    return f(x1 + a * c.x_plus[0] + b * c.x_minus[0], x2 + a * c.x_plus[1] + b * c.x_minus[1],
             w + dw, t);
  };
  const double e = 1e-4;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const MultiIndex q = idx[i];
    double fd = 0.0;
    if (q.order() == 0) fd = at(0, 0, 0);
    if (q == MultiIndex{1, 0, 0}) fd = (at(e, 0, 0) - at(-e, 0, 0)) / (2 * e);
    if (q == MultiIndex{0, 1, 0}) fd = (at(0, e, 0) - at(0, -e, 0)) / (2 * e);
    if (q == MultiIndex{0, 0, 1}) fd = (at(0, 0, e) - at(0, 0, -e)) / (2 * e);
    if (q == MultiIndex{2, 0, 0}) fd = (at(e, 0, 0) - 2 * at(0, 0, 0) + at(-e, 0, 0)) / (2 * e * e);
    if (q == MultiIndex{1, 0, 1})
      fd = (at(e, 0, e) - at(e, 0, -e) - at(-e, 0, e) + at(-e, 0, -e)) / (4 * e * e);
    if (q.order() == 2 && !(q == MultiIndex{2, 0, 0}) && !(q == MultiIndex{1, 0, 1})) continue;
    CHECK(tay[i] == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("coupling validation") {
  CHECK_THROWS_AS(locking_example(-0.1).validate(), ConfigError);
  CHECK_THROWS_AS(locking_example(NAN).validate(), ConfigError);
  CHECK_NOTHROW(locking_example(0.0).validate());
  CHECK(locking_example(0.1).f_is_zero());
  CHECK_FALSE(bidirectional_example(0.1).f_is_zero());
}

TEST_CASE("unperturbed Poincare map is the cat map with a full clock turn") {
  const CouplingSpec spec = locking_example(0.0);
  const FullState s{0.4, 2.9, 1.3};
  const FullState out = poincare_map(s, spec);
  const TorusPoint x = apply_cat(s.x());
  CHECK(state_error(out, FullState{x.phi[0], x.phi[1], s.w}) < 1e-12);
  const MapWithJacobian mj = poincare_with_jacobian(s, spec);
  CHECK(mj.jacobian.determinant() == doctest::Approx(1.0).epsilon(1e-14));
  const Eigen::Matrix3d k2 = kick_matrix() * kick_matrix();
  CHECK(k2(0, 0) == 5.0);
  CHECK(k2(0, 1) == 3.0);
  CHECK(k2(1, 1) == 2.0);
  CHECK(k2(2, 2) == 1.0);
}

TEST_CASE("RK4 order: halving dt cuts the error about 16 times") {
  const CouplingSpec spec = bidirectional_example(0.3);
  const FullState s{1.1, 0.2, 2.5};
  const FullState ref = flow_segment(s, spec, 0.0, kTwoPi, kTwoPi / 4096);
  const double e1 = state_error(flow_segment(s, spec, 0.0, kTwoPi, kTwoPi / 64), ref);
  const double e2 = state_error(flow_segment(s, spec, 0.0, kTwoPi, kTwoPi / 128), ref);
  CHECK(e1 / e2 > 12.0);
  CHECK(e1 / e2 < 20.0);
}

TEST_CASE("flow matches an adaptive odeint reference") {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 3>;
  const CouplingSpec spec = bidirectional_example(0.2);
  const FullState s{0.3, 4.0, 5.1};
  State y{s.x1, s.x2, s.w};
  auto rhs = [&](const State& z, State& dz, double t) {
    const FieldJet j = evaluate_field(spec, z[0], z[1], z[2], t);
    dz[0] = spec.epsilon * j.value[0];
    dz[1] = spec.epsilon * j.value[1];
    dz[2] = 1.0 + spec.epsilon * j.value[2];
  };
  odeint::integrate_adaptive(odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(1e-13, 1e-13),
                             rhs, y, 0.0, kTwoPi, 1e-3);
  const FullState out = flow_segment(s, spec, 0.0, kTwoPi);
  CHECK(state_error(out, FullState{y[0], y[1], y[2]}) < 1e-8);
}

TEST_CASE("Jacobian matches finite differences; Liouville determinant") {
  const CouplingSpec spec = bidirectional_example(0.15);
  const FullState s{2.0, 0.6, 3.3};
  const MapWithJacobian mj = poincare_with_jacobian(s, spec);
  const double h = 1e-6;
  for (int c = 0; c < 3; ++c) {
    FullState p = s, m = s;
    (c == 0 ? p.x1 : c == 1 ? p.x2 : p.w) += h;
    (c == 0 ? m.x1 : c == 1 ? m.x2 : m.w) -= h;
    const FullState fp = poincare_map(p, spec), fm = poincare_map(m, spec);
    CHECK(angle_delta(fp.x1, fm.x1) / (2 * h) == doctest::Approx(mj.jacobian(0, c)).epsilon(1e-5));
    CHECK(angle_delta(fp.x2, fm.x2) / (2 * h) == doctest::Approx(mj.jacobian(1, c)).epsilon(1e-5));
    CHECK(angle_delta(fp.w, fm.w) / (2 * h) == doctest::Approx(mj.jacobian(2, c)).epsilon(1e-5));
  }
  // f = 0: x is frozen during the flow, det DS = exp(ε ∫ ∂_w g) along the clock orbit.
  const CouplingSpec lock = locking_example(0.15);
  const MapWithJacobian lj = poincare_with_jacobian(s, lock, kTwoPi / 2048);
  const TorusPoint x = apply_cat(s.x());
  double div = 0.0;
  const int n = 4096;
  FullState cur{x.phi[0], x.phi[1], s.w};
  for (int k = 0; k < n; ++k) {
    const double t0 = kTwoPi * k / n, t1 = kTwoPi * (k + 1) / n;
    const FullState nxt = flow_segment(cur, lock, t0, t1, t1 - t0);
    const double gm = lock.g.d_w()(x.phi[0], x.phi[1], wrap_angle(cur.w + 0.5 * angle_delta(nxt.w, cur.w)),
                                   0.5 * (t0 + t1));
    div += lock.epsilon * gm * (t1 - t0);
    cur = nxt;
  }
  CHECK(lj.jacobian.determinant() == doctest::Approx(std::exp(div)).epsilon(1e-6));
}

TEST_CASE("map is 2π-periodic in every angle and deterministic") {
  const CouplingSpec spec = bidirectional_example(0.4);
  const FullState a{0.5, 1.5, 2.5};
  const FullState b{0.5 + kTwoPi, 1.5 - kTwoPi, 2.5 + 2 * kTwoPi};
  CHECK(state_error(poincare_map(a, spec), poincare_map(b, spec)) < 1e-11);
  const FullState r1 = poincare_map(a, spec), r2 = poincare_map(a, spec);
  CHECK(r1.x1 == r2.x1);
  CHECK(r1.x2 == r2.x2);
  CHECK(r1.w == r2.w);
}
