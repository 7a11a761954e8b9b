#include <doctest.h>

#include <cmath>

#include "catsync/errors.hpp"
#include "catsync/grid.hpp"
#include "catsync/series.hpp"

using namespace catsync;

namespace {

PhaseConstants tied(const CouplingSpec& spec) {
  PhaseConstants pc = solve_w0(spec.g);
  pc.mu = spec.epsilon;
  return pc;
}

SeriesSettings small(Exec e = Exec::serial) {
  SeriesSettings s;
  s.n_phi = 16;
  s.n_t = 64;
  s.exec = e;
  return s;
}

double max_diff(const PhiFunction& a, const PhiFunction& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("locking phase of the example coupling") {
  const PhaseConstants pc = solve_w0(locking_example(0.0).g);
  CHECK(pc.w0 == doctest::Approx(M_PI).epsilon(1e-11));
  CHECK(pc.gamma == doctest::Approx(-kTwoPi).epsilon(1e-11));
  CHECK(pc.phi_spread0 < 1e-10);
  CHECK(pc.phi_spread1 < 1e-10);
  // γ̄₀ has two zeros per turn; only one contracts.
  int admissible = 0;
  for (const auto& r : pc.roots) admissible += r.admissible;
  CHECK(pc.roots.size() == 2);
  CHECK(admissible == 1);
}

TEST_CASE("locking hypotheses fail loudly") {
  // γ̄₀ ≡ 0 for every w but Γ = 0: nothing contracts.
  const TrigPoly cos_t({TrigTerm{1.0, {0, 0, 0, 1}, Trig::cos}});
  try {
    solve_w0(cos_t);
    FAIL("expected NoRoot");
  } catch (const HypothesisError& e) {
    CHECK(e.kind() == HypothesisError::Kind::NoRoot);
  }
  // g = sin(w−t)(1 + cos x₂): γ̄₀ vanishes at w = π for every φ, Γ does not
  // share that φ-independence.
  const TrigPoly shifted({TrigTerm{1.0, {0, 0, 1, -1}, Trig::sin},
                          TrigTerm{0.5, {0, 1, 1, -1}, Trig::sin},
                          TrigTerm{0.5, {0, -1, 1, -1}, Trig::sin}});
  try {
    solve_w0(shifted);
    FAIL("expected PhiDependent");
  } catch (const HypothesisError& e) {
    CHECK(e.kind() == HypothesisError::Kind::PhiDependent);
  }
}

TEST_CASE("dissipation envelope is additive and bounded by 0 <= tau <= t <= 2pi") {
  const TrigPoly g = locking_example(0.0).g;
  const TorusPoint phi(1.0, 2.0);
  const double w0 = M_PI;
  CHECK(gamma_envelope(g, w0, 5.0, 1.0, phi) ==
        doctest::Approx(gamma_envelope(g, w0, 5.0, 3.0, phi) + gamma_envelope(g, w0, 3.0, 1.0, phi))
            .epsilon(1e-13));
  CHECK(gamma_envelope(g, w0, kTwoPi, 0.0, phi) == doctest::Approx(-kTwoPi).epsilon(1e-12));
  CHECK_THROWS_AS(gamma_envelope(g, w0, 1.0, 2.0, phi), ConfigError);
}

TEST_CASE("cumulative Simpson is exact for cubics at even nodes") {
  const int nt = 16;
  const double h = 2.0 / nt;
  std::vector<double> f(nt + 1), out(nt + 1);
  for (int k = 0; k <= nt; ++k) {
    const double t = k * h;
    f[k] = 1 + t - 3 * t * t + t * t * t;
  }
  cumulative_simpson(f.data(), out.data(), nt, h);
  for (int k = 0; k <= nt; k += 2) {
    const double t = k * h;
    CHECK(out[k] == doctest::Approx(t + t * t / 2 - t * t * t + t * t * t * t / 4).epsilon(1e-13));
  }
  CHECK(out[0] == 0.0);
}

TEST_CASE("grid permutation and orbit sums") {
  const TorusGrid grid(12);
  for (int p = 0; p < grid.size(); ++p) {
    const TorusPoint a = apply_cat(grid.point(p));
    const TorusPoint b = grid.point(grid.forward(p));
    CHECK(std::abs(angle_delta(a.phi[0], b.phi[0])) < 1e-12);
    CHECK(std::abs(angle_delta(a.phi[1], b.phi[1])) < 1e-12);
    CHECK(grid.backward(grid.forward(p)) == p);
  }
  PhiFunction b(grid.size());
  for (int p = 0; p < grid.size(); ++p) b[p] = std::sin(grid.point(p).phi[0]) + 0.3 * p / grid.size();

  // Brute force.
  const double r = 0.4;
  const PhiFunction u = forward_orbit_sum(grid, r, b, OrbitSum::truncated(30));
  double brute = 0.0;
  for (int m = 0; m <= 30; ++m) brute += std::pow(r, m) * b[grid.shift(5, m)];
  CHECK(u[5] == doctest::Approx(brute).epsilon(1e-14));

  // Periodic resummation solves v(Sφ) = b(φ) + r v(φ) exactly.
  const PhiFunction v = backward_orbit_sum(grid, 0.97, b, OrbitSum::periodic());
  for (int p = 0; p < grid.size(); ++p)
    CHECK(v[grid.forward(p)] == doctest::Approx(b[p] + 0.97 * v[p]).epsilon(1e-12));

  // Twisted cohomology in both directions.
  const CatMap& c = CatMap::get();
  for (auto [li, lj] : {std::pair{c.lambda_plus, 1.0}, std::pair{c.lambda_minus, c.lambda_plus},
                        std::pair{1.0, c.lambda_minus}}) {
    const PhiFunction k = solve_twisted_cohomology(grid, li, lj, b, OrbitSum::truncated(60));
    for (int p = 0; p < grid.size(); ++p)
      CHECK(li * k[p] - lj * k[grid.forward(p)] == doctest::Approx(-b[p]).epsilon(1e-12));
  }
}

TEST_CASE("order-1 clock coefficient is constant when g does not see phi") {
  const TrigPoly g({TrigTerm{1.0, {0, 0, 1, -1}, Trig::sin}});
  CouplingSpec spec;
  spec.g = g;
  spec.epsilon = 0.05;
  const SeriesBundle b = build_series(spec, tied(spec), small(), 1);
  const PhiFunction& u = b.at(1).U;
  for (double x : u) CHECK(x == doctest::Approx(u[0]).epsilon(1e-12));
}

TEST_CASE("boundary conditions and cohomological identities per order") {
  const CouplingSpec spec = bidirectional_example(0.03);
  const SeriesBundle b = build_series(spec, tied(spec), small(), 3);
  const TorusGrid& grid = b.grid();
  const CatMap& c = CatMap::get();
  for (int n = 1; n <= 3; ++n) {
    const SeriesOrder& o = b.at(n);
    const PhiFunction ap = o.a_plus.at_end(), am = o.a_minus.at_end(), xi = o.xi.at_end();
    const double scale = 1.0 + o.sup_norm();
    for (int p = 0; p < grid.size(); ++p) {
      CHECK(o.xi(p, 0) == 0.0);
      CHECK(o.a_plus(p, 0) == 0.0);
      // a(φ, 2π) = H(Sφ) − S H(φ) componentwise along x±.
      CHECK(std::abs(o.h_plus[grid.forward(p)] - c.lambda_plus * o.h_plus[p] - ap[p]) < 1e-12 * scale);
      CHECK(std::abs(o.h_minus[grid.forward(p)] - c.lambda_minus * o.h_minus[p] - am[p]) <
            1e-12 * scale);
      // U(Sφ) = λ U(φ) + ξ(φ, 2π).
      CHECK(std::abs(o.U[grid.forward(p)] - b.lambda_clock() * o.U[p] - xi[p]) < 1e-12 * scale);
    }
  }
  const SeriesDiagnostics d = b.diagnostics();
  CHECK(d.sup_norms.size() == 3);
  CHECK(d.interpolation_error == 0.0);
  CHECK(d.tail_bound < 1e-16);
  for (double r : d.cohomology_residual) CHECK(r < 1e-12);
}

TEST_CASE("f = 0 leaves the torus untouched and kills order 2") {
  const CouplingSpec spec = locking_example(0.05);
  const SeriesBundle b = build_series(spec, tied(spec), small(), 3);
  for (int n = 1; n <= 3; ++n) {
    CHECK(sup_norm(b.at(n).h_plus) == 0.0);
    CHECK(sup_norm(b.at(n).h_minus) == 0.0);
    CHECK(b.at(n).a_plus.sup_norm() == 0.0);
  }
  CHECK(b.at(1).sup_norm() > 0.1);
  CHECK(b.at(2).sup_norm() < 1e-12);
  const Manifold m = assemble_manifold(b, 0.0);
  for (int p = 0; p < b.grid().size(); ++p) {
    CHECK(m.W[p] == doctest::Approx(M_PI));
    CHECK(m.H[p].phi[0] == b.grid().point(p).phi[0]);
  }
}

TEST_CASE("orders must be computed in sequence") {
  const CouplingSpec spec = locking_example(0.05);
  SeriesBundle b(spec, tied(spec), small());
  CHECK_THROWS_AS(b.at(1), MissingOrder);
  CHECK_THROWS_AS(higher_order(2, b), MissingOrder);
  b.append(first_order(b));
  CHECK_NOTHROW(higher_order(2, b));
  CHECK_THROWS_AS(higher_order(3, b), MissingOrder);
}

TEST_CASE("M_sum = 64 and 32 agree to 1e-12") {
  const CouplingSpec spec = bidirectional_example(0.02);
  SeriesSettings a = small(), c = small();
  a.m_sum = 64;
  c.m_sum = 32;
  const SeriesBundle ba = build_series(spec, tied(spec), a, 2);
  const SeriesBundle bc = build_series(spec, tied(spec), c, 2);
  for (int n = 1; n <= 2; ++n) {
    CHECK(max_diff(ba.at(n).h_plus, bc.at(n).h_plus) < 1e-12);
    CHECK(max_diff(ba.at(n).h_minus, bc.at(n).h_minus) < 1e-12);
    CHECK(max_diff(ba.at(n).U, bc.at(n).U) < 1e-12);
  }
}

TEST_CASE("serial and parallel builds are bitwise identical") {
  const CouplingSpec spec = bidirectional_example(0.02);
  const SeriesBundle s = build_series(spec, tied(spec), small(Exec::serial), 3);
  const SeriesBundle p = build_series(spec, tied(spec), small(Exec::parallel), 3);
  for (int n = 1; n <= 3; ++n) {
    CHECK(s.at(n).xi.data() == p.at(n).xi.data());
    CHECK(s.at(n).U == p.at(n).U);
    CHECK(s.at(n).h_plus == p.at(n).h_plus);
  }
}

TEST_CASE("bundle depends on mu only; resummation picks epsilon") {
  // (μ, ε) = (0.1, 0.05): the coefficients are those of μ = 0.1 whatever ε
  // is used to resum; resumming them at ε = μ gives the tied computation.
  const CouplingSpec spec = bidirectional_example(0.05);
  PhaseConstants pc = solve_w0(spec.g);
  pc.mu = 0.1;
  const SeriesBundle loose = build_series(spec, pc, small(), 2);
  const CouplingSpec spec_t = bidirectional_example(0.1);
  const SeriesBundle tight = build_series(spec_t, tied(spec_t), small(), 2);
  const Manifold a = assemble_manifold(loose, 0.1);
  const Manifold b = assemble_manifold(tight, 0.1);
  CHECK(max_diff(a.W, b.W) < 1e-13);
  const Manifold c = assemble_manifold(loose, 0.05);
  CHECK(max_diff(a.W, c.W) > 1e-4);
}

TEST_CASE("conjugation residual shrinks with the truncation order") {
  const double eps = 0.02;
  const CouplingSpec spec = bidirectional_example(eps);
  SeriesSettings s = small(Exec::parallel);
  s.n_phi = 32;
  s.n_t = 128;
  const SeriesBundle b = build_series(spec, tied(spec), s, 3);
  const auto sample = b.grid().subsample(8);
  double prev = 1e9;
  for (int n = 0; n <= 3; ++n) {
    const double r = conjugation_residual(b, assemble_manifold(b, eps, n), sample, kTwoPi / 1024);
    CHECK(r < prev);
    prev = r;
  }
  const GrowthFit fit = fit_growth(b.diagnostics().sup_norms, eps);
  CHECK(fit.c3 > 0.0);
  CHECK(std::isfinite(fit.slope));
  CHECK(fit.radius == doctest::Approx(std::pow(eps, 2.0 / 3.0) / fit.c3));
}

TEST_CASE("series needs mu > 0") {
  const CouplingSpec spec = locking_example(0.0);
  PhaseConstants pc = solve_w0(spec.g);
  pc.mu = 0.0;
  CHECK_THROWS_AS(SeriesBundle(spec, pc, small()), ConfigError);
}
