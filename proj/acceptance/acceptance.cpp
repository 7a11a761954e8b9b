// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance            run all criteria
//   acceptance 3 7        run the listed criteria only
// Exit status is 0 only if every criterion that ran passed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "catsync/cat_map.hpp"
#include "catsync/errors.hpp"
#include "catsync/lyapunov.hpp"
#include "catsync/series.hpp"
#include "catsync/tangent.hpp"
#include "catsync/trees.hpp"

using namespace catsync;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Least-squares line y = a x + b.
std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  const double a = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {a, (sy - a * sx) / n};
}

QrOptions qr(int n_iter) {
  QrOptions o;
  o.n_iter = n_iter;
  o.n_transient = 500;
  o.seed = 7;
  return o;
}

PhaseConstants phase(const CouplingSpec& spec, double mu) {
  PhaseConstants pc = solve_w0(spec.g);
  pc.mu = mu;
  return pc;
}

const double kLogLambda = CatMap::get().log_lambda_plus();
constexpr double kFineDt = kTwoPi / 2048.0;

Outcome c1() {
  const auto t0 = std::chrono::steady_clock::now();
  const SpectrumRecord r = spectrum_qr(locking_example(0.0), 0.0, qr(100000));
  const double secs = seconds_since(t0);
  const double err = std::max({std::abs(r.lambda_plus - kLogLambda), std::abs(r.lambda_zero),
                               std::abs(r.lambda_minus + kLogLambda)});
  return {err <= 1e-6 && secs < 30.0,
          fmt("QR at eps=0, 1e5 iterates: (%.9f, %.2e, %.9f), max error %.2e, %.1f s", r.lambda_plus,
              r.lambda_zero, r.lambda_minus, err, secs)};
}

std::vector<SpectrumRecord> small_eps_records() {
  std::vector<SpectrumRecord> recs;
  for (double e : {0.005, 0.01, 0.02, 0.04}) recs.push_back(spectrum_qr(locking_example(e), e, qr(20000)));
  return recs;
}

Outcome c2() {
  const auto t0 = std::chrono::steady_clock::now();
  const double gamma = solve_w0(locking_example(0.0).g).gamma;
  std::vector<double> x, y;
  for (const auto& r : small_eps_records()) {
    x.push_back(r.epsilon);
    y.push_back(r.clock_exponent);
  }
  const auto [slope, icept] = linear_fit(x, y);
  const double secs = seconds_since(t0);
  const bool ok = std::abs(slope / (-kTwoPi) - 1.0) <= 0.05 && std::abs(icept) < 1e-3 &&
                  std::abs(gamma + kTwoPi) < 1e-9 && secs < 300.0;
  return {ok, fmt("Gamma=%.10f; fit of Lambda_0 over {0.005,0.01,0.02,0.04}: slope %.5f "
                  "(%.2f%% from -2pi), intercept %.2e, %.1f s",
                  gamma, slope, 100.0 * std::abs(slope / (-kTwoPi) - 1.0), icept, secs)};
}

Outcome c3() {
  double worst = 0.0;
  for (double e : {0.02, 0.05, 0.1}) {
    const SpectrumRecord r = spectrum_qr(locking_example(e), e, qr(20000));
    worst = std::max({worst, std::abs(r.lambda_plus - kLogLambda),
                      std::abs(r.lambda_minus + kLogLambda)});
  }
  return {worst <= 1e-4, fmt("f=0, eps in {0.02,0.05,0.1}: max |Lambda_pm -+ log lambda_+| = %.2e",
                             worst)};
}

Outcome c4() {
  const CouplingSpec spec = locking_example(0.0);
  SweepOptions opt;
  opt.method = SpectrumMethod::qr_direct;
  opt.qr = qr(20000);
  opt.tol = 2e-3;
  std::vector<double> grid;
  for (int k = 0; k <= 5; ++k) grid.push_back(0.10 + 0.02 * k);
  const SweepResult r = find_epsilon_c(spec, grid, opt);
  const double closed = r.closed_form.value_or(NAN);
  const bool ok = r.epsilon_c && std::abs(*r.epsilon_c - 0.153) <= 0.01 &&
                  std::abs(closed - 0.15317) < 5e-6;
  return {ok, fmt("QR detection eps_c = %.5f (target 0.153 +- 0.01); closed form log(lambda_+)/(-Gamma) "
                  "= %.6f (target 0.15317)",
                  r.epsilon_c.value_or(NAN), closed)};
}

Outcome c5() {
  const double eps = 0.02;
  const CouplingSpec spec = bidirectional_example(eps);
  SeriesSettings s;
  s.n_phi = 64;
  s.n_t = 256;
  const SeriesBundle b = build_series(spec, phase(spec, eps), s, 3);
  const auto sample = b.grid().subsample(16);
  const double r2 = conjugation_residual(b, assemble_manifold(b, eps, 2), sample, kFineDt);
  const double r3 = conjugation_residual(b, assemble_manifold(b, eps, 3), sample, kFineDt);
  const double budget = 1e3 * std::pow(eps, 4) + 1e-6;
  const double ratio = r2 / r3;
  const bool ok = r3 <= budget && ratio >= 0.1 / eps && ratio <= 10.0 / eps;
  return {ok, fmt("bidirectional coupling, eps=0.02, 16x16 sample: residual n=3 %.3e (budget %.3e), "
                  "n=2/n=3 ratio %.1f (1/eps=%.0f)",
                  r3, budget, ratio, 1.0 / eps)};
}

Outcome c6() {
  const double eps = 0.02;
  std::string detail;
  bool ok = true;
  for (int which = 0; which < 2; ++which) {
    const CouplingSpec spec = which == 0 ? locking_example(eps) : bidirectional_example(eps);
    SeriesSettings s;
    s.n_phi = 64;
    s.n_t = 256;
    const SeriesBundle b = build_series(spec, phase(spec, eps), s, 3);
    const MSeries ms = m_series(b, 3);
    const TangentFrame fr = build_frame(ms, b.grid(), 3, b.hyperbolic_sum());
    const auto sample = b.grid().subsample(16);
    const double r2 = tangent_residual(b, fr, assemble_manifold(b, eps, 2), sample, kFineDt, 2);
    const double r3 = tangent_residual(b, fr, assemble_manifold(b, eps, 3), sample, kFineDt, 3);
    const double budget = 1e3 * std::pow(eps, 4) + 1e-6;
    const double ratio = r2 / r3;
    ok = ok && r3 <= budget && ratio >= 0.1 / eps && ratio <= 10.0 / eps;
    detail += fmt("%s: n=3 %.3e (budget %.3e), n=2/n=3 ratio %.1f; ", which == 0 ? "f=0" : "f!=0",
                  r3, budget, ratio);
  }
  return {ok, "tangent residual at eps=0.02, 16x16 sample: " + detail};
}

Outcome c7() {
  const double eps = 0.02;
  const CouplingSpec spec = bidirectional_example(eps);
  SeriesSettings s;
  s.n_phi = 20;
  s.n_t = 64;
  s.exec = Exec::serial;
  const SeriesBundle b = build_series(spec, phase(spec, eps), s, 3);
  const TreeContext ctx{b};
  const auto sample = b.grid().subsample(5);
  const int nt = s.n_t;
  double worst = 0.0, scale = 0.0;
  for (int n = 1; n <= 3; ++n) {
    const SeriesOrder& o = b.at(n);
    auto timed = [&](const GridFunction& tree, const GridFunction& ref) {
      for (int p : sample)
        for (int k = 0; k <= nt; ++k) {
          worst = std::max(worst, std::abs(tree(p, k) - ref(p, k)));
          scale = std::max(scale, std::abs(ref(p, k)));
        }
    };
    auto flat = [&](const GridFunction& tree, const PhiFunction& ref) {
      for (int p : sample) {
        worst = std::max(worst, std::abs(tree(p, 0) - ref[p]));
        scale = std::max(scale, std::abs(ref[p]));
      }
    };
    timed(sum_theta_star(n, 0, std::nullopt, ctx), o.xi);
    flat(sum_theta_star(n, 1, std::nullopt, ctx), o.U);
    timed(sum_theta_star(n, 2, 1, ctx), o.a_plus);
    timed(sum_theta_star(n, 2, -1, ctx), o.a_minus);
    flat(sum_theta_star(n, 3, 1, ctx), o.h_plus);
    flat(sum_theta_star(n, 3, -1, ctx), o.h_minus);
  }
  // Tangent trees against the frame recursion, and explicit m-label sums.
  const MSeries ms = m_series(b, 3);
  const TangentFrame fr = build_frame(ms, b.grid(), 3, b.hyperbolic_sum());
  double worst_tan = 0.0, worst_lab = 0.0;
  for (int n = 1; n <= 3; ++n)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const auto trees = enumerate_theta_starstar(n, i == j ? NodeType::N : NodeType::K, i, j);
        PhiFunction acc(b.grid().size(), 0.0);
        for (const auto& t : trees) {
          const PhiFunction v = eval_tangent_tree(t, ms, b.grid(), b.hyperbolic_sum());
          for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += v[p];
          if (n <= 2)
            for (int p : sample)
              worst_lab = std::max(worst_lab, std::abs(eval_tangent_tree_labels(t, ms, b.grid(), p,
                                                                                 s.m_sum) - v[p]));
        }
        for (int p : sample) {
          const double ref = i == j ? fr.nu[n - 1][i][p] : fr.K[n - 1][p](i, j);
          worst_tan = std::max(worst_tan, std::abs(acc[p] - ref));
        }
      }
  // Figure counts: one tree per target at n=1; 2, 2, 4, 4 at n=2.
  bool counts = true;
  const std::size_t expect[2][4] = {{1, 1, 1, 1}, {2, 2, 4, 4}};
  for (int n = 1; n <= 2; ++n)
    for (int eta = 0; eta < 4; ++eta) counts = counts && enumerate_theta_star(n, eta).size() == expect[n - 1][eta];
  const auto k2 = enumerate_theta_starstar(2, NodeType::K, 0, 1);
  counts = counts && count_topologies(k2) == 3 && k2.size() == 4;
  const double tol = 1e-6;
  const bool ok = worst <= tol && worst_tan <= tol && worst_lab <= tol && counts;
  return {ok, fmt("5x5 sample, n<=3: manifold trees %.2e (coefficient scale %.2f), tangent trees %.2e, "
                  "m-label sums %.2e; counts n=1 (1,1,1,1) n=2 (2,2,4,4) and K01 n=2 3 topologies: %s",
                  worst, scale, worst_tan, worst_lab, counts ? "match" : "MISMATCH")};
}

Outcome c8() {
  const LemmaReport rep = certify_lemma21(5);
  const DecoratedTree t = saturating_tree(3);
  const int n11 = count_internal_type1(t);
  const bool sat = rep.saturating_orders == std::vector<int>{2, 5};
  const bool ok = rep.all_pass && sat && t.order() == 11 && n11 == 7 && satisfies_star_constraint(t);
  std::string orders;
  for (int n : rep.saturating_orders) orders += (orders.empty() ? "" : ",") + std::to_string(n);
  int total = 0;
  for (const auto& r : rep.rows) total += r.trees;
  return {ok, fmt("%d trees up to n=5, %s; saturation at n in {%s}; constructed tree order %d has "
                  "N_i^1=%d",
                  total, rep.all_pass ? "no violation" : "VIOLATION", orders.c_str(), t.order(), n11)};
}

Outcome c9() {
  SweepOptions exact;
  exact.method = SpectrumMethod::perturbative;
  const SpectrumRecord r0 = spectrum_at(locking_example(0.0), 0.0, exact);
  const SpectrumRecord q0 = spectrum_qr(locking_example(0.0), 0.0, qr(20000));
  std::vector<double> x, y;
  for (const auto& r : small_eps_records()) {
    x.push_back(r.epsilon);
    y.push_back(r.dimension);
  }
  const double target = solve_w0(locking_example(0.0).g).gamma / kLogLambda;
  const double slope = linear_fit(x, y).first;
  const bool ok = r0.dimension == 3.0 && std::abs(q0.dimension - 3.0) < 1e-9 &&
                  std::abs(slope / target - 1.0) <= 0.10;
  return {ok, fmt("D_L(0) = %.17g (QR: %.12f); dD_L/deps fitted over {0.005..0.04} = %.4f vs "
                  "Gamma/log(lambda_+) = %.4f (%.2f%%)",
                  r0.dimension, q0.dimension, slope, target, 100.0 * std::abs(slope / target - 1.0))};
}

Outcome c10() {
  std::vector<double> iqr;
  std::string vals;
  for (double e : {0.05, 0.1, 0.153, 1.0}) {
    const auto pts = attractor_cloud(locking_example(e), e, 20000, 1000, 11);
    std::vector<double> w;
    for (const auto& s : pts) w.push_back(s.w);
    std::sort(w.begin(), w.end());
    const double v = w[3 * w.size() / 4] - w[w.size() / 4];
    iqr.push_back(v);
    vals += fmt("%s%.4f", vals.empty() ? "" : ", ", v);
  }
  bool dec = true;
  for (std::size_t k = 1; k < iqr.size(); ++k) dec = dec && iqr[k] < iqr[k - 1];
  return {dec, "IQR of w at eps = 0.05, 0.1, 0.153, 1: (" + vals + "); strictly decreasing: " +
                   (dec ? "yes" : "no")};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {"unperturbed spectrum", c1},     {"central exponent law", c2},
      {"longitudinal exponents", c3},   {"critical coupling", c4},
      {"conjugation residual", c5},     {"tangent conjugation residual", c6},
      {"tree-oracle equivalence", c7},  {"combinatorial bound certification", c8},
      {"Lyapunov dimension", c9},       {"w-dispersion across coupling", c10}};
  std::vector<int> which;
  for (int a = 1; a < argc; ++a) which.push_back(std::stoi(argv[a]));
  if (which.empty())
    for (int k = 1; k <= 10; ++k) which.push_back(k);
  bool all_ok = true;
  for (int k : which) {
    if (k < 1 || k > 10) {
      std::fprintf(stderr, "no criterion %d\n", k);
      return 2;
    }
    Outcome o;
    try {
      o = all[k - 1].run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", k, all[k - 1].name, o.detail.c_str());
    std::fflush(stdout);
    all_ok = all_ok && o.pass;
  }
  return all_ok ? 0 : 1;
}
