#include "catsync/series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "catsync/dynamics.hpp"
#include "catsync/errors.hpp"

namespace catsync {

double gamma_bar0(const TrigPoly& g, const TorusPoint& phi, double w) {
  const TorusPoint s = apply_cat(phi);
  return g.integrate_along_clock(s.phi[0], s.phi[1], w, 0.0, kTwoPi);
}

double gamma_bar1(const TrigPoly& g, const TorusPoint& phi, double w) {
  const TorusPoint s = apply_cat(phi);
  return g.d_w().integrate_along_clock(s.phi[0], s.phi[1], w, 0.0, kTwoPi);
}

double gamma_envelope(const TrigPoly& g, double w0, double t, double tau,
                      const TorusPoint& phi) {
  if (!(0.0 <= tau && tau <= t && t <= kTwoPi))
    throw ConfigError("gamma_envelope: requires 0 <= tau <= t <= 2*pi");
  const TorusPoint s = apply_cat(phi);
  return g.d_w().integrate_along_clock(s.phi[0], s.phi[1], w0, tau, t);
}

namespace {

struct PhiAverager {
  const TrigPoly& g;
  TrigPoly dg;
  std::vector<TorusPoint> images;  // Sφ on the grid

  PhiAverager(const TrigPoly& poly, int n) : g(poly), dg(poly.d_w()) {
    const TorusGrid grid(n);
    images.reserve(grid.size());
    for (int p = 0; p < grid.size(); ++p) images.push_back(apply_cat(grid.point(p)));
  }

  double mean(const TrigPoly& f, double w) const {
    double acc = 0.0;
    for (const auto& s : images)
      acc += f.integrate_along_clock(s.phi[0], s.phi[1], w, 0.0, kTwoPi);
    return acc / images.size();
  }

  double max_dev(const TrigPoly& f, double w, double ref) const {
    double m = 0.0;
    for (const auto& s : images)
      m = std::max(m, std::abs(f.integrate_along_clock(s.phi[0], s.phi[1], w, 0.0, kTwoPi) - ref));
    return m;
  }
};

}  // namespace

PhaseConstants solve_w0(const TrigPoly& g, const PhaseOptions& opt) {
  if (opt.scan_points < 2 || opt.n_phi < 1)
    throw ConfigError("solve_w0: scan_points >= 2 and n_phi >= 1 required");
  const PhiAverager avg(g, opt.n_phi);
  const int ns = opt.scan_points;
  const double dw = kTwoPi / ns;
  std::vector<double> vals(ns + 1);
  for (int k = 0; k <= ns; ++k) vals[k] = avg.mean(g, k * dw);

  std::vector<double> found;
  auto add_root = [&](double w) {
    w = wrap_angle(w);
    for (double r : found)
      if (std::abs(angle_delta(w, r)) < 1e-9) return;
    found.push_back(w);
  };
  for (int k = 0; k < ns; ++k) {
    const double a = vals[k];
    const double b = vals[k + 1];
    if (std::abs(a) <= opt.tol_root) {
      add_root(k * dw);
      continue;
    }
    if (std::abs(b) <= opt.tol_root || (a > 0) == (b > 0)) continue;
    double lo = k * dw;
    double hi = lo + dw;
    double flo = a;
    while (hi - lo > 1e-12) {
      const double mid = 0.5 * (lo + hi);
      const double fm = avg.mean(g, mid);
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((fm > 0) == (flo > 0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    add_root(0.5 * (lo + hi));
  }

  PhaseConstants out;
  for (double w : found) {
    const double gam = avg.mean(avg.dg, w);
    out.roots.push_back({w, gam, gam < -opt.tol_root});
  }
  std::sort(out.roots.begin(), out.roots.end(),
            [](const PhaseRoot& a, const PhaseRoot& b) { return a.w0 < b.w0; });

  const PhaseRoot* best = nullptr;
  for (const auto& r : out.roots)
    if (r.admissible && (!best || r.gamma < best->gamma)) best = &r;
  if (!best)
    throw HypothesisError(HypothesisError::Kind::NoRoot,
                          "no phase w0 with vanishing mean drift and negative "
                          "dissipation rate (" +
                              std::to_string(out.roots.size()) + " zero(s) found)");
  out.w0 = best->w0;
  out.gamma = best->gamma;
  out.phi_spread0 = avg.max_dev(g, out.w0, 0.0);
  out.phi_spread1 = avg.max_dev(avg.dg, out.w0, out.gamma);
  if (out.phi_spread0 > opt.tol_phi || out.phi_spread1 > opt.tol_phi)
    throw HypothesisError(HypothesisError::Kind::PhiDependent,
                          "averaged drift or dissipation depends on phi at w0 (spread " +
                              std::to_string(std::max(out.phi_spread0, out.phi_spread1)) +
                              ")");
  return out;
}

double SeriesOrder::sup_norm() const {
  return std::max({xi.sup_norm(), a_plus.sup_norm(), a_minus.sup_norm(),
                   catsync::sup_norm(U), catsync::sup_norm(h_plus),
                   catsync::sup_norm(h_minus)});
}

SeriesBundle::SeriesBundle(CouplingSpec spec, PhaseConstants constants,
                           SeriesSettings settings)
    : spec_(std::move(spec)),
      constants_(std::move(constants)),
      settings_(settings),
      grid_(settings.n_phi),
      times_(settings.n_t) {
  if (!(constants_.mu > 0.0) || !std::isfinite(constants_.mu))
    throw ConfigError("series: mu must be positive");
  if (settings_.m_sum < 1) throw ConfigError("series: m_sum must be positive");
  const TrigPoly dg = spec_.g.d_w();
  decay_ = GridFunction(grid_.size(), times_.nt);
  for (int p = 0; p < grid_.size(); ++p) {
    const TorusPoint s = apply_cat(grid_.point(p));
    double* row = decay_.row(p);
    for (int k = 0; k <= times_.nt; ++k)
      row[k] = std::exp(constants_.mu *
                        dg.integrate_along_clock(s.phi[0], s.phi[1], constants_.w0, 0.0,
                                                 times_.t(k)));
  }
}

const SeriesOrder& SeriesBundle::at(int n) const {
  if (n < 1 || n > order())
    throw MissingOrder("series: order " + std::to_string(n) + " not computed");
  return orders_[n - 1];
}

double SeriesBundle::lambda_clock() const {
  return std::exp(constants_.mu * constants_.gamma);
}

void SeriesBundle::displacements(int p, int k, int n,
                                 std::array<std::vector<double>, 3>& d) const {
  const CatMap& cat = CatMap::get();
  for (auto& v : d) v.assign(n + 1, 0.0);
  const double e = decay_(p, k);
  for (int j = 1; j <= n; ++j) {
    const SeriesOrder& o = at(j);
    d[0][j] = cat.lambda_plus * o.h_plus[p] + o.a_plus(p, k);
    d[1][j] = cat.lambda_minus * o.h_minus[p] + o.a_minus(p, k);
    d[2][j] = e * o.U[p] + o.xi(p, k);
  }
}

void displacement_powers(const std::array<std::vector<double>, 3>& d, int kmax,
                         const std::vector<MultiIndex>& indices, double* out) {
  const int w = kmax + 1;
  // pw[a][e * w + j]: coefficient of ε^j in D_a^e
  std::array<std::vector<double>, 3> pw;
  for (int a = 0; a < 3; ++a) {
    auto& P = pw[a];
    P.assign(static_cast<std::size_t>(w) * w, 0.0);
    P[0] = 1.0;
    for (int e = 1; e <= kmax; ++e)
      for (int j = e; j <= kmax; ++j) {
        double acc = 0.0;
        for (int l = 1; l <= j - e + 1; ++l)
          if (l < static_cast<int>(d[a].size())) acc += d[a][l] * P[(e - 1) * w + j - l];
        P[e * w + j] = acc;
      }
  }
  const std::size_t nq = indices.size();
  for (int k = 0; k <= kmax; ++k)
    for (std::size_t qi = 0; qi < nq; ++qi) {
      const MultiIndex& q = indices[qi];
      double acc = 0.0;
      if (q.order() <= k) {
        for (int j1 = q.plus; j1 <= k; ++j1)
          for (int j2 = q.minus; j1 + j2 <= k; ++j2) {
            const int j3 = k - j1 - j2;
            if (j3 < q.clock) continue;
            acc += pw[0][q.plus * w + j1] * pw[1][q.minus * w + j2] * pw[2][q.clock * w + j3];
          }
      }
      out[k * nq + qi] = acc;
    }
}

namespace {

SeriesOrder compute_order(int n, const SeriesBundle& b) {
  if (n < 1) throw MissingOrder("series: order must be >= 1");
  if (b.order() < n - 1)
    throw MissingOrder("series: order " + std::to_string(n) + " needs orders 1.." +
                       std::to_string(n - 1));
  const CatMap& cat = CatMap::get();
  const TorusGrid& grid = b.grid();
  const int nt = b.times().nt;
  const double h = b.times().step();
  const double w0 = b.constants().w0;
  const int K = n - 1;
  const std::vector<MultiIndex> idx = multi_indices_up_to(K);
  const std::size_t nq = idx.size();
  const auto& spec = b.spec();
  const bool has_f = !spec.f_is_zero();

  SeriesOrder out;
  out.xi = GridFunction(grid.size(), nt);
  out.a_plus = GridFunction(grid.size(), nt);
  out.a_minus = GridFunction(grid.size(), nt);

  const bool parallel = b.settings().exec == Exec::parallel;
#pragma omp parallel for schedule(dynamic, 4) if (parallel)
  for (int p = 0; p < grid.size(); ++p) {
    std::array<std::vector<double>, 3> d;
    std::vector<double> tg(nq), tf1(nq), tf2(nq), C((K + 1) * nq);
    std::vector<double> sg(nt + 1), sfp(nt + 1), sfm(nt + 1), cum(nt + 1);
    const TorusPoint s = apply_cat(grid.point(p));
    const double* decay = b.clock_decay().row(p);
    for (int k = 0; k <= nt; ++k) {
      const double t = k * h;
      std::fill(tg.begin(), tg.end(), 0.0);
      spec.g.accumulate_taylor(s.phi[0], s.phi[1], w0 + t, t, idx, tg.data());
      if (has_f) {
        std::fill(tf1.begin(), tf1.end(), 0.0);
        std::fill(tf2.begin(), tf2.end(), 0.0);
        spec.f1.accumulate_taylor(s.phi[0], s.phi[1], w0 + t, t, idx, tf1.data());
        spec.f2.accumulate_taylor(s.phi[0], s.phi[1], w0 + t, t, idx, tf2.data());
      }
      if (K == 0) {
        C[0] = 1.0;
      } else {
        b.displacements(p, k, K, d);
        displacement_powers(d, K, idx, C.data());
      }
      const double* c = C.data() + K * nq;
      double g_src = 0.0, fp = 0.0, fm = 0.0;
      for (std::size_t qi = 0; qi < nq; ++qi) {
        const MultiIndex& q = idx[qi];
        if (!(q.plus == 0 && q.minus == 0 && q.clock == 1)) g_src += tg[qi] * c[qi];
        if (has_f) {
          fp += (cat.x_plus[0] * tf1[qi] + cat.x_plus[1] * tf2[qi]) * c[qi];
          fm += (cat.x_minus[0] * tf1[qi] + cat.x_minus[1] * tf2[qi]) * c[qi];
        }
      }
      sg[k] = g_src / decay[k];
      sfp[k] = fp;
      sfm[k] = fm;
    }
    cumulative_simpson(sg.data(), cum.data(), nt, h);
    double* xi = out.xi.row(p);
    for (int k = 0; k <= nt; ++k) xi[k] = decay[k] * cum[k];
    if (has_f) {
      cumulative_simpson(sfp.data(), out.a_plus.row(p), nt, h);
      cumulative_simpson(sfm.data(), out.a_minus.row(p), nt, h);
    }
  }

  const PhiFunction ru = out.xi.at_end();
  const PhiFunction rp = out.a_plus.at_end();
  const PhiFunction rm = out.a_minus.at_end();
  out.U = backward_orbit_sum(grid, b.lambda_clock(), ru, b.clock_sum());
  out.h_plus = forward_orbit_sum(grid, 1.0 / cat.lambda_plus, rp, b.hyperbolic_sum());
  for (double& v : out.h_plus) v *= -1.0 / cat.lambda_plus;
  out.h_minus = backward_orbit_sum(grid, cat.lambda_minus, rm, b.hyperbolic_sum());
  return out;
}

}  // namespace

SeriesOrder first_order(const SeriesBundle& bundle) { return compute_order(1, bundle); }

SeriesOrder higher_order(int n, const SeriesBundle& bundle) {
  if (n < 2) throw MissingOrder("higher_order: n must be >= 2");
  return compute_order(n, bundle);
}

SeriesBundle build_series(const CouplingSpec& spec, const PhaseConstants& constants,
                          const SeriesSettings& settings, int n_max) {
  if (n_max < 1) throw ConfigError("series: n_max must be >= 1");
  SeriesBundle b(spec, constants, settings);
  b.append(first_order(b));
  for (int n = 2; n <= n_max; ++n) b.append(higher_order(n, b));
  return b;
}

SeriesDiagnostics SeriesBundle::diagnostics() const {
  const CatMap& cat = CatMap::get();
  SeriesDiagnostics d;
  d.tail_bound = std::pow(cat.lambda_plus, -settings_.m_sum);
  const double lam = lambda_clock();
  for (const auto& o : orders_) {
    d.sup_norms.push_back(o.sup_norm());
    double r = 0.0;
    for (int p = 0; p < grid_.size(); ++p) {
      const int sp = grid_.forward(p);
      const int nt = times_.nt;
      r = std::max(r, std::abs(o.U[sp] - lam * o.U[p] - o.xi(p, nt)));
      r = std::max(r, std::abs(o.h_plus[sp] - cat.lambda_plus * o.h_plus[p] - o.a_plus(p, nt)));
      r = std::max(r, std::abs(o.h_minus[sp] - cat.lambda_minus * o.h_minus[p] - o.a_minus(p, nt)));
    }
    d.cohomology_residual.push_back(r);
  }
  return d;
}

GrowthFit fit_growth(const std::vector<double>& sup_norms, double mu) {
  GrowthFit fit;
  std::vector<double> xs, ys;
  double logc = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sup_norms.size(); ++i) {
    if (!(sup_norms[i] > 0.0)) continue;
    const int n = static_cast<int>(i) + 1;
    const double y = std::log(sup_norms[i]) + ((2 * n - 1) / 3) * std::log(mu);
    xs.push_back(n);
    ys.push_back(y);
    logc = std::max(logc, y / n);
  }
  if (xs.empty()) return fit;
  fit.c3 = std::exp(logc);
  if (xs.size() >= 2) {
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    fit.slope = sxy / sxx;
  }
  fit.radius = std::pow(mu, 2.0 / 3.0) / fit.c3;
  return fit;
}

Manifold assemble_manifold(const SeriesBundle& bundle, double epsilon, int n_max) {
  if (epsilon < 0.0) throw ConfigError("assemble_manifold: epsilon must be >= 0");
  if (n_max < 0) n_max = bundle.order();
  if (n_max > bundle.order())
    throw MissingOrder("assemble_manifold: order " + std::to_string(n_max) + " not computed");
  const CatMap& cat = CatMap::get();
  const TorusGrid& grid = bundle.grid();
  Manifold m;
  m.epsilon = epsilon;
  m.H.resize(grid.size());
  m.W.assign(grid.size(), bundle.constants().w0);
  for (int p = 0; p < grid.size(); ++p) {
    const TorusPoint base = grid.point(p);
    double x1 = base.phi[0], x2 = base.phi[1];
    double en = 1.0;
    for (int n = 1; n <= n_max; ++n) {
      en *= epsilon;
      const SeriesOrder& o = bundle.at(n);
      x1 += en * (o.h_plus[p] * cat.x_plus[0] + o.h_minus[p] * cat.x_minus[0]);
      x2 += en * (o.h_plus[p] * cat.x_plus[1] + o.h_minus[p] * cat.x_minus[1]);
      m.W[p] += en * o.U[p];
    }
    m.H[p] = TorusPoint(x1, x2);
  }
  const GrowthFit fit = fit_growth(bundle.diagnostics().sup_norms, bundle.constants().mu);
  m.heuristic_radius = fit.radius;
  m.radius_warning = epsilon > fit.radius;
  return m;
}

double conjugation_residual(const SeriesBundle& bundle, const Manifold& m,
                            const std::vector<int>& sample, double dt) {
  const CouplingSpec spec = bundle.spec().with_epsilon(m.epsilon);
  const TorusGrid& grid = bundle.grid();
  double worst = 0.0;
  for (int p : sample) {
    const FullState s{m.H[p].phi[0], m.H[p].phi[1], m.W[p]};
    const FullState img = poincare_map(s.reduced(), spec, dt);
    const int sp = grid.forward(p);
    worst = std::max({worst, std::abs(angle_delta(img.x1, m.H[sp].phi[0])),
                      std::abs(angle_delta(img.x2, m.H[sp].phi[1])),
                      std::abs(angle_delta(img.w, m.W[sp]))});
  }
  return worst;
}

}  // namespace catsync
