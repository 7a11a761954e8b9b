#include "catsync/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "catsync/cache.hpp"
#include "catsync/errors.hpp"
#include "catsync/lyapunov.hpp"
#include "catsync/series.hpp"
#include "catsync/tangent.hpp"
#include "catsync/trees.hpp"

namespace catsync {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Output {
 public:
  Output(const RunConfig& c, std::string command) : dir_(c.output_dir) {
    m_.command = std::move(command);
    m_.config_hash = config_hash(c);
    fs::create_directories(dir_);
    start_ = std::chrono::steady_clock::now();
    write("config.yaml", write_config(c));
  }

  void write(const std::string& rel, const std::string& text) {
    const fs::path p = dir_ / rel;
    fs::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ConfigError("output: cannot write " + p.string());
    os << text;
    m_.files.push_back({rel, sha256_hex(text)});
  }

  void list_binary(const std::string& rel) {
    std::ifstream is(dir_ / rel, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    m_.files.push_back({rel, sha256_hex(ss.str())});
  }

  void note(std::string n) { m_.notes.push_back(std::move(n)); }
  const fs::path& dir() const { return dir_; }

  ResultManifest finish(const ojson& diagnostics) {
    m_.wall_clock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    m_.diagnostics_json = diagnostics.dump();
    std::ofstream os(dir_ / "manifest.json", std::ios::binary);
    os << m_.to_json();
    return m_;
  }

 private:
  fs::path dir_;
  ResultManifest m_;
  std::chrono::steady_clock::time_point start_;
};

SeriesSettings series_settings(const RunConfig& c) {
  SeriesSettings s;
  s.n_phi = c.n_phi;
  s.n_t = c.n_t;
  s.m_sum = c.m_sum;
  s.exec = Exec::parallel;
  return s;
}

PhaseConstants phase_for(const RunConfig& c) {
  PhaseOptions po;
  po.n_phi = c.n_phi;
  PhaseConstants pc = solve_w0(c.coupling.g, po);
  return pc;
}

std::vector<int> residual_sample(const TorusGrid& grid) {
  for (int m = std::min(16, grid.n()); m >= 1; --m)
    if (grid.n() % m == 0) return grid.subsample(m);
  return {0};
}

std::string phi_csv(const TorusGrid& grid, const std::vector<std::string>& names,
                    const std::vector<const PhiFunction*>& cols) {
  std::ostringstream os;
  os << "phi1,phi2";
  for (const auto& n : names) os << ',' << n;
  os << '\n';
  for (int p = 0; p < grid.size(); ++p) {
    const TorusPoint x = grid.point(p);
    os << num(x.phi[0]) << ',' << num(x.phi[1]);
    for (const PhiFunction* c : cols) os << ',' << num((*c)[p]);
    os << '\n';
  }
  return os.str();
}

SweepOptions sweep_options(const RunConfig& c, SpectrumMethod m) {
  SweepOptions o;
  o.method = m;
  o.qr.n_iter = c.n_iter;
  o.qr.n_transient = c.n_transient;
  o.qr.dt = c.dt;
  o.qr.seed = c.seed;
  o.series = series_settings(c);
  o.n_max = c.n_max;
  o.tol = c.tol;
  o.exec = Exec::parallel;
  return o;
}

}  // namespace

std::string ResultManifest::data_hash() const {
  std::string all;
  // config.yaml carries the output location and is covered by config_hash
  for (const auto& f : files)
    if (f.path != "config.yaml") all += f.path + ":" + f.sha256 + "\n";
  return sha256_hex(all);
}

std::string ResultManifest::to_json() const {
  ojson j;
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["data_hash"] = data_hash();
  j["module_versions"] = {{"core-dynamics", kVersion},     {"perturbation-series", kVersion},
                          {"tree-expansion", kVersion},    {"tangent-conjugation", kVersion},
                          {"lyapunov", kVersion},          {"cli", kVersion}};
  ojson fl = ojson::array();
  for (const auto& f : files) fl.push_back({{"path", f.path}, {"sha256", f.sha256}});
  j["files"] = fl;
  j["wall_clock_s"] = wall_clock_s;
  j["diagnostics"] = ojson::parse(diagnostics_json);
  j["notes"] = notes;
  return j.dump(2) + "\n";
}

ResultManifest cmd_simulate(const RunConfig& c) {
  c.coupling.validate();
  Output out(c, "simulate");
  const auto pts =
      attractor_cloud(c.coupling, c.coupling.epsilon, c.n_points, c.n_transient, c.seed, c.dt);
  std::ostringstream os;
  os << "x1,x2,w\n";
  std::vector<double> w;
  for (const FullState& s : pts) {
    os << num(s.x1) << ',' << num(s.x2) << ',' << num(s.w) << '\n';
    w.push_back(s.w);
  }
  out.write("attractor.csv", os.str());
  ojson d;
  d["epsilon"] = c.coupling.epsilon;
  d["n_points"] = pts.size();
  if (!w.empty()) {
    std::sort(w.begin(), w.end());
    auto q = [&](double f) { return w[static_cast<std::size_t>(f * (w.size() - 1))]; };
    d["w_median"] = q(0.5);
    d["w_iqr"] = q(0.75) - q(0.25);
  }
  out.write("summary.json", d.dump(2) + "\n");
  return out.finish(d);
}

ResultManifest cmd_spectrum(const RunConfig& c) {
  c.coupling.validate();
  Output out(c, "spectrum");
  std::vector<SpectrumMethod> methods;
  if (c.method == "both") {
    methods = {SpectrumMethod::qr_direct, SpectrumMethod::perturbative};
  } else {
    methods = {parse_method(c.method)};
  }
  ojson d;
  if (c.sweep.empty()) {
    ojson j;
    std::vector<SpectrumRecord> recs;
    for (SpectrumMethod m : methods) {
      recs.push_back(spectrum_at(c.coupling, c.coupling.epsilon, sweep_options(c, m)));
      j[to_string(m)] = ojson::parse(record_json(recs.back()));
    }
    if (recs.size() == 2) {
      j["agreement"] = {
          {"max_abs_diff",
           std::max({std::abs(recs[0].lambda_plus - recs[1].lambda_plus),
                     std::abs(recs[0].lambda_zero - recs[1].lambda_zero),
                     std::abs(recs[0].lambda_minus - recs[1].lambda_minus)})},
          {"qr_stderr_max", std::max({recs[0].stderr_[0], recs[0].stderr_[1], recs[0].stderr_[2]})}};
    }
    out.write("spectrum.json", j.dump(2) + "\n");
    d = j;
  } else {
    for (SpectrumMethod m : methods) {
      const SweepOptions opt = sweep_options(c, m);
      SweepResult r;
      if (c.find_epsilon_c) {
        try {
          r = find_epsilon_c(c.coupling, c.sweep, opt);
        } catch (const NumericalError& e) {
          if (e.kind() != NumericalError::Kind::NoBracket) throw;
          r.records = sweep(c.coupling, c.sweep, opt);
          out.note(std::string(to_string(m)) + ": " + e.what());
        }
      } else {
        r.records = sweep(c.coupling, c.sweep, opt);
      }
      const std::string tag = methods.size() > 1 ? "_" + to_string(m) : "";
      out.write("sweep" + tag + ".csv", sweep_csv(r));
      ojson j;
      j["method"] = to_string(m);
      j["epsilon_c"] = r.epsilon_c ? ojson(*r.epsilon_c) : ojson(nullptr);
      j["closed_form"] = r.closed_form ? ojson(*r.closed_form) : ojson(nullptr);
      ojson refine = ojson::array();
      for (const auto& x : r.refinement)
        refine.push_back({{"epsilon", x.epsilon}, {"gap", x.transverse_gap}});
      j["refinement"] = refine;
      out.write("sweep" + tag + ".json", j.dump(2) + "\n");
      d[to_string(m)] = j;
    }
  }
  return out.finish(d);
}

ResultManifest cmd_series(const RunConfig& c) {
  c.coupling.validate();
  if (!(c.coupling.epsilon > 0.0))
    throw ConfigError("coupling.epsilon: the series needs epsilon > 0 (mu is tied to epsilon)");
  Output out(c, "series");
  PhaseConstants pc = phase_for(c);
  pc.mu = c.coupling.epsilon;
  const SeriesSettings st = series_settings(c);
  const double eps = c.coupling.epsilon;

  const std::string key = cache_key(c.coupling, st, c.n_max);
  const std::string cache_rel = "cache/run-" + key.substr(0, 16) + ".bin";
  fs::create_directories(out.dir() / "cache");
  std::optional<CachedRun> run = load_run((out.dir() / cache_rel).string(), key, c.coupling, pc, st);
  const bool hit = run.has_value();
  if (!hit) {
    SeriesBundle b = build_series(c.coupling, pc, st, c.n_max);
    MSeries ms = m_series(b, c.n_max);
    TangentFrame fr = build_frame(ms, b.grid(), c.n_max, b.hyperbolic_sum());
    run.emplace(CachedRun{std::move(b), std::move(ms), std::move(fr)});
    save_run((out.dir() / cache_rel).string(), key, *run);
  }
  out.note(hit ? "cache hit: " + cache_rel : "cache miss: " + cache_rel + " written");
  const SeriesBundle& b = run->bundle;
  const TorusGrid& grid = b.grid();

  ojson rep;
  rep["w0"] = pc.w0;
  rep["Gamma"] = pc.gamma;
  rep["mu"] = pc.mu;
  ojson roots = ojson::array();
  for (const auto& r : pc.roots)
    roots.push_back({{"w0", r.w0}, {"Gamma", r.gamma}, {"admissible", r.admissible}});
  rep["roots"] = roots;
  rep["phi_spread"] = {pc.phi_spread0, pc.phi_spread1};
  const SeriesDiagnostics diag = b.diagnostics();
  rep["tail_bound"] = diag.tail_bound;
  rep["interpolation_error"] = diag.interpolation_error;
  rep["cohomology_residual"] = diag.cohomology_residual;
  const GrowthFit fit = fit_growth(diag.sup_norms, pc.mu);
  rep["growth"] = {{"C3", fit.c3}, {"slope", fit.slope}, {"radius", fit.radius}};

  // Per-order sup norms.
  std::ostringstream sn;
  sn << "order,xi,U,a_plus,a_minus,h_plus,h_minus\n";
  for (int n = 1; n <= b.order(); ++n) {
    const SeriesOrder& o = b.at(n);
    sn << n << ',' << num(o.xi.sup_norm()) << ',' << num(sup_norm(o.U)) << ','
       << num(o.a_plus.sup_norm()) << ',' << num(o.a_minus.sup_norm()) << ','
       << num(sup_norm(o.h_plus)) << ',' << num(sup_norm(o.h_minus)) << '\n';
  }
  out.write("sup_norms.csv", sn.str());

  // Residuals against direct integration, per truncation order.
  const std::vector<int> sample = residual_sample(grid);
  std::ostringstream rs;
  rs << "n_max,conjugation_residual,tangent_residual\n";
  ojson res = ojson::array();
  bool warn = false;
  for (int n = 1; n <= c.n_max; ++n) {
    const Manifold m = assemble_manifold(b, eps, n);
    warn = warn || m.radius_warning;
    const double r1 = conjugation_residual(b, m, sample, c.dt);
    const double r2 = tangent_residual(b, run->frame, m, sample, c.dt, n);
    rs << n << ',' << num(r1) << ',' << num(r2) << '\n';
    res.push_back({{"n_max", n}, {"conjugation", r1}, {"tangent", r2}});
  }
  rep["residuals"] = res;
  rep["residual_sample_points"] = sample.size();
  out.write("residuals.csv", rs.str());
  if (warn) out.note("radius warning: epsilon exceeds the heuristic radius " + num(fit.radius));

  // Coefficients on the grid; identically zero families are skipped.
  auto family = [&](const std::string& name, auto get) {
    std::vector<PhiFunction> cols;
    double sup = 0.0;
    for (int n = 1; n <= b.order(); ++n) {
      cols.push_back(get(b.at(n)));
      sup = std::max(sup, sup_norm(cols.back()));
    }
    if (sup == 0.0) {
      out.note(name + " identically zero, file omitted");
      return;
    }
    std::vector<std::string> names;
    std::vector<const PhiFunction*> ptr;
    for (int n = 1; n <= b.order(); ++n) {
      names.push_back("order" + std::to_string(n));
      ptr.push_back(&cols[n - 1]);
    }
    out.write("coefficients_" + name + ".csv", phi_csv(grid, names, ptr));
  };
  family("U", [](const SeriesOrder& o) { return o.U; });
  family("xi_end", [](const SeriesOrder& o) { return o.xi.at_end(); });
  family("h_plus", [](const SeriesOrder& o) { return o.h_plus; });
  family("h_minus", [](const SeriesOrder& o) { return o.h_minus; });
  family("a_plus_end", [](const SeriesOrder& o) { return o.a_plus.at_end(); });
  family("a_minus_end", [](const SeriesOrder& o) { return o.a_minus.at_end(); });

  const Manifold m = assemble_manifold(b, eps);
  PhiFunction h1(grid.size()), h2(grid.size());
  for (int p = 0; p < grid.size(); ++p) {
    h1[p] = m.H[p].phi[0];
    h2[p] = m.H[p].phi[1];
  }
  out.write("manifold.csv", phi_csv(grid, {"H1", "H2", "W"}, {&h1, &h2, &m.W}));

  const auto lam = multipliers(run->frame, eps);
  out.write("multipliers.csv",
            phi_csv(grid, {"lambda_plus", "lambda_minus", "lambda_clock"}, {&lam[0], &lam[1], &lam[2]}));

  out.write("report.json", rep.dump(2) + "\n");
  out.list_binary(cache_rel);
  ojson d = rep;
  d["cache"] = hit ? "hit" : "miss";
  return out.finish(d);
}

ResultManifest cmd_trees(const RunConfig& c) {
  Output out(c, "trees");
  ojson d;

  const LemmaReport lemma = certify_lemma21(c.trees_n_max, c.n_enum_max);
  std::ostringstream ls;
  ls << "n,trees,max_internal_U,bound,saturated\n";
  for (const auto& r : lemma.rows)
    ls << r.n << ',' << r.trees << ',' << r.max_internal_u << ',' << num(r.bound) << ','
       << (r.saturated ? 1 : 0) << '\n';
  out.write("lemma.csv", ls.str());
  std::string summary = lemma.all_pass ? "all pass" : "violation";
  summary += "; saturation at n in {";
  for (std::size_t k = 0; k < lemma.saturating_orders.size(); ++k)
    summary += (k ? "," : "") + std::to_string(lemma.saturating_orders[k]);
  summary += "}";
  d["lemma"] = summary;

  std::ostringstream cs;
  cs << "n,root,trees,resolved_trees\n";
  const char* roots[] = {"xi", "U", "a", "h"};
  for (int n = 1; n <= c.trees_n_max; ++n)
    for (int eta = 0; eta < 4; ++eta) {
      const std::optional<int> alpha = eta >= 2 ? std::optional<int>(1) : std::nullopt;
      const auto ts = enumerate_theta_star(n, eta, alpha, c.n_enum_max);
      std::size_t resolved = 0;
      for (const auto& t : ts) resolved += resolve_alpha(t).size();
      cs << n << ',' << roots[eta] << ',' << ts.size() << ',' << resolved << '\n';
    }
  out.write("counts.csv", cs.str());

  std::ostringstream ts;
  ts << "n,root,i,j,trees,topologies\n";
  const int n_tan = std::min(c.trees_n_max, 3);
  for (int n = 1; n <= n_tan; ++n)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const NodeType eta = i == j ? NodeType::N : NodeType::K;
        const auto trees = enumerate_theta_starstar(n, eta, i, j, c.n_enum_max);
        ts << n << ',' << (i == j ? "N" : "K") << ',' << i << ',' << j << ',' << trees.size()
           << ',' << count_topologies(trees) << '\n';
      }
  out.write("tangent_counts.csv", ts.str());

  std::ostringstream ss;
  ss << "level,order,internal_U,bound\n";
  for (int k = 1; k <= 3; ++k) {
    const DecoratedTree t = saturating_tree(k);
    ss << k << ',' << t.order() << ',' << count_internal_type1(t) << ','
       << num((2.0 * t.order() - 1.0) / 3.0) << '\n';
  }
  out.write("saturating.csv", ss.str());
  d["saturating_n11_internal_U"] = count_internal_type1(saturating_tree(3));

  if (c.render) {
    for (int n = 1; n <= std::min(2, c.trees_n_max); ++n)
      for (int eta = 0; eta < 4; ++eta) {
        const auto trees = enumerate_theta_star(n, eta, std::nullopt, c.n_enum_max);
        for (std::size_t k = 0; k < trees.size(); ++k) {
          const std::string name = std::string(roots[eta]) + "_n" + std::to_string(n) + "_" +
                                   std::to_string(k);
          out.write("trees/" + name + ".dot", render_dot(trees[k], name));
        }
      }
    for (int n = 1; n <= std::min(2, c.trees_n_max); ++n) {
      const auto k01 = enumerate_theta_starstar(n, NodeType::K, 0, 1, c.n_enum_max);
      for (std::size_t k = 0; k < k01.size(); ++k) {
        const std::string name = "K01_n" + std::to_string(n) + "_" + std::to_string(k);
        out.write("trees/" + name + ".dot", render_dot(k01[k], name));
      }
    }
    out.write("trees/saturating_n11.dot", render_dot(saturating_tree(3), "saturating_n11"));
  }

  if (c.verify_trees) {
    c.coupling.validate();
    if (!(c.coupling.epsilon > 0.0))
      throw ConfigError("coupling.epsilon: tree verification needs epsilon > 0");
    PhaseConstants pc = phase_for(c);
    pc.mu = c.coupling.epsilon;
    const int n_check = std::min(3, c.n_max);
    SeriesSettings st = series_settings(c);
    const SeriesBundle b = build_series(c.coupling, pc, st, n_check);
    const TreeContext ctx{b};
    std::ostringstream vs;
    vs << "n,target,max_abs_diff\n";
    double worst = 0.0;
    for (int n = 1; n <= n_check; ++n) {
      const SeriesOrder& o = b.at(n);
      auto gdiff = [](const GridFunction& a, const GridFunction& r) {
        double m = 0.0;
        for (std::size_t i = 0; i < a.data().size(); ++i)
          m = std::max(m, std::abs(a.data()[i] - r.data()[i]));
        return m;
      };
      auto pdiff = [](const GridFunction& a, const PhiFunction& r) {
        double m = 0.0;
        for (std::size_t p = 0; p < r.size(); ++p) m = std::max(m, std::abs(a(static_cast<int>(p), 0) - r[p]));
        return m;
      };
      const std::pair<const char*, double> rows[] = {
          {"xi", gdiff(sum_theta_star(n, 0, std::nullopt, ctx), o.xi)},
          {"U", pdiff(sum_theta_star(n, 1, std::nullopt, ctx), o.U)},
          {"a_plus", gdiff(sum_theta_star(n, 2, 1, ctx), o.a_plus)},
          {"a_minus", gdiff(sum_theta_star(n, 2, -1, ctx), o.a_minus)},
          {"h_plus", pdiff(sum_theta_star(n, 3, 1, ctx), o.h_plus)},
          {"h_minus", pdiff(sum_theta_star(n, 3, -1, ctx), o.h_minus)}};
      for (const auto& [name, v] : rows) {
        vs << n << ',' << name << ',' << num(v) << '\n';
        worst = std::max(worst, v);
      }
    }
    out.write("tree_check.csv", vs.str());
    d["tree_check_max_abs_diff"] = worst;
  }
  out.write("report.json", d.dump(2) + "\n");
  return out.finish(d);
}

ResultManifest run_command(const std::string& name, const RunConfig& c) {
  if (name == "simulate") return cmd_simulate(c);
  if (name == "spectrum") return cmd_spectrum(c);
  if (name == "series") return cmd_series(c);
  if (name == "trees") return cmd_trees(c);
  throw ConfigError("unknown command '" + name + "'");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const SizeLimit*>(&e)) return 2;
  if (dynamic_cast<const HypothesisError*>(&e)) return 3;
  return 4;
}

}  // namespace catsync
