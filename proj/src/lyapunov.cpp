#include "catsync/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include <Eigen/LU>
#include <json.hpp>

#include "catsync/errors.hpp"

namespace catsync {

std::string to_string(SpectrumMethod m) {
  switch (m) {
    case SpectrumMethod::qr_direct: return "qr_direct";
    case SpectrumMethod::perturbative: return "perturbative";
    default: return "birkhoff_multiplier";
  }
}

SpectrumMethod parse_method(const std::string& s) {
  if (s == "qr_direct" || s == "qr") return SpectrumMethod::qr_direct;
  if (s == "perturbative") return SpectrumMethod::perturbative;
  if (s == "birkhoff_multiplier" || s == "birkhoff") return SpectrumMethod::birkhoff_multiplier;
  throw ConfigError("unknown spectrum method '" + s + "'");
}

FullState random_state(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  const double a = u(rng);
  const double b = u(rng);
  const double c = u(rng);
  return FullState{a, b, c}.reduced();
}

namespace {

// Modified Gram–Schmidt on the columns; returns diag(R) > 0.
Eigen::Vector3d orthonormalize(Eigen::Matrix3d& m) {
  Eigen::Vector3d r;
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < j; ++i) m.col(j) -= m.col(i).dot(m.col(j)) * m.col(i);
    r[j] = m.col(j).norm();
    if (!(r[j] > 0.0) || !std::isfinite(r[j]))
      throw NumericalError(NumericalError::Kind::Divergence,
                           "tangent frame collapsed during re-orthonormalization");
    m.col(j) /= r[j];
  }
  return r;
}

void fill_sorted(SpectrumRecord& rec, std::array<double, 3> ex, std::array<double, 3> se) {
  std::array<int, 3> ord{0, 1, 2};
  std::sort(ord.begin(), ord.end(), [&](int a, int b) { return ex[a] > ex[b]; });
  rec.lambda_plus = ex[ord[0]];
  rec.lambda_zero = ex[ord[1]];
  rec.lambda_minus = ex[ord[2]];
  rec.stderr_ = {se[ord[0]], se[ord[1]], se[ord[2]]};
  lyapunov_dimension(rec);
}

}  // namespace

SpectrumRecord spectrum_qr(const CouplingSpec& spec_in, double epsilon,
                           const QrOptions& opt) {
  const CouplingSpec spec = spec_in.with_epsilon(epsilon);
  spec.validate();
  if (opt.batches < 2 || opt.n_iter < opt.batches)
    throw ConfigError("spectrum: n_iter must be at least the batch count (>= 2)");
  if (opt.n_transient < 0) throw ConfigError("spectrum: n_transient must be >= 0");

  FullState s = random_state(opt.seed);
  Eigen::Matrix3d frame = Eigen::Matrix3d::Identity();
  for (int k = 0; k < opt.n_transient; ++k) {
    const auto step = poincare_with_jacobian(s, spec, opt.dt);
    s = step.image;
    frame = step.jacobian * frame;
    orthonormalize(frame);
  }

  const int per_batch = opt.n_iter / opt.batches;
  const int used = per_batch * opt.batches;
  std::vector<std::array<double, 3>> batch(opt.batches, {0.0, 0.0, 0.0});
  std::array<double, 3> total{0.0, 0.0, 0.0};
  double clock = 0.0;
  for (int k = 0; k < used; ++k) {
    const auto step = poincare_with_jacobian(s, spec, opt.dt);
    s = step.image;
    frame = step.jacobian * frame;
    const Eigen::Vector3d r = orthonormalize(frame);
    auto& b = batch[k / per_batch];
    for (int i = 0; i < 3; ++i) {
      const double l = std::log(r[i]);
      b[i] += l;
      total[i] += l;
    }
    clock += frame(2, 2) * frame(2, 2);
  }

  std::array<double, 3> ex{}, se{};
  for (int i = 0; i < 3; ++i) {
    ex[i] = total[i] / used;
    double var = 0.0;
    for (const auto& b : batch) {
      const double dv = b[i] / per_batch - ex[i];
      var += dv * dv;
    }
    se[i] = std::sqrt(var / (opt.batches - 1) / opt.batches);
  }

  SpectrumRecord rec;
  rec.epsilon = epsilon;
  rec.n_iter = used;
  rec.n_transient = opt.n_transient;
  rec.method = SpectrumMethod::qr_direct;
  rec.clock_alignment = clock / used;
  fill_sorted(rec, ex, se);
  // the last QR direction follows the clock once it is the most contracting
  const bool clock_last = rec.clock_alignment > 0.5;
  rec.clock_exponent = clock_last ? ex[2] : ex[1];
  const double stable = clock_last ? ex[1] : ex[2];
  rec.transverse_gap = rec.clock_exponent - stable;
  return rec;
}

KaplanYorke kaplan_yorke(std::vector<double> ex) {
  std::sort(ex.begin(), ex.end(), std::greater<>());
  const int n = static_cast<int>(ex.size());
  KaplanYorke out;
  if (n == 0 || ex[0] < 0.0) {
    out.flagged = true;
    return out;
  }
  double partial = 0.0;
  int k = 0;
  for (int i = 0; i < n; ++i) {
    if (partial + ex[i] < 0.0) break;
    partial += ex[i];
    k = i + 1;
  }
  if (k >= n) {  // cap so that Λ_{k+1} exists
    k = n - 1;
    partial -= ex[n - 1];
  }
  out.k = k;
  out.value = ex[k] == 0.0 ? static_cast<double>(n) : k + partial / std::abs(ex[k]);
  out.flagged = out.value > n;
  return out;
}

double lyapunov_dimension(SpectrumRecord& rec) {
  const KaplanYorke ky = kaplan_yorke({rec.lambda_plus, rec.lambda_zero, rec.lambda_minus});
  rec.dimension = ky.value;
  rec.dimension_k = ky.k;
  rec.dimension_flag = ky.flagged;
  return ky.value;
}

PerturbativeModel build_perturbative(const CouplingSpec& spec, double epsilon,
                                     const SeriesSettings& settings, int n_max,
                                     const PhaseOptions& phase) {
  if (n_max < 1) throw ConfigError("perturbative: n_max must be >= 1");
  if (!(epsilon > 0.0)) throw ConfigError("perturbative: epsilon must be > 0");
  PhaseOptions po = phase;
  po.n_phi = settings.n_phi;
  PhaseConstants pc = solve_w0(spec.g, po);
  pc.mu = epsilon;
  SeriesBundle b = build_series(spec, pc, settings, std::max(1, n_max - 1));
  MSeries ms = m_series(b, n_max);
  TangentFrame fr = build_frame(ms, b.grid(), n_max, b.hyperbolic_sum());
  return {std::move(b), std::move(ms), std::move(fr), n_max};
}

namespace {

SpectrumRecord record_from_logs(double epsilon, const std::array<double, 3>& mean,
                                 SpectrumMethod method, int n) {
  SpectrumRecord rec;
  rec.epsilon = epsilon;
  rec.method = method;
  rec.n_iter = n;
  fill_sorted(rec, mean, {0.0, 0.0, 0.0});
  rec.clock_exponent = mean[2];
  rec.transverse_gap = mean[2] - mean[1];
  return rec;
}

double checked_log(double v) {
  if (!(v > 0.0))
    throw NumericalError(NumericalError::Kind::NonPositive,
                         "multiplier is not positive; the series is outside its range");
  return std::log(v);
}

}  // namespace

SpectrumRecord spectrum_perturbative(const PerturbativeModel& model, double epsilon) {
  if (epsilon == 0.0) {
    const double l = CatMap::get().log_lambda_plus();
    return record_from_logs(0.0, {l, -l, 0.0}, SpectrumMethod::perturbative, 0);
  }
  const auto lam = multipliers(model.frame, epsilon);
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  const std::size_t np = lam[0].size();
  for (int i = 0; i < 3; ++i) {
    for (double v : lam[i]) mean[i] += checked_log(v);
    mean[i] /= np;
  }
  return record_from_logs(epsilon, mean, SpectrumMethod::perturbative,
                          static_cast<int>(np));
}

SpectrumRecord spectrum_birkhoff(const PerturbativeModel& model, double epsilon,
                                 int n_points, std::uint64_t seed) {
  if (n_points < 1) throw ConfigError("birkhoff: n_points must be >= 1");
  const auto lam = multipliers(model.frame, epsilon);
  std::array<PhiFunction, 3> logs;
  for (int i = 0; i < 3; ++i) {
    logs[i].resize(lam[i].size());
    for (std::size_t p = 0; p < lam[i].size(); ++p) logs[i][p] = checked_log(lam[i][p]);
  }
  const FullState start = random_state(seed);
  TorusPoint phi(start.x1, start.x2);
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  for (int k = 0; k < n_points; ++k) {
    for (int i = 0; i < 3; ++i) mean[i] += bilinear(model.bundle.grid(), logs[i], phi);
    phi = apply_cat(phi);
  }
  for (double& m : mean) m /= n_points;
  return record_from_logs(epsilon, mean, SpectrumMethod::birkhoff_multiplier, n_points);
}

SpectrumRecord spectrum_at(const CouplingSpec& spec, double epsilon,
                           const SweepOptions& opt) {
  if (opt.method == SpectrumMethod::qr_direct) return spectrum_qr(spec, epsilon, opt.qr);
  if (epsilon == 0.0) {
    const double l = CatMap::get().log_lambda_plus();
    return record_from_logs(0.0, {l, -l, 0.0}, opt.method, 0);
  }
  SeriesSettings st = opt.series;
  st.exec = Exec::serial;  // parallelism lives at the sweep level
  const PerturbativeModel model = build_perturbative(spec, epsilon, st, opt.n_max);
  if (opt.method == SpectrumMethod::perturbative) return spectrum_perturbative(model, epsilon);
  return spectrum_birkhoff(model, epsilon, opt.qr.n_iter, opt.qr.seed);
}

std::vector<SpectrumRecord> sweep(const CouplingSpec& spec,
                                  const std::vector<double>& eps_grid,
                                  const SweepOptions& opt) {
  for (std::size_t i = 1; i < eps_grid.size(); ++i)
    if (!(eps_grid[i] > eps_grid[i - 1]))
      throw ConfigError("sweep: epsilon grid must be strictly increasing");
  std::vector<SpectrumRecord> out(eps_grid.size());
  std::vector<std::string> errors(eps_grid.size());
  const bool parallel = opt.exec == Exec::parallel;
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    try {
      out[i] = spectrum_at(spec, eps_grid[i], opt);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty())
      throw NumericalError(NumericalError::Kind::Divergence,
                           "sweep failed at epsilon=" + std::to_string(eps_grid[i]) + ": " +
                               errors[i]);
  return out;
}

SweepResult find_epsilon_c(const CouplingSpec& spec, const std::vector<double>& eps_grid,
                           const SweepOptions& opt) {
  SweepResult res;
  res.records = sweep(spec, eps_grid, opt);
  if (spec.f_is_zero()) {
    const PhaseConstants pc = solve_w0(spec.g, PhaseOptions{opt.series.n_phi});
    res.closed_form = CatMap::get().log_lambda_plus() / (-pc.gamma);
  }
  std::size_t hit = res.records.size();
  for (std::size_t i = 0; i + 1 < res.records.size(); ++i)
    if ((res.records[i].transverse_gap > 0) != (res.records[i + 1].transverse_gap > 0)) {
      hit = i;
      break;
    }
  if (hit == res.records.size())
    throw NumericalError(NumericalError::Kind::NoBracket,
                         "Lambda_0 - Lambda_- does not change sign on the epsilon grid");

  SpectrumRecord lo = res.records[hit];
  SpectrumRecord hi = res.records[hit + 1];
  while (hi.epsilon - lo.epsilon > opt.tol) {
    const SpectrumRecord mid = spectrum_at(spec, 0.5 * (lo.epsilon + hi.epsilon), opt);
    res.refinement.push_back(mid);
    if ((mid.transverse_gap > 0) == (lo.transverse_gap > 0))
      lo = mid;
    else
      hi = mid;
  }
  // parabola through the bracket ends and its midpoint
  const SpectrumRecord mid = spectrum_at(spec, 0.5 * (lo.epsilon + hi.epsilon), opt);
  res.refinement.push_back(mid);
  const double x0 = lo.epsilon, x1 = mid.epsilon, x2 = hi.epsilon;
  const double y0 = lo.transverse_gap, y1 = mid.transverse_gap, y2 = hi.transverse_gap;
  const double d01 = (y1 - y0) / (x1 - x0);
  const double d12 = (y2 - y1) / (x2 - x1);
  const double a = (d12 - d01) / (x2 - x0);
  const double b = d01 - a * (x0 + x1);
  const double c = y0 - a * x0 * x0 - b * x0;
  double root = x0 - y0 * (x2 - x0) / (y2 - y0);  // secant fallback
  if (std::abs(a) > 1e-300) {
    const double disc = b * b - 4 * a * c;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (double r : {(-b + sq) / (2 * a), (-b - sq) / (2 * a)})
        if (r >= x0 && r <= x2) root = r;
    }
  }
  res.epsilon_c = root;
  return res;
}

std::vector<FullState> attractor_cloud(const CouplingSpec& spec_in, double epsilon,
                                       int n_points, int n_transient, std::uint64_t seed,
                                       double dt) {
  if (n_points < 0 || n_transient < 0)
    throw ConfigError("attractor_cloud: counts must be >= 0");
  const CouplingSpec spec = spec_in.with_epsilon(epsilon);
  spec.validate();
  FullState s = random_state(seed);
  for (int k = 0; k < n_transient; ++k) s = poincare_map(s, spec, dt);
  std::vector<FullState> out;
  out.reserve(n_points);
  for (int k = 0; k < n_points; ++k) {
    s = poincare_map(s, spec, dt);
    out.push_back(s);
  }
  return out;
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string sweep_csv(const SweepResult& r) {
  std::ostringstream os;
  os << "epsilon,L_plus,L_zero,L_minus,D_L,stderr_plus,stderr_zero,stderr_minus,"
        "clock_exponent,gap\n";
  for (const auto& x : r.records)
    os << num(x.epsilon) << ',' << num(x.lambda_plus) << ',' << num(x.lambda_zero) << ','
       << num(x.lambda_minus) << ',' << num(x.dimension) << ',' << num(x.stderr_[0]) << ','
       << num(x.stderr_[1]) << ',' << num(x.stderr_[2]) << ',' << num(x.clock_exponent)
       << ',' << num(x.transverse_gap) << '\n';
  return os.str();
}

std::string record_json(const SpectrumRecord& r) {
  nlohmann::ordered_json j;
  j["epsilon"] = r.epsilon;
  j["method"] = to_string(r.method);
  j["Lambda_plus"] = r.lambda_plus;
  j["Lambda_zero"] = r.lambda_zero;
  j["Lambda_minus"] = r.lambda_minus;
  j["stderr"] = {r.stderr_[0], r.stderr_[1], r.stderr_[2]};
  j["D_L"] = r.dimension;
  j["D_L_k"] = r.dimension_k;
  j["D_L_flag"] = r.dimension_flag;
  j["clock_exponent"] = r.clock_exponent;
  j["transverse_gap"] = r.transverse_gap;
  j["clock_alignment"] = r.clock_alignment;
  j["n_iter"] = r.n_iter;
  j["n_transient"] = r.n_transient;
  return j.dump(2);
}

}  // namespace catsync
