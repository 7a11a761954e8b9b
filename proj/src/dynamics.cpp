#include "catsync/dynamics.hpp"

#include <cmath>

#include "catsync/errors.hpp"

namespace catsync {

namespace {

void check_segment(double t0, double t1, double dt) {
  constexpr double slack = 1e-12;
  if (!(dt > 0.0)) throw ConfigError("flow_segment: dt must be positive");
  if (t0 < -slack || t1 > kTwoPi + slack)
    throw ConfigError("flow_segment: segment must lie inside [0, 2pi]");
  if (!(t1 > t0)) throw ConfigError("flow_segment: requires t0 < t1");
}

int step_count(double t0, double t1, double dt) {
  return std::max(1, static_cast<int>(std::ceil((t1 - t0) / dt - 1e-9)));
}

struct Phase {
  double x1, x2, w;
};

Phase velocity(const CouplingSpec& spec, const Phase& p, double t) {
  const double e = spec.epsilon;
  return {e * spec.f1(p.x1, p.x2, p.w, t), e * spec.f2(p.x1, p.x2, p.w, t),
          1.0 + e * spec.g(p.x1, p.x2, p.w, t)};
}

Phase axpy(const Phase& p, double h, const Phase& k) {
  return {p.x1 + h * k.x1, p.x2 + h * k.x2, p.w + h * k.w};
}

}  // namespace

Eigen::Matrix3d kick_matrix() {
  Eigen::Matrix3d m;
  m << CatMap::s11, CatMap::s12, 0, CatMap::s21, CatMap::s22, 0, 0, 0, 1;
  return m;
}

FullState flow_segment(const FullState& s, const CouplingSpec& spec, double t0,
                       double t1, double dt) {
  check_segment(t0, t1, dt);
  if (spec.epsilon == 0.0) return FullState{s.x1, s.x2, s.w + (t1 - t0)}.reduced();

  const int n = step_count(t0, t1, dt);
  const double h = (t1 - t0) / n;
  Phase p{s.x1, s.x2, s.w};
  for (int i = 0; i < n; ++i) {
    const double t = t0 + i * h;
    const Phase k1 = velocity(spec, p, t);
    const Phase k2 = velocity(spec, axpy(p, 0.5 * h, k1), t + 0.5 * h);
    const Phase k3 = velocity(spec, axpy(p, 0.5 * h, k2), t + 0.5 * h);
    const Phase k4 = velocity(spec, axpy(p, h, k3), t + h);
    p.x1 += h / 6.0 * (k1.x1 + 2.0 * k2.x1 + 2.0 * k3.x1 + k4.x1);
    p.x2 += h / 6.0 * (k1.x2 + 2.0 * k2.x2 + 2.0 * k3.x2 + k4.x2);
    p.w += h / 6.0 * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w);
  }
  return FullState{p.x1, p.x2, p.w}.reduced();
}

FullState poincare_map(const FullState& s, const CouplingSpec& spec,
                       double dt) {
  const TorusPoint kicked = apply_cat(s.x());
  return flow_segment({kicked.phi[0], kicked.phi[1], s.w}, spec, 0.0, kTwoPi,
                      dt);
}

MapWithJacobian poincare_with_jacobian(const FullState& s,
                                       const CouplingSpec& spec, double dt) {
  const TorusPoint kicked = apply_cat(s.x());
  const Eigen::Matrix3d kick = kick_matrix();
  if (spec.epsilon == 0.0)
    return {FullState{kicked.phi[0], kicked.phi[1], s.w}.reduced(), kick};

  // Joint RK4 on the base point and the fundamental matrix Ẏ = ε∂𝐟·Y.
  struct Joint {
    Eigen::Vector3d x;
    Eigen::Matrix3d y;
  };
  const double e = spec.epsilon;
  auto rhs = [&](const Joint& j, double t) {
    const FieldJet jet = evaluate_field(spec, j.x[0], j.x[1], j.x[2], t);
    Joint d;
    d.x = e * jet.value;
    d.x[2] += 1.0;
    d.y.noalias() = e * jet.jacobian * j.y;
    return d;
  };
  auto shifted = [](const Joint& j, double h, const Joint& k) {
    return Joint{j.x + h * k.x, j.y + h * k.y};
  };

  const int n = step_count(0.0, kTwoPi, dt);
  const double h = kTwoPi / n;
  Joint cur{{kicked.phi[0], kicked.phi[1], s.w}, Eigen::Matrix3d::Identity()};
  for (int i = 0; i < n; ++i) {
    const double t = i * h;
    const Joint k1 = rhs(cur, t);
    const Joint k2 = rhs(shifted(cur, 0.5 * h, k1), t + 0.5 * h);
    const Joint k3 = rhs(shifted(cur, 0.5 * h, k2), t + 0.5 * h);
    const Joint k4 = rhs(shifted(cur, h, k3), t + h);
    cur.x += h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    cur.y += h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
  }
  if (!cur.x.allFinite() || !cur.y.allFinite())
    throw NumericalError(NumericalError::Kind::Divergence,
                         "tangent integration produced non-finite values");
  return {FullState{cur.x[0], cur.x[1], cur.x[2]}.reduced(), cur.y * kick};
}

Eigen::Vector3d tangent_step(const FullState& s, const Eigen::Vector3d& y,
                             const CouplingSpec& spec, double dt) {
  return poincare_with_jacobian(s, spec, dt).jacobian * y;
}

}  // namespace catsync
