#include "catsync/coupling.hpp"

#include <cmath>

#include "catsync/errors.hpp"

namespace catsync {

void CouplingSpec::validate() const {
  if (!std::isfinite(epsilon) || epsilon < 0.0)
    throw ConfigError("coupling.epsilon must be finite and >= 0");
}

FieldJet evaluate_field(const CouplingSpec& spec, double x1, double x2,
                        double w, double t) {
  FieldJet jet;
  std::array<double, 3> grad;
  for (int i = 0; i < 3; ++i) {
    jet.value[i] = spec.component(i).eval_with_gradient(x1, x2, w, t, grad);
    jet.jacobian.row(i) << grad[0], grad[1], grad[2];
  }
  return jet;
}

CouplingSpec locking_example(double epsilon) {
  CouplingSpec spec;
  spec.g = TrigPoly({{1.0, {0, 0, 1, -1}, Trig::sin},
                     {1.0, {0, 1, 1, 1}, Trig::sin}});
  spec.epsilon = epsilon;
  return spec;
}

CouplingSpec bidirectional_example(double epsilon) {
  CouplingSpec spec = locking_example(epsilon);
  spec.f1 = TrigPoly({{1.0, {1, 0, 1, 1}, Trig::cos}});
  return spec;
}

}  // namespace catsync
