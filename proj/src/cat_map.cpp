#include "catsync/cat_map.hpp"

namespace catsync {

const CatMap& CatMap::get() {
  static const CatMap map = [] {
    CatMap m{};
    const double root5 = std::sqrt(5.0);
    m.lambda_plus = 0.5 * (3.0 + root5);
    m.lambda_minus = 0.5 * (3.0 - root5);
    const double np = std::hypot(1.0, m.lambda_plus - 2.0);
    const double nm = std::hypot(1.0, m.lambda_minus - 2.0);
    m.x_plus = {1.0 / np, (m.lambda_plus - 2.0) / np};
    m.x_minus = {-1.0 / nm, -(m.lambda_minus - 2.0) / nm};
    return m;
  }();
  return map;
}

TorusPoint apply_cat(const TorusPoint& p) {
  const double a = CatMap::s11 * p.phi[0] + CatMap::s12 * p.phi[1];
  const double b = CatMap::s21 * p.phi[0] + CatMap::s22 * p.phi[1];
  return {a, b};
}

TorusPoint apply_cat_inverse(const TorusPoint& p) {
  return {p.phi[0] - p.phi[1], -p.phi[0] + 2.0 * p.phi[1]};
}

}  // namespace catsync
