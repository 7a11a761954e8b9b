#include "catsync/trig_poly.hpp"

#include <cmath>
#include <sstream>

#include "catsync/cat_map.hpp"

namespace catsync {

namespace {

double phase_of(const Wavevector& k, double x1, double x2, double w, double t) {
  return k.k1 * x1 + k.k2 * x2 + k.kw * w + k.kt * t;
}

// r-th derivative of cos/sin evaluated from (cos θ, sin θ).
double rotated(Trig kind, int r, double c, double s) {
  switch (kind == Trig::cos ? r & 3 : (r + 3) & 3) {
    case 0: return c;
    case 1: return -s;
    case 2: return -c;
    default: return s;
  }
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

std::vector<MultiIndex> multi_indices_up_to(int max_order) {
  std::vector<MultiIndex> out;
  for (int r = 0; r <= max_order; ++r)
    for (int p = r; p >= 0; --p)
      for (int m = r - p; m >= 0; --m) out.push_back({p, m, r - p - m});
  return out;
}

TrigPoly::TrigPoly(std::vector<TrigTerm> terms) {
  for (auto& term : terms)
    if (term.coeff != 0.0) terms_.push_back(term);
}

double TrigPoly::operator()(double x1, double x2, double w, double t) const {
  double v = 0.0;
  for (const auto& term : terms_) {
    const double th = phase_of(term.k, x1, x2, w, t);
    v += term.coeff * (term.kind == Trig::cos ? std::cos(th) : std::sin(th));
  }
  return v;
}

double TrigPoly::eval_with_gradient(double x1, double x2, double w, double t,
                                    std::array<double, 3>& grad) const {
  double v = 0.0;
  grad = {0.0, 0.0, 0.0};
  for (const auto& term : terms_) {
    const double th = phase_of(term.k, x1, x2, w, t);
    const double c = std::cos(th);
    const double s = std::sin(th);
    double val, der;
    if (term.kind == Trig::cos) {
      val = c;
      der = -s;
    } else {
      val = s;
      der = c;
    }
    v += term.coeff * val;
    const double cd = term.coeff * der;
    grad[0] += cd * term.k.k1;
    grad[1] += cd * term.k.k2;
    grad[2] += cd * term.k.kw;
  }
  return v;
}

TrigPoly TrigPoly::derivative(const Direction& d) const {
  std::vector<TrigTerm> out;
  out.reserve(terms_.size());
  for (const auto& term : terms_) {
    const double a = term.k.k1 * d[0] + term.k.k2 * d[1] + term.k.kw * d[2] +
                     term.k.kt * d[3];
    if (a == 0.0) continue;
    // d/dθ cos = −sin, d/dθ sin = cos
    if (term.kind == Trig::cos)
      out.push_back({-term.coeff * a, term.k, Trig::sin});
    else
      out.push_back({term.coeff * a, term.k, Trig::cos});
  }
  return TrigPoly(std::move(out));
}

double TrigPoly::integrate_along_clock(double x1, double x2, double w0,
                                       double t0, double t1) const {
  double acc = 0.0;
  for (const auto& term : terms_) {
    const double base = term.k.k1 * x1 + term.k.k2 * x2 + term.k.kw * w0;
    const int omega = term.k.kw + term.k.kt;
    if (omega == 0) {
      const double v = term.kind == Trig::cos ? std::cos(base) : std::sin(base);
      acc += term.coeff * v * (t1 - t0);
      continue;
    }
    const double a = base + omega * t0;
    const double b = base + omega * t1;
    if (term.kind == Trig::cos)
      acc += term.coeff * (std::sin(b) - std::sin(a)) / omega;
    else
      acc += term.coeff * (std::cos(a) - std::cos(b)) / omega;
  }
  return acc;
}

void TrigPoly::accumulate_taylor(double x1, double x2, double w, double t,
                                 const std::vector<MultiIndex>& indices,
                                 double* out) const {
  const auto& cat = CatMap::get();
  for (const auto& term : terms_) {
    const double th = phase_of(term.k, x1, x2, w, t);
    const double c = std::cos(th);
    const double s = std::sin(th);
    const double ap = term.k.k1 * cat.x_plus[0] + term.k.k2 * cat.x_plus[1];
    const double am = term.k.k1 * cat.x_minus[0] + term.k.k2 * cat.x_minus[1];
    const double aw = term.k.kw;
    for (std::size_t i = 0; i < indices.size(); ++i) {
      const auto& q = indices[i];
      const double f = std::pow(ap, q.plus) * std::pow(am, q.minus) *
                       std::pow(aw, q.clock) /
                       (factorial(q.plus) * factorial(q.minus) *
                        factorial(q.clock));
      if (f == 0.0) continue;
      out[i] += term.coeff * f * rotated(term.kind, q.order(), c, s);
    }
  }
}

TrigPoly TrigPoly::operator+(const TrigPoly& other) const {
  std::vector<TrigTerm> all = terms_;
  all.insert(all.end(), other.terms_.begin(), other.terms_.end());
  return TrigPoly(std::move(all));
}

TrigPoly TrigPoly::operator*(double s) const {
  std::vector<TrigTerm> all = terms_;
  for (auto& term : all) term.coeff *= s;
  return TrigPoly(std::move(all));
}

std::string TrigPoly::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& term : terms_) {
    if (!first) os << " + ";
    first = false;
    os << term.coeff << '*' << (term.kind == Trig::cos ? "cos(" : "sin(");
    bool lead = true;
    auto put = [&](int k, const char* name) {
      if (k == 0) return;
      if (!lead && k > 0) os << '+';
      if (k == -1) os << '-';
      else if (k != 1) os << k << '*';
      os << name;
      lead = false;
    };
    put(term.k.k1, "x1");
    put(term.k.k2, "x2");
    put(term.k.kw, "w");
    put(term.k.kt, "t");
    if (lead) os << '0';
    os << ')';
  }
  return os.str();
}

}  // namespace catsync
