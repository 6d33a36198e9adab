#include "thurston/rational_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "thurston/error.hpp"

namespace thurston {
namespace {

// Roots closer than this (relative) are merged into one multiple critical point. Multiple
// roots of a perturbed Wronskian split like eps^(1/m), so the radius is generous.
constexpr double kCriticalClusterRadius = 1e-3;

Polynomial power(const Polynomial& p, int k) {
  Polynomial r({1.0});
  for (int i = 0; i < k; ++i) r = r * p;
  return r;
}

// sum_k coeff_k * a^k * b^(d-k) for linear polynomials a, b.
Polynomial homogeneous_substitute(const Polynomial& p, const Polynomial& a, const Polynomial& b,
                                  int d) {
  Polynomial acc({0.0});
  for (int k = 0; k <= d; ++k) {
    const Complex ck = p.coeff(static_cast<std::size_t>(k));
    if (ck == Complex(0.0)) continue;
    acc = acc + power(a, k) * power(b, d - k) * ck;
  }
  return acc;
}

}  // namespace

RealizedMap::RealizedMap(Polynomial num, Polynomial den) : num_(std::move(num)), den_(std::move(den)) {
  if (den_.degree() < 0) throw Error(ErrorCode::InvalidArgument, "zero denominator");
  degree_ = std::max(num_.degree(), den_.degree());
  if (degree_ < 1) throw Error(ErrorCode::InvalidArgument, "constant map");
  refresh_critical_data();
}

SpherePoint RealizedMap::operator()(const SpherePoint& p) const {
  if (p.at_infinity) {
    const int dn = num_.degree();
    const int dd = den_.degree();
    if (dn > dd) return SpherePoint::infinity();
    if (dn < dd) return SpherePoint(0.0);
    return SpherePoint(num_.coeff(static_cast<std::size_t>(dn)) / den_.coeff(static_cast<std::size_t>(dd)));
  }
  const Complex d = den_(p.z);
  if (d == Complex(0.0)) return SpherePoint::infinity();
  return SpherePoint(num_(p.z) / d);
}

Complex RealizedMap::eval(Complex z) const { return num_(z) / den_(z); }

void RealizedMap::eval_with_derivative(Complex z, Complex& value, Complex& deriv) const {
  Complex n, dn, d, dd;
  num_.eval_with_derivative(z, n, dn);
  den_.eval_with_derivative(z, d, dd);
  value = n / d;
  deriv = (dn * d - n * dd) / (d * d);
}

Complex RealizedMap::derivative(Complex z) const {
  Complex v, dv;
  eval_with_derivative(z, v, dv);
  return dv;
}

std::vector<SpherePoint> RealizedMap::preimages(const SpherePoint& target) const {
  Polynomial p = target.at_infinity ? den_ : num_ - den_ * target.z;
  const int k = p.degree();
  if (k < 0) throw Error(ErrorCode::RootFindingFailure, "map is constant at the target");
  std::vector<SpherePoint> out;
  out.reserve(static_cast<std::size_t>(degree_));
  for (const Complex r : polynomial_roots(p)) out.emplace_back(r);
  for (int i = k; i < degree_; ++i) out.push_back(SpherePoint::infinity());
  return out;
}

std::vector<SpherePoint> RealizedMap::critical_values() const {
  std::vector<SpherePoint> out;
  out.reserve(critical_.size());
  for (const auto& c : critical_) out.push_back(c.value);
  return out;
}

std::vector<Complex> RealizedMap::finite_poles() const {
  if (den_.degree() <= 0) return {};
  return polynomial_roots(den_);
}

void RealizedMap::refresh_critical_data() {
  critical_.clear();
  const Polynomial w = num_.derivative() * den_ - num_ * den_.derivative();
  const int total = 2 * degree_ - 2;
  const int wdeg = w.degree();
  std::vector<Complex> roots = wdeg > 0 ? polynomial_roots(w) : std::vector<Complex>{};

  std::vector<bool> used(roots.size(), false);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (used[i]) continue;
    Complex sum = roots[i];
    int count = 1;
    used[i] = true;
    for (std::size_t j = i + 1; j < roots.size(); ++j) {
      if (used[j]) continue;
      if (std::abs(roots[j] - roots[i]) < kCriticalClusterRadius * (1.0 + std::abs(roots[i]))) {
        used[j] = true;
        sum += roots[j];
        ++count;
      }
    }
    CriticalPoint cp;
    cp.point = SpherePoint(sum / static_cast<double>(count));
    cp.local_degree = count + 1;
    cp.value = (*this)(cp.point);
    critical_.push_back(cp);
  }
  const int at_infinity = total - std::max(wdeg, 0);
  if (at_infinity > 0) {
    CriticalPoint cp;
    cp.point = SpherePoint::infinity();
    cp.local_degree = at_infinity + 1;
    cp.value = (*this)(cp.point);
    critical_.push_back(cp);
  }
}

RealizedMap RealizedMap::precompose(const Mobius& m) const {
  const Polynomial a({m.b(), m.a()});
  const Polynomial b({m.d(), m.c()});
  return RealizedMap(homogeneous_substitute(num_, a, b, degree_),
                     homogeneous_substitute(den_, a, b, degree_));
}

RealizedMap RealizedMap::postcompose(const Mobius& m) const {
  return RealizedMap(num_ * m.a() + den_ * m.b(), num_ * m.c() + den_ * m.d());
}

RealizedMap RealizedMap::conjugate(const Mobius& m) const {
  return precompose(m.inverse()).postcompose(m);
}

double RealizedMap::common_factor_gap() const {
  if (den_.degree() <= 0 || num_.degree() <= 0) return std::numeric_limits<double>::infinity();
  const auto rn = polynomial_roots(num_);
  const auto rd = polynomial_roots(den_);
  double gap = std::numeric_limits<double>::infinity();
  for (const Complex a : rn)
    for (const Complex b : rd) gap = std::min(gap, std::abs(a - b) / (1.0 + std::abs(a)));
  return gap;
}

Polynomial monic_centered_form(const RealizedMap& g) {
  if (!g.is_polynomial()) throw Error(ErrorCode::InvalidArgument, "monic centered form needs a polynomial");
  const int d = g.degree();
  const Polynomial p = g.num() * (1.0 / g.den().coeff(0));
  const Complex lead = p.coeff(static_cast<std::size_t>(d));
  const Complex alpha = std::pow(lead, 1.0 / static_cast<double>(d - 1));
  const Complex beta = p.coeff(static_cast<std::size_t>(d - 1)) * alpha / (static_cast<double>(d) * lead);
  const RealizedMap conj = RealizedMap::polynomial(p).conjugate(Mobius(alpha, beta, 0.0, 1.0));
  std::vector<Complex> c(static_cast<std::size_t>(d) + 1);
  const Complex den = conj.den().coeff(0);
  for (int k = 0; k <= d; ++k) c[static_cast<std::size_t>(k)] = conj.num().coeff(static_cast<std::size_t>(k)) / den;
  c[static_cast<std::size_t>(d)] = 1.0;
  c[static_cast<std::size_t>(d - 1)] = 0.0;
  return Polynomial(std::move(c));
}

}  // namespace thurston
