#include "thurston/polynomial.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "thurston/error.hpp"

namespace thurston {

Polynomial Polynomial::monomial(std::size_t degree, Complex coeff) {
  std::vector<Complex> c(degree + 1, 0.0);
  c[degree] = coeff;
  return Polynomial(std::move(c));
}

Polynomial Polynomial::from_roots(std::span<const Complex> roots) {
  Polynomial p({1.0});
  for (const Complex r : roots) p = p * Polynomial({-r, 1.0});
  return p;
}

int Polynomial::degree() const {
  for (int k = static_cast<int>(c_.size()) - 1; k >= 0; --k) {
    if (c_[k] != Complex(0.0)) return k;
  }
  return -1;
}

Complex Polynomial::operator()(Complex z) const {
  Complex v = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) v = v * z + *it;
  return v;
}

void Polynomial::eval_with_derivative(Complex z, Complex& value, Complex& deriv) const {
  value = 0.0;
  deriv = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
    deriv = deriv * z + value;
    value = value * z + *it;
  }
}

Polynomial Polynomial::derivative() const {
  if (c_.size() <= 1) return Polynomial({0.0});
  std::vector<Complex> d(c_.size() - 1);
  for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = c_[k] * static_cast<double>(k);
  return Polynomial(std::move(d));
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  std::vector<Complex> r(std::max(c_.size(), o.c_.size()), 0.0);
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = coeff(k) + o.coeff(k);
  return Polynomial(std::move(r));
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + o * Complex(-1.0); }

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (c_.empty() || o.c_.empty()) return Polynomial({0.0});
  std::vector<Complex> r(c_.size() + o.c_.size() - 1, 0.0);
  for (std::size_t i = 0; i < c_.size(); ++i)
    for (std::size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
  return Polynomial(std::move(r));
}

Polynomial Polynomial::operator*(Complex s) const {
  std::vector<Complex> r = c_;
  for (auto& x : r) x *= s;
  return Polynomial(std::move(r));
}

Polynomial Polynomial::reversed(std::size_t length) const {
  std::vector<Complex> r(length, 0.0);
  for (std::size_t k = 0; k < length; ++k) r[length - 1 - k] = coeff(k);
  return Polynomial(std::move(r));
}

std::vector<Complex> polynomial_roots(const Polynomial& p) {
  const int n = p.degree();
  if (n < 0) throw Error(ErrorCode::RootFindingFailure, "zero polynomial has no finite root set");
  if (n == 0) return {};
  const Complex lead = p.coeff(static_cast<std::size_t>(n));
  if (n == 1) return {-p.coeff(0) / lead};

  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) companion(i, n - 1) = -p.coeff(static_cast<std::size_t>(i)) / lead;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::RootFindingFailure, "companion eigenvalue iteration failed");
  }
  std::vector<Complex> roots(solver.eigenvalues().data(), solver.eigenvalues().data() + n);

  // A few Newton corrections on the original coefficients; rejected if they do not reduce |p|.
  for (auto& r : roots) {
    for (int it = 0; it < 4; ++it) {
      Complex v, dv;
      p.eval_with_derivative(r, v, dv);
      if (v == Complex(0.0) || dv == Complex(0.0)) break;
      const Complex next = r - v / dv;
      if (!std::isfinite(next.real()) || !std::isfinite(next.imag())) break;
      if (std::abs(p(next)) >= std::abs(v)) break;
      r = next;
    }
    if (!std::isfinite(r.real()) || !std::isfinite(r.imag())) {
      throw Error(ErrorCode::RootFindingFailure, "non-finite root");
    }
  }
  return roots;
}

Series::Series(std::vector<Complex> coeffs, std::size_t order) : c_(std::move(coeffs)) {
  c_.resize(order, 0.0);
}

Series Series::constant(Complex value, std::size_t order) {
  Series s({}, order);
  if (order > 0) s.c_[0] = value;
  return s;
}

Series Series::variable(std::size_t order) {
  Series s({}, order);
  if (order > 1) s.c_[1] = 1.0;
  return s;
}

Series Series::taylor(const Polynomial& p, Complex center, std::size_t order) {
  // Repeated synthetic division gives the shifted coefficients.
  std::vector<Complex> b = p.coeffs();
  const std::size_t n = b.size();
  for (std::size_t k = 0; k + 1 < n; ++k) {
    for (std::size_t j = n - 1; j-- > k;) b[j] += center * b[j + 1];
  }
  return Series(std::move(b), order);
}

Series Series::operator+(const Series& o) const {
  Series r = *this;
  for (std::size_t k = 0; k < c_.size(); ++k) r.c_[k] += o.c_[k];
  return r;
}

Series Series::operator-(const Series& o) const {
  Series r = *this;
  for (std::size_t k = 0; k < c_.size(); ++k) r.c_[k] -= o.c_[k];
  return r;
}

Series Series::operator*(const Series& o) const {
  const std::size_t n = c_.size();
  Series r({}, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (c_[i] == Complex(0.0)) continue;
    for (std::size_t j = 0; i + j < n; ++j) r.c_[i + j] += c_[i] * o.c_[j];
  }
  return r;
}

Series Series::operator*(Complex s) const {
  Series r = *this;
  for (auto& x : r.c_) x *= s;
  return r;
}

Series Series::operator/(const Series& o) const {
  const std::size_t n = c_.size();
  if (o.c_.empty() || o.c_[0] == Complex(0.0)) {
    throw Error(ErrorCode::InvalidArgument, "series division by a series with zero constant term");
  }
  Series q({}, n);
  for (std::size_t k = 0; k < n; ++k) {
    Complex acc = c_[k];
    for (std::size_t j = 1; j <= k; ++j) acc -= o.c_[j] * q.c_[k - j];
    q.c_[k] = acc / o.c_[0];
  }
  return q;
}

Series Series::compose(const Series& inner) const {
  const std::size_t n = c_.size();
  if (inner.c_[0] != Complex(0.0)) {
    throw Error(ErrorCode::InvalidArgument, "inner series must vanish at the origin");
  }
  // Horner in the series ring.
  Series r({}, n);
  for (std::size_t k = n; k-- > 0;) {
    r = r * inner;
    r.c_[0] += c_[k];
  }
  return r;
}

Complex Series::operator()(Complex u) const {
  Complex v = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) v = v * u + *it;
  return v;
}

Complex Series::derivative_at(Complex u) const {
  Complex v = 0.0;
  for (std::size_t k = c_.size(); k-- > 1;) v = v * u + c_[k] * static_cast<double>(k);
  return v;
}

}  // namespace thurston
