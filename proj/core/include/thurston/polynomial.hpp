#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "thurston/sphere.hpp"

namespace thurston {

/// Dense complex polynomial, coefficient k multiplies z^k.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<Complex> coeffs) : c_(std::move(coeffs)) {}

  static Polynomial monomial(std::size_t degree, Complex coeff = 1.0);
  /// Product of (z - r) over the given roots.
  static Polynomial from_roots(std::span<const Complex> roots);

  /// Degree ignoring exactly-zero leading coefficients; -1 for the zero polynomial.
  int degree() const;
  std::size_t size() const { return c_.size(); }
  const std::vector<Complex>& coeffs() const { return c_; }
  Complex coeff(std::size_t k) const { return k < c_.size() ? c_[k] : Complex(0.0); }

  Complex operator()(Complex z) const;
  /// Value and first derivative by Horner's scheme.
  void eval_with_derivative(Complex z, Complex& value, Complex& deriv) const;
  Polynomial derivative() const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(Complex s) const;

  /// Coefficients reversed to the given length (chart change z -> 1/z).
  Polynomial reversed(std::size_t length) const;

 private:
  std::vector<Complex> c_;
};

/// All roots of p (counted with multiplicity) via the companion matrix, polished by Newton.
std::vector<Complex> polynomial_roots(const Polynomial& p);

/// Truncated power series sum_{k<order} c_k u^k.
class Series {
 public:
  Series() = default;
  Series(std::vector<Complex> coeffs, std::size_t order);

  static Series constant(Complex value, std::size_t order);
  static Series variable(std::size_t order);  // u
  /// Taylor expansion of p(center + u).
  static Series taylor(const Polynomial& p, Complex center, std::size_t order);

  std::size_t order() const { return c_.size(); }
  Complex operator[](std::size_t k) const { return c_[k]; }
  Complex& operator[](std::size_t k) { return c_[k]; }
  const std::vector<Complex>& coeffs() const { return c_; }

  Series operator+(const Series& o) const;
  Series operator-(const Series& o) const;
  Series operator*(const Series& o) const;
  Series operator*(Complex s) const;
  /// Requires a nonzero constant term in the divisor.
  Series operator/(const Series& o) const;
  /// this(inner(u)); inner must have zero constant term.
  Series compose(const Series& inner) const;

  Complex operator()(Complex u) const;
  Complex derivative_at(Complex u) const;

 private:
  std::vector<Complex> c_;
};

}  // namespace thurston
