#pragma once

#include <vector>

#include "thurston/polynomial.hpp"
#include "thurston/sphere.hpp"

namespace thurston {

struct CriticalPoint {
  SpherePoint point;
  int local_degree = 2;
  SpherePoint value;
};

/// Rational map num/den of degree d on the Riemann sphere, with cached critical data.
class RealizedMap {
 public:
  RealizedMap() = default;
  RealizedMap(Polynomial num, Polynomial den);

  static RealizedMap polynomial(Polynomial p) { return RealizedMap(std::move(p), Polynomial({1.0})); }

  const Polynomial& num() const { return num_; }
  const Polynomial& den() const { return den_; }
  int degree() const { return degree_; }
  bool is_polynomial() const { return den_.degree() == 0; }

  SpherePoint operator()(const SpherePoint& p) const;
  /// Affine evaluation; caller guarantees den(z) != 0.
  Complex eval(Complex z) const;
  Complex derivative(Complex z) const;
  /// g'(z) at a finite point with finite image, together with the value.
  void eval_with_derivative(Complex z, Complex& value, Complex& deriv) const;

  /// All d preimages of a target point, with multiplicity; preimages at infinity are reported as such.
  std::vector<SpherePoint> preimages(const SpherePoint& target) const;

  const std::vector<CriticalPoint>& critical_points() const { return critical_; }
  std::vector<SpherePoint> critical_values() const;
  /// Poles of the map in the finite plane.
  std::vector<Complex> finite_poles() const;

  /// g o m
  RealizedMap precompose(const Mobius& m) const;
  /// m o g
  RealizedMap postcompose(const Mobius& m) const;
  /// m o g o m^{-1}
  RealizedMap conjugate(const Mobius& m) const;

  /// Smallest distance between a root of num and a root of den, relative to coefficient scale.
  /// Zero (up to roundoff) exactly when num and den share a factor.
  double common_factor_gap() const;

 private:
  void refresh_critical_data();

  Polynomial num_{std::vector<Complex>{0.0, 1.0}};
  Polynomial den_{std::vector<Complex>{1.0}};
  int degree_ = 1;
  std::vector<CriticalPoint> critical_;
};

/// Affine conjugate z^d + a_{d-2} z^{d-2} + ... of a polynomial map (principal root of the leading
/// coefficient). For d = 2 the constant term is the conformal invariant c of z^2 + c.
Polynomial monic_centered_form(const RealizedMap& g);

}  // namespace thurston
