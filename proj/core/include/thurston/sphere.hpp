#pragma once

#include <complex>
#include <ostream>

namespace thurston {

using Complex = std::complex<double>;

/// A point of the Riemann sphere in the affine chart, with an explicit flag for infinity.
struct SpherePoint {
  Complex z{};
  bool at_infinity = false;

  SpherePoint() = default;
  SpherePoint(Complex value) : z(value) {}  // NOLINT: implicit by design of the chart
  SpherePoint(double re, double im) : z(re, im) {}

  static SpherePoint infinity() {
    SpherePoint p;
    p.at_infinity = true;
    return p;
  }

  bool is_finite() const { return !at_infinity; }
  bool operator==(const SpherePoint& other) const;
};

std::ostream& operator<<(std::ostream& os, const SpherePoint& p);

/// Chordal metric 2|z-w| / sqrt((1+|z|^2)(1+|w|^2)); distance to infinity is 2/sqrt(1+|z|^2).
double chordal_distance(const SpherePoint& a, const SpherePoint& b);

/// Möbius transformation z -> (a z + b) / (c z + d) acting on homogeneous coordinates.
class Mobius {
 public:
  Mobius() = default;
  Mobius(Complex a, Complex b, Complex c, Complex d);

  static Mobius identity() { return {}; }

  /// The unique map sending p0 -> 0, p1 -> 1, pinf -> infinity. Points must be distinct.
  static Mobius normalizing(const SpherePoint& p0, const SpherePoint& p1, const SpherePoint& pinf);

  SpherePoint apply(const SpherePoint& p) const;
  Mobius inverse() const;
  /// (this o other)(z) = this(other(z))
  Mobius compose(const Mobius& other) const;
  /// Derivative at a finite point whose image is finite.
  Complex derivative(Complex z) const;

  Complex a() const { return a_; }
  Complex b() const { return b_; }
  Complex c() const { return c_; }
  Complex d() const { return d_; }

 private:
  Complex a_{1.0}, b_{0.0}, c_{0.0}, d_{1.0};
};

}  // namespace thurston
