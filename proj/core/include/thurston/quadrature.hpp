#pragma once

#include <functional>

#include "thurston/sphere.hpp"

namespace thurston::quad {

struct Rect {
  double x0, x1, y0, y1;
};

struct Result {
  Complex value{0.0};
  double error = 0.0;  // estimated absolute error
  int cells = 0;       // cells (or intervals) in the final partition
};

struct Budget {
  double rel_tol = 1e-8;
  double abs_tol = 0.0;
  int max_cells = 40000;
};

using Integrand2D = std::function<Complex(double, double)>;
using Integrand1D = std::function<Complex(double)>;

/// Adaptive tensor Gauss-Kronrod (7/15) cubature over a union of rectangles, refined globally by
/// largest error. Cells are split into four. Throws QuadratureBudgetExceeded when the budget runs out
/// before the tolerance max(abs_tol, rel_tol * |integral of |f||) is met.
Result adaptive_2d(const Integrand2D& f, const std::vector<Rect>& domain, const Budget& budget);

/// One-dimensional adaptive Gauss-Kronrod (7/15).
Result adaptive_1d(const Integrand1D& f, double a, double b, const Budget& budget);

/// (1/2πi)∮ f(z) dz around the circle |z - center| = radius by the trapezoid rule, doubling the number
/// of nodes from n0 until two successive values agree to tol. Throws ContourQuadratureNonConvergent.
Complex contour_residue(const std::function<Complex(Complex)>& f, Complex center, double radius, double tol,
                        int n0 = 64, int n_max = 1 << 14);

}  // namespace thurston::quad
