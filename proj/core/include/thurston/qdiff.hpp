#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "thurston/quadrature.hpp"
#include "thurston/rational_map.hpp"
#include "thurston/sphere.hpp"

namespace thurston {

/// q(z) dz^2 = sum_j b_j / (z - z_j) dz^2 with simple poles at finite z_j and possibly at infinity.
struct QuadDiff {
  std::vector<Complex> poles;   // finite poles
  std::vector<Complex> coeffs;  // one per finite pole
  bool pole_at_infinity = false;

  Complex operator()(Complex z) const;
  /// The differential in the chart u = 1/z, i.e. q(1/u) u^{-4}, evaluated stably near u = 0.
  Complex at_infinity_chart(Complex u) const;
  /// Moments sum b_j z_j^k for k = 0, 1, 2.
  std::array<Complex, 3> moments() const;
  /// Largest violation of the moment conditions, relative to the coefficient scale.
  double moment_defect() const;
  /// All pole locations, infinity last when present.
  std::vector<SpherePoint> pole_points() const;

  QuadDiff operator*(Complex s) const;
};

/// Quadratic differential with simple poles only at the listed points (residues given by products).
/// Validates the moment conditions and throws InvalidArgument when they fail.
QuadDiff make_quad_diff(std::vector<SpherePoint> poles, std::vector<Complex> coeffs);

/// A Beltrami coefficient evaluated in the affine chart; |value| <= bound < 1.
struct BeltramiField {
  std::function<Complex(Complex)> value;
  double bound = 0.0;
  std::string support = "sphere";

  Complex operator()(Complex z) const { return value ? value(z) : Complex(0.0); }
  static BeltramiField zero();
  static BeltramiField constant(Complex k);
};

/// A smooth map given by its value and Wirtinger derivatives f_z, f_zbar.
struct SmoothMap {
  std::function<Complex(Complex)> value;
  std::function<Complex(Complex)> dz;
  std::function<Complex(Complex)> dzbar;
  double dilatation_bound = 0.0;  // sup |f_zbar / f_z|
};

/// (mu_g + mu(g) theta) / (1 + conj(mu_g) mu(g) theta), theta = conj(g_z)/g_z. At critical points the
/// unimodular factor is undefined; those samples return mu(g(z)) (same modulus).
BeltramiField pullback_beltrami(const SmoothMap& g, const BeltramiField& mu);
BeltramiField pullback_beltrami(const RealizedMap& g, const BeltramiField& mu);
/// w -> xi(g(w)) conj(g'(w)) / g'(w).
BeltramiField derivative_transport(const RealizedMap& g, const BeltramiField& xi);

struct PushOptions {
  double min_separation = 1e-8;
  double contour_tol = 1e-14;
};

/// Push-forward sum over g(w) = z of q~(w) / g'(w)^2; residues by contour integration.
QuadDiff push_forward(const RealizedMap& g, const QuadDiff& qt, const PushOptions& opts = {});

/// Integral of |q| dx dy over the sphere (two charts split at |z| = 1).
double l1_norm(const QuadDiff& q, const quad::Budget& budget = {});
/// Integral of xi(z) q(z) dx dy over the sphere.
Complex pairing(const BeltramiField& xi, const QuadDiff& q, const quad::Budget& budget = {});

/// A conformal image of the round annulus {r_in < |w| < r_out}: chart(w) returns z and dz/dw.
struct ConformalAnnulus {
  std::function<void(Complex, Complex&, Complex&)> chart;
  double r_in = 0.0;
  double r_out = 0.0;

  static ConformalAnnulus round(Complex center, double r_in, double r_out);
};

/// Integral of |q| over an annulus; PoleInsideAnnulus if a pole lies in its closure.
double annulus_mass(const QuadDiff& q, const ConformalAnnulus& a, const quad::Budget& budget = {});
/// Integral of |q| over the region without the pole check (simple poles are integrable).
double region_mass(const QuadDiff& q, const ConformalAnnulus& a, const quad::Budget& budget = {});

/// Basis of simple-pole differentials on a pole set: q_k = 1/((z - z_k) prod_refs (z - r)).
std::vector<QuadDiff> quad_diff_basis(const std::vector<SpherePoint>& poles);
/// Coordinates of q in quad_diff_basis(poles); InvalidArgument if q has poles outside the set.
Eigen::VectorXcd basis_coordinates(const QuadDiff& q, const std::vector<SpherePoint>& poles, double tol = 1e-7);

/// Random element of the span of quad_diff_basis(poles), coefficients standard complex normal.
QuadDiff random_quad_diff(const std::vector<SpherePoint>& poles, std::mt19937_64& rng);

struct PushforwardMatrix {
  Eigen::MatrixXcd matrix;  // column k: coordinates of the push-forward of source basis element k
  double norm_estimate = 0.0;
  int directions = 0;
};

/// Matrix of the push-forward between the spaces on src and dst, with a sampled L1 operator norm.
PushforwardMatrix pushforward_matrix(const RealizedMap& g, const std::vector<SpherePoint>& src,
                                     const std::vector<SpherePoint>& dst, std::uint64_t seed = 0,
                                     int directions = 200, const quad::Budget& budget = {});

/// Cauchy-estimate bound 2 r eps / C(r, delta) on the circle L1 integral at |w| = r in {1 < |w| < R},
/// given circle integrals at most eps on one radius in (1, 1 + delta) and one in (R - delta, R).
double cauchy_circle_bound(double r, double R, double delta, double eps);

QuadDiff quad_diff_from_json(const nlohmann::json& j);
nlohmann::json quad_diff_to_json(const QuadDiff& q);

}  // namespace thurston
