#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "thurston/sphere.hpp"

namespace thurston {

struct Configuration;

/// Positions of a finite marked set with optional labels (labels drive deterministic choices).
struct MarkedSet {
  std::vector<SpherePoint> points;
  std::vector<std::string> labels;  // empty, or one per point
  std::string role = "custom";      // E | P1 | P2 | custom
};

/// A curve class given by the two clusters of marked points it separates (indices into a MarkedSet).
struct CurveSpec {
  std::vector<std::size_t> inner;
  std::vector<std::size_t> outer;
};

/// Problems with a CurveSpec over a marked set (empty when valid).
std::vector<std::string> validate_curve_spec(const MarkedSet& ms, const CurveSpec& cs);

struct RoundDisk {
  Complex center;
  double radius = 0.0;  // Euclidean radius in the affine chart
};

struct GeometryCertificate {
  double b_pairwise = 0.0;
  double b_point_disk = 0.0;
  double b_disk_disk = 0.0;
  double b_inradius = 0.0;
  double b = 0.0;
};

double round_annulus_modulus(double r, double R);
double basic2_bound(Complex T);

struct AnnulusFit {
  double modulus = 0.0;
  double r = 0.0;
  double R = 0.0;
  Mobius normalization;       // the annulus is {r < |M(z)| < R}
  std::size_t inner_index = 0;  // marked point sent to 0
  std::size_t outer_index = 0;  // marked point sent to infinity
};

/// Best round annulus separating the clusters over all normalizations sending one inner point to 0
/// and one outer point to infinity. The result is invariant under Möbius maps of the marked set.
AnnulusFit max_round_annulus(const MarkedSet& ms, const CurveSpec& cs);

/// Smallest basic2_bound over normalizations sending two inner points to 0, 1 and an outer point to
/// infinity (T is the image of a second outer point); caps the modulus of any separating annulus.
double basic2_cap(const MarkedSet& ms, const CurveSpec& cs);

struct LengthBracket {
  double lo = 0.0;
  double hi = 0.0;
  double modulus = 0.0;
};

/// Bracket for the hyperbolic length of the geodesic in the class: [pi / (2 (m + 1)), pi / m].
LengthBracket length_bracket(const MarkedSet& ms, const CurveSpec& cs);

struct CurveWeight {
  double weight = 0.0;  // -log of the geometric-mean length
  LengthBracket bracket;
};
CurveWeight curve_weight(const MarkedSet& ms, const CurveSpec& cs);
double weight_from_bracket(const LengthBracket& b);

/// Chordal separation data of points and round disks; b is the minimum of the four entries.
GeometryCertificate geometry_certificate(const std::vector<SpherePoint>& points, const std::vector<RoundDisk>& disks);
GeometryCertificate geometry_certificate(const Configuration& c, const std::vector<RoundDisk>& disks);

struct Gap {
  double a = 0.0;
  double b = 0.0;
  bool left_open = false;  // a coincides with an element of L; the gap is (a, b]
};

/// Leftmost interval [a, a + width] with a >= a_min avoiding L; nullopt when the only gaps lie
/// beyond max(L).
std::optional<Gap> gap_scan(const std::vector<double>& sorted_weights, double a_min, double width);

double cal_bound(double b0, double c0, double M0, int m0);

/// Non-peripheral two-block partitions with the smaller block first, up to complement, at most `cap`.
std::vector<CurveSpec> cluster_curves(std::size_t n_points, std::size_t cap = 64);

struct MonitorReport {
  std::vector<double> x;  // max over curves of exp(weight) per step
  double b0 = 1.0;
  double c0 = 0.0;
  double M0 = 0.0;
  int m0 = 2;
  double bound = 0.0;
  bool hypotheses_hold = false;
  bool holds = false;
};

/// Growth bound along a sequence: b0 from the largest consecutive ratio, c0 = x_0, and M0
/// the smallest level above which x_{n+m0} <= x_n holds throughout (unless given).
MonitorReport monitor_sequence(const std::vector<double>& x, int m0, std::optional<double> M0 = {});
/// x_n from a sequence of marked sets (same labels, same order).
std::vector<double> monitor_values(const std::vector<MarkedSet>& sets, std::size_t cap = 64);

nlohmann::json certificate_to_json(const GeometryCertificate& g);
MarkedSet marked_set_from_json(const nlohmann::json& j);

}  // namespace thurston
