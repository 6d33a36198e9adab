#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "thurston/qdiff.hpp"
#include "thurston/rational_map.hpp"
#include "thurston/sphere.hpp"

namespace thurston {

/// Linearizer phi(z) = sum_k coeffs[k] (z - a)^k at the first cycle point a, with phi o g^p = lambda phi.
struct KoenigsChart {
  std::vector<Complex> cycle;   // a = cycle[0], cycle[i+1] = g(cycle[i])
  Complex lambda;
  std::vector<Complex> coeffs;  // coeffs[0] = 0, coeffs[1] = 1
  double rho = 0.0;             // validity radius in |z - a|
  double residual = 0.0;        // functional-equation residual on |z - a| = rho
  double image_radius = 0.0;    // min |phi| on |z - a| = rho

  std::size_t period() const { return cycle.size(); }
  /// phi(z) for |z - a| <= rho.
  Complex phi(Complex z) const;
  /// phi^{-1}(w) for |w| < image_radius, by Newton from `guess` (default w + a).
  Complex phi_inverse(Complex w) const;
  Complex phi_inverse(Complex w, Complex guess) const;
};

struct KoenigsOptions {
  std::size_t order = 20;
  double residual_tol = 1e-10;
  double multiplier_tol = 1e-8;
};

/// Chart for the attracting cycle through the given approximate points (refined by Newton).
/// MultiplierMismatch when the cycle multiplier differs from lambda; NonConvergence when no tested
/// radius reaches the residual tolerance.
KoenigsChart koenigs_chart(const RealizedMap& g, const std::vector<Complex>& cycle, Complex lambda,
                           const KoenigsOptions& opts = {});

/// Disks D_i = g^{i-1}(U_{r_{i-1}}) and annuli A_i = g^{i-1}(phi^{-1}{r_{i-1} < |w| < r_i}), i = 1..p,
/// with a = r_0 < ... < r_p = b equally spaced in log scale.
struct RingSystem {
  KoenigsChart chart;
  std::vector<double> radii;

  double a() const { return radii.front(); }
  double b() const { return radii.back(); }
  std::size_t period() const { return chart.period(); }
};

RingSystem make_ring_system(const KoenigsChart& chart, double a, double b);

/// g^i(phi^{-1}(r e^{i t})) sampled at n equally spaced angles.
std::vector<Complex> ring_curve(const RingSystem& rs, const RealizedMap& g, std::size_t i, double r, int n);

/// Critical orbits (until they close up or max_iter) together with the extra marked points.
std::vector<SpherePoint> postcritical_set(const RealizedMap& g, const std::vector<SpherePoint>& extra = {},
                                          int max_iter = 500);

struct RingOptions {
  double ring_margin = 1e-3;
  int boundary_samples = 256;
  double step = 1e-3;  // relative decrement of the radius scan
};

/// Descending scan for a with b = a |lambda|^{-1/2}; NoAdmissibleRadius when the scan is exhausted.
RingSystem build_rings(const RealizedMap& g, const KoenigsChart& chart, const std::vector<SpherePoint>& P_f,
                       const RingOptions& opts = {});

struct BulletResult {
  std::string name;
  bool passed = false;
  double margin = 0.0;  // signed; +inf when there is nothing to check
};

struct VerificationReport {
  std::vector<BulletResult> bullets;  // (i) .. (v)
  double critical_distance = 0.0;     // closest critical point of g to the rings
  bool passed = false;
};

VerificationReport verify_rings(const RingSystem& rs, const RealizedMap& g, const std::vector<SpherePoint>& P_f,
                                double ring_margin = 1e-3, int samples = 512);

/// g^i(phi^{-1}({r_in < |w| < r_out})) as a conformal annulus (r_in = 0 gives the disk).
ConformalAnnulus ring_annulus(const RingSystem& rs, const RealizedMap& g, std::size_t i, double r_in, double r_out);

/// Norms taken on the sphere minus the disks D_i. Since g(A_i) lies in some D_j,
/// pushed <= source - ring_mass holds up to quadrature error.
struct NormDecrease {
  double source = 0.0;     // L1 of qt off the disks
  double pushed = 0.0;     // L1 of the push-forward off the disks
  double ring_mass = 0.0;  // L1 of qt over the annuli
  double total = 0.0;      // L1 of qt over the sphere
  bool holds = false;      // pushed <= source - ring_mass + slack * total
};
NormDecrease norm_decrease(const RealizedMap& g, const RingSystem& rs, const QuadDiff& qt, double slack = 1e-6,
                           const quad::Budget& budget = {});

/// Random differential with a pole at infinity and n_poles finite poles, each pole and its image under g
/// kept away from the closed rings (the disks D_i together with their annuli).
QuadDiff random_differential_off_rings(const RealizedMap& g, const RingSystem& rs, std::size_t n_poles,
                                       std::mt19937_64& rng);

nlohmann::json norm_decrease_to_json(const NormDecrease& n);
nlohmann::json ring_system_to_json(const RingSystem& rs);
RingSystem ring_system_from_json(const nlohmann::json& j);
nlohmann::json report_to_json(const VerificationReport& r);

}  // namespace thurston
