#include "thurston/rings.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "thurston/error.hpp"
#include "thurston/json_io.hpp"
#include "thurston/polynomial.hpp"

namespace thurston {

using json_io::json;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Complex iterate(const RealizedMap& g, Complex z, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) z = g.eval(z);
  return z;
}

int winding(const std::vector<Complex>& curve, Complex p) {
  double total = 0.0;
  for (std::size_t k = 0; k < curve.size(); ++k) {
    const Complex a = curve[k] - p, b = curve[(k + 1) % curve.size()] - p;
    total += std::arg(b / a);
  }
  return static_cast<int>(std::lround(total / kTwoPi));
}

double segment_distance(Complex p, Complex a, Complex b) {
  const Complex d = b - a;
  const double len2 = std::norm(d);
  double t = len2 > 0.0 ? ((p - a) * std::conj(d)).real() / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::abs(p - (a + t * d));
}

double curve_distance(const std::vector<Complex>& curve, Complex p) {
  double best = kInf;
  for (std::size_t k = 0; k < curve.size(); ++k)
    best = std::min(best, segment_distance(p, curve[k], curve[(k + 1) % curve.size()]));
  return best;
}

/// Positive distance to the boundary when p lies inside the curve, negative otherwise.
double signed_inside(const std::vector<Complex>& curve, Complex p) {
  const double d = curve_distance(curve, p);
  return winding(curve, p) == 1 ? d : -d;
}

double residual_on_circle(const RealizedMap& g, const KoenigsChart& c, double r, int n) {
  const Complex a = c.cycle.front();
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    const Complex z = a + std::polar(r, kTwoPi * k / n);
    const Complex gz = iterate(g, z, c.period());
    const double e = std::abs(c.phi(gz) - c.lambda * c.phi(z));
    if (!std::isfinite(e)) return kInf;
    worst = std::max(worst, e);
  }
  return worst;
}
}  // namespace

Complex KoenigsChart::phi(Complex z) const {
  const Complex u = z - cycle.front();
  Complex v = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * u + *it;
  return v;
}

Complex KoenigsChart::phi_inverse(Complex w) const { return phi_inverse(w, cycle.front() + w); }

Complex KoenigsChart::phi_inverse(Complex w, Complex guess) const {
  const Polynomial p(coeffs);
  Complex u = guess - cycle.front();
  for (int it = 0; it < 60; ++it) {
    Complex v, dv;
    p.eval_with_derivative(u, v, dv);
    const Complex step = (v - w) / dv;
    u -= step;
    if (std::abs(step) <= 1e-15 * (1.0 + std::abs(u))) break;
  }
  return cycle.front() + u;
}

KoenigsChart koenigs_chart(const RealizedMap& g, const std::vector<Complex>& cycle, Complex lambda,
                           const KoenigsOptions& opts) {
  if (cycle.empty()) throw Error(ErrorCode::InvalidArgument, "empty cycle");
  if (!(std::abs(lambda) > 0.0 && std::abs(lambda) < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "Koenigs charts need 0 < |lambda| < 1");
  }
  const std::size_t p = cycle.size();

  // Newton on g^p(z) = z from the first approximate point.
  Complex z = cycle.front();
  for (int it = 0; it < 60; ++it) {
    Complex w = z, dw = 1.0;
    for (std::size_t k = 0; k < p; ++k) {
      Complex v, dv;
      g.eval_with_derivative(w, v, dv);
      dw *= dv;
      w = v;
    }
    const Complex step = (w - z) / (dw - 1.0);
    z -= step;
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(z))) break;
  }
  KoenigsChart c;
  c.cycle.push_back(z);
  for (std::size_t k = 1; k < p; ++k) c.cycle.push_back(g.eval(c.cycle.back()));
  for (std::size_t k = 0; k < p; ++k) {
    if (std::abs(c.cycle[k] - cycle[k]) > 1e-3 * (1.0 + std::abs(cycle[k]))) {
      throw Error(ErrorCode::InvalidArgument, "the given points are not an orbit of a cycle of g");
    }
  }
  Complex mult = 1.0;
  for (const Complex x : c.cycle) mult *= g.derivative(x);
  if (std::abs(mult - lambda) > opts.multiplier_tol) {
    throw Error(ErrorCode::MultiplierMismatch, "cycle multiplier is (" + std::to_string(mult.real()) + ", " +
                                                   std::to_string(mult.imag()) + ")");
  }
  c.lambda = mult;

  // h(u) = g^p(a + u) - a as a truncated series.
  const std::size_t n = opts.order + 1;
  Series h;
  for (std::size_t k = 0; k < p; ++k) {
    Series t = Series::taylor(g.num(), c.cycle[k], n) / Series::taylor(g.den(), c.cycle[k], n);
    t[0] = 0.0;
    h = k == 0 ? t : t.compose(h);
  }

  // phi_k (lambda - lambda^k) = sum_{j<k} phi_j [h^j]_k with phi_1 = 1.
  std::vector<Series> powers{Series::constant(1.0, n), h};
  for (std::size_t j = 2; j < n; ++j) powers.push_back(powers.back() * h);
  c.coeffs.assign(n, 0.0);
  c.coeffs[1] = 1.0;
  for (std::size_t k = 2; k < n; ++k) {
    Complex acc = 0.0;
    for (std::size_t j = 1; j < k; ++j) acc += c.coeffs[j] * powers[j][k];
    c.coeffs[k] = acc / (c.lambda - std::pow(c.lambda, static_cast<double>(k)));
  }

  double best_residual = kInf;
  for (double r = 1.0; r >= 1e-6; r *= 0.8) {
    const double res = residual_on_circle(g, c, r, 64);
    best_residual = std::min(best_residual, res);
    if (!(res < opts.residual_tol) || !(residual_on_circle(g, c, 0.5 * r, 64) < opts.residual_tol)) continue;
    std::vector<Complex> image;
    double m = kInf;
    for (int k = 0; k < 256; ++k) {
      image.push_back(c.phi(c.cycle.front() + std::polar(r, kTwoPi * k / 256)));
      m = std::min(m, std::abs(image.back()));
    }
    if (winding(image, 0.0) != 1) continue;
    c.rho = r;
    c.residual = res;
    c.image_radius = m;
    return c;
  }
  throw Error(ErrorCode::NonConvergence,
              "Koenigs series residual never below tolerance; best " + std::to_string(best_residual));
}

RingSystem make_ring_system(const KoenigsChart& chart, double a, double b) {
  if (!(a > 0.0) || !(b > a)) throw Error(ErrorCode::InvalidArgument, "ring radii need 0 < a < b");
  if (!(b < chart.image_radius)) throw Error(ErrorCode::InvalidArgument, "outer radius exceeds the chart image");
  RingSystem rs;
  rs.chart = chart;
  const std::size_t p = chart.period();
  for (std::size_t i = 0; i <= p; ++i) rs.radii.push_back(a * std::pow(b / a, static_cast<double>(i) / p));
  return rs;
}

std::vector<Complex> ring_curve(const RingSystem& rs, const RealizedMap& g, std::size_t i, double r, int n) {
  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(n));
  Complex guess = rs.chart.cycle.front() + r;
  for (int k = 0; k < n; ++k) {
    guess = rs.chart.phi_inverse(std::polar(r, kTwoPi * k / n), guess);
    out.push_back(iterate(g, guess, i));
  }
  return out;
}

std::vector<SpherePoint> postcritical_set(const RealizedMap& g, const std::vector<SpherePoint>& extra, int max_iter) {
  std::vector<SpherePoint> out;
  auto known = [&out](const SpherePoint& p) {
    return std::any_of(out.begin(), out.end(), [&](const SpherePoint& q) { return chordal_distance(p, q) < 1e-12; });
  };
  for (const auto& cp : g.critical_points()) {
    SpherePoint v = cp.value;
    for (int k = 0; k < max_iter && !known(v); ++k) {
      out.push_back(v);
      v = g(v);
    }
  }
  for (const auto& p : extra)
    if (!known(p)) out.push_back(p);
  return out;
}

VerificationReport verify_rings(const RingSystem& rs, const RealizedMap& g, const std::vector<SpherePoint>& P_f,
                                double ring_margin, int samples) {
  const std::size_t p = rs.period();
  std::vector<std::vector<Complex>> inner, outer;
  for (std::size_t i = 0; i < p; ++i) {
    inner.push_back(ring_curve(rs, g, i, rs.radii[i], samples));
    outer.push_back(ring_curve(rs, g, i, rs.radii[i + 1], samples));
  }
  VerificationReport r;

  double m1 = kInf;
  for (std::size_t i = 0; i < p; ++i) {
    Complex z = rs.chart.cycle[i];
    m1 = std::min(m1, signed_inside(inner[i], z));
  }
  r.bullets.push_back({"cycle point in disk", m1 > 0.0, m1});

  double m2 = kInf;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i + 1; j < p; ++j) {
      double d = kInf;
      for (const Complex z : inner[i]) d = std::min(d, curve_distance(inner[j], z));
      const bool nested = winding(inner[j], inner[i].front()) != 0 || winding(inner[i], inner[j].front()) != 0;
      m2 = std::min(m2, nested ? -d : d);
    }
  }
  r.bullets.push_back({"disjoint disk closures", m2 > 0.0, m2});

  double m3 = kInf;
  for (const auto& x : P_f) {
    if (x.at_infinity) continue;
    for (std::size_t i = 0; i < p; ++i) {
      const bool inside = winding(outer[i], x.z) != winding(inner[i], x.z);
      const double d = std::min(curve_distance(inner[i], x.z), curve_distance(outer[i], x.z));
      m3 = std::min(m3, inside ? -d : d);
    }
  }
  r.bullets.push_back({"annulus closures avoid P_f", m3 >= ring_margin, m3});

  double m4 = kInf;
  for (const Complex pole : g.finite_poles()) {
    for (std::size_t i = 0; i < p; ++i) {
      const double d = curve_distance(outer[i], pole);
      m4 = std::min(m4, winding(outer[i], pole) != 0 ? -d : d);
    }
  }
  r.critical_distance = kInf;
  for (const auto& cp : g.critical_points()) {
    if (cp.point.at_infinity) continue;
    for (std::size_t i = 0; i < p; ++i) {
      const double d = winding(outer[i], cp.point.z) != 0 ? 0.0 : curve_distance(outer[i], cp.point.z);
      r.critical_distance = std::min(r.critical_distance, d);
    }
  }
  r.bullets.push_back({"holomorphic on closures", m4 > 0.0, m4});

  // Open annulus samples: the outer boundary of A_i maps onto the boundary of the next disk.
  constexpr int kRadii = 8;
  double m5 = kInf;
  for (std::size_t i = 0; i < p; ++i) {
    const auto& target = inner[(i + 1) % p];
    for (int k = 0; k <= kRadii; ++k) {
      const double s = rs.radii[i] * std::pow(rs.radii[i + 1] / rs.radii[i], static_cast<double>(k) / (kRadii + 1));
      for (const Complex z : ring_curve(rs, g, i, s, samples / 2)) m5 = std::min(m5, signed_inside(target, g.eval(z)));
    }
  }
  r.bullets.push_back({"image of annulus inside a disk", m5 > 0.0, m5});

  r.passed = std::all_of(r.bullets.begin(), r.bullets.end(), [](const BulletResult& b) { return b.passed; });
  return r;
}

RingSystem build_rings(const RealizedMap& g, const KoenigsChart& chart, const std::vector<SpherePoint>& P_f,
                       const RingOptions& opts) {
  const double shrink = std::sqrt(std::abs(chart.lambda));
  const double a_max = std::min(0.8 * chart.image_radius, 0.95 * chart.image_radius * shrink);
  const std::size_t p = chart.period();
  double closest = 0.0;
  std::vector<Complex> avoid;
  for (const auto& x : P_f)
    if (x.is_finite()) avoid.push_back(x.z);

  for (double a = a_max; a > 1e-4 * a_max; a *= 1.0 - opts.step) {
    const RingSystem rs = make_ring_system(chart, a, a / shrink);
    // Orbit of the boundary circle until it falls back inside U_a.
    double approach = kInf;
    bool back_inside = true;
    for (std::size_t i = 0; i <= p; ++i) {
      const auto curve = ring_curve(rs, g, i, a, opts.boundary_samples);
      if (i == p) {
        for (const Complex z : curve) back_inside = back_inside && std::abs(chart.phi(z)) < a;
        break;
      }
      for (const Complex z : curve)
        for (const Complex x : avoid) approach = std::min(approach, std::abs(z - x));
    }
    closest = std::max(closest, approach);
    if (approach < opts.ring_margin || !back_inside) continue;
    if (verify_rings(rs, g, P_f, opts.ring_margin).passed) return rs;
  }
  throw Error(ErrorCode::NoAdmissibleRadius,
              "no admissible radius; closest approach of boundary orbits to P_f " + std::to_string(closest));
}

ConformalAnnulus ring_annulus(const RingSystem& rs, const RealizedMap& g, std::size_t i, double r_in, double r_out) {
  const KoenigsChart chart = rs.chart;
  const Polynomial phi(chart.coeffs);
  const Polynomial dphi = phi.derivative();
  auto map = [chart, dphi, g, i](Complex w, Complex& z, Complex& dz) {
    z = chart.phi_inverse(w);
    dz = 1.0 / dphi(z - chart.cycle.front());
    for (std::size_t k = 0; k < i; ++k) {
      Complex v, dv;
      g.eval_with_derivative(z, v, dv);
      dz *= dv;
      z = v;
    }
  };
  return {map, r_in, r_out};
}

NormDecrease norm_decrease(const RealizedMap& g, const RingSystem& rs, const QuadDiff& qt, double slack,
                           const quad::Budget& budget) {
  const QuadDiff q = push_forward(g, qt);
  NormDecrease n;
  n.total = l1_norm(qt, budget);
  n.source = n.total;
  n.pushed = l1_norm(q, budget);
  for (std::size_t i = 0; i < rs.period(); ++i) {
    const auto disk = ring_annulus(rs, g, i, 0.0, rs.radii[i]);
    n.source -= region_mass(qt, disk, budget);
    n.pushed -= region_mass(q, disk, budget);
    n.ring_mass += annulus_mass(qt, ring_annulus(rs, g, i, rs.radii[i], rs.radii[i + 1]), budget);
  }
  n.holds = n.pushed <= n.source - n.ring_mass + slack * n.total;
  return n;
}

QuadDiff random_differential_off_rings(const RealizedMap& g, const RingSystem& rs, std::size_t n_poles,
                                       std::mt19937_64& rng) {
  std::vector<std::vector<Complex>> outer;
  double extent = 1.0, width = 0.0;
  for (std::size_t i = 0; i < rs.period(); ++i) {
    outer.push_back(ring_curve(rs, g, i, rs.radii[i + 1], 256));
    for (const Complex z : outer.back()) {
      extent = std::max(extent, std::abs(z));
      width = std::max(width, std::abs(z - rs.chart.cycle[i]));
    }
  }
  auto clear = [&](Complex z) {
    for (const auto& c : outer)
      if (winding(c, z) != 0 || curve_distance(c, z) < width) return false;
    return true;
  };
  std::uniform_real_distribution<double> box(-2.0 * extent, 2.0 * extent);
  std::vector<SpherePoint> poles{SpherePoint::infinity()};
  for (int attempts = 0; poles.size() < n_poles + 1; ++attempts) {
    if (attempts > 100000) throw Error(ErrorCode::InvalidArgument, "no room for poles away from the rings");
    const Complex z(box(rng), box(rng));
    const SpherePoint gz = g(SpherePoint(z));
    if (!clear(z) || (gz.is_finite() && !clear(gz.z))) continue;
    bool separated = true;
    for (const auto& p : poles)
      if (p.is_finite() && std::abs(p.z - z) < 0.1 * extent) separated = false;
    if (separated) poles.emplace_back(z);
  }
  return random_quad_diff(poles, rng);
}

json norm_decrease_to_json(const NormDecrease& n) {
  return json{{"source", n.source}, {"pushed", n.pushed}, {"ring_mass", n.ring_mass}, {"total", n.total},
              {"holds", n.holds}};
}

json ring_system_to_json(const RingSystem& rs) {
  json cycle = json::array(), coeffs = json::array();
  for (const Complex z : rs.chart.cycle) cycle.push_back(json_io::complex_to_json(z));
  for (const Complex c : rs.chart.coeffs) coeffs.push_back(json_io::complex_to_json(c));
  return json{{"cycle", cycle},
              {"lambda", json_io::complex_to_json(rs.chart.lambda)},
              {"coeffs", coeffs},
              {"rho", rs.chart.rho},
              {"residual", rs.chart.residual},
              {"image_radius", rs.chart.image_radius},
              {"radii", rs.radii}};
}

RingSystem ring_system_from_json(const json& j) {
  json_io::require_only_keys(j, {"cycle", "lambda", "coeffs", "rho", "residual", "image_radius", "radii"},
                             "ring system");
  RingSystem rs;
  try {
    for (const auto& z : json_io::require_key(j, "cycle", "ring system")) rs.chart.cycle.push_back(json_io::complex_from_json(z));
    for (const auto& c : json_io::require_key(j, "coeffs", "ring system")) rs.chart.coeffs.push_back(json_io::complex_from_json(c));
    rs.chart.lambda = json_io::complex_from_json(json_io::require_key(j, "lambda", "ring system"));
    rs.chart.rho = json_io::require_key(j, "rho", "ring system").get<double>();
    rs.chart.image_radius = json_io::require_key(j, "image_radius", "ring system").get<double>();
    if (j.contains("residual")) rs.chart.residual = j.at("residual").get<double>();
    rs.radii = json_io::require_key(j, "radii", "ring system").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("ring system: ") + e.what());
  }
  if (rs.chart.cycle.empty() || rs.radii.size() != rs.chart.cycle.size() + 1 || rs.chart.coeffs.size() < 2) {
    throw Error(ErrorCode::ParseError, "ring system: inconsistent sizes");
  }
  return rs;
}

json report_to_json(const VerificationReport& r) {
  json bullets = json::array();
  auto num = [](double v) -> json { return std::isfinite(v) ? json(v) : json(nullptr); };
  for (const auto& b : r.bullets) bullets.push_back({{"name", b.name}, {"passed", b.passed}, {"margin", num(b.margin)}});
  return json{{"bullets", bullets}, {"critical_distance", num(r.critical_distance)}, {"passed", r.passed}};
}

}  // namespace thurston
