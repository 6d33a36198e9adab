#include "thurston/qdiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "thurston/error.hpp"
#include "thurston/json_io.hpp"

namespace thurston {

using json_io::json;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Index of the pole in `list` at the same location as z (relative tolerance), or -1.
int find_pole(const std::vector<Complex>& list, Complex z, double tol = 1e-9) {
  for (std::size_t i = 0; i < list.size(); ++i)
    if (std::abs(list[i] - z) <= tol * (1.0 + std::abs(z))) return static_cast<int>(i);
  return -1;
}

void add_scaled(QuadDiff& acc, const QuadDiff& q, Complex s) {
  for (std::size_t j = 0; j < q.poles.size(); ++j) {
    const int at = find_pole(acc.poles, q.poles[j]);
    if (at < 0) {
      acc.poles.push_back(q.poles[j]);
      acc.coeffs.push_back(s * q.coeffs[j]);
    } else {
      acc.coeffs[static_cast<std::size_t>(at)] += s * q.coeffs[j];
    }
  }
  acc.pole_at_infinity = acc.pole_at_infinity || q.pole_at_infinity;
}

// Polar cells covering the unit disk.
std::vector<quad::Rect> unit_disk_cells() {
  std::vector<quad::Rect> cells;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 8; ++k) cells.push_back({0.5 * i, 0.5 * (i + 1), kTwoPi * k / 8, kTwoPi * (k + 1) / 8});
  return cells;
}
}  // namespace

Complex QuadDiff::operator()(Complex z) const {
  Complex s{0.0};
  for (std::size_t j = 0; j < poles.size(); ++j) s += coeffs[j] / (z - poles[j]);
  return s;
}

Complex QuadDiff::at_infinity_chart(Complex u) const {
  // With sum b = sum b z = 0: q(1/u) u^{-4} = m2 / u + sum b z^3 / (1 - z u).
  Complex s{0.0};
  for (std::size_t j = 0; j < poles.size(); ++j) {
    const Complex z = poles[j];
    s += coeffs[j] * z * z * z / (1.0 - z * u);
  }
  if (pole_at_infinity) s += moments()[2] / u;
  return s;
}

std::array<Complex, 3> QuadDiff::moments() const {
  std::array<Complex, 3> m{};
  for (std::size_t j = 0; j < poles.size(); ++j) {
    m[0] += coeffs[j];
    m[1] += coeffs[j] * poles[j];
    m[2] += coeffs[j] * poles[j] * poles[j];
  }
  return m;
}

double QuadDiff::moment_defect() const {
  const auto m = moments();
  double worst = 0.0;
  for (int k = 0; k < (pole_at_infinity ? 2 : 3); ++k) {
    double scale = 0.0;
    for (std::size_t j = 0; j < poles.size(); ++j) scale += std::abs(coeffs[j]) * std::pow(std::abs(poles[j]), k);
    if (scale > 0.0) worst = std::max(worst, std::abs(m[static_cast<std::size_t>(k)]) / scale);
  }
  return worst;
}

std::vector<SpherePoint> QuadDiff::pole_points() const {
  std::vector<SpherePoint> out(poles.begin(), poles.end());
  if (pole_at_infinity) out.push_back(SpherePoint::infinity());
  return out;
}

QuadDiff QuadDiff::operator*(Complex s) const {
  QuadDiff q = *this;
  for (auto& b : q.coeffs) b *= s;
  return q;
}

QuadDiff make_quad_diff(std::vector<SpherePoint> poles, std::vector<Complex> coeffs) {
  QuadDiff q;
  for (const auto& p : poles) {
    if (p.at_infinity) q.pole_at_infinity = true;
    else q.poles.push_back(p.z);
  }
  if (coeffs.size() != q.poles.size()) {
    throw Error(ErrorCode::InvalidArgument, "one coefficient per finite pole is required");
  }
  q.coeffs = std::move(coeffs);
  if (q.moment_defect() > 1e-8) {
    throw Error(ErrorCode::InvalidArgument, "coefficients violate the moment conditions (defect " +
                                                std::to_string(q.moment_defect()) + ")");
  }
  return q;
}

BeltramiField BeltramiField::zero() { return {[](Complex) { return Complex(0.0); }, 0.0, "empty"}; }

BeltramiField BeltramiField::constant(Complex k) {
  if (!(std::abs(k) < 1.0)) throw Error(ErrorCode::InvalidArgument, "Beltrami coefficient must have modulus < 1");
  return {[k](Complex) { return k; }, std::abs(k), "sphere"};
}

BeltramiField pullback_beltrami(const SmoothMap& g, const BeltramiField& mu) {
  BeltramiField out;
  const double k = g.dilatation_bound, m = mu.bound;
  out.bound = (k + m) / (1.0 + k * m);
  out.support = "pullback of " + mu.support;
  out.value = [g, mu](Complex z) {
    const Complex fz = g.dz(z);
    const Complex fzbar = g.dzbar ? g.dzbar(z) : Complex(0.0);
    const Complex m_target = mu(g.value(z));
    if (std::abs(fz) == 0.0) return m_target;
    const Complex mu_g = fzbar / fz;
    const Complex theta = std::conj(fz) / fz;
    return (mu_g + m_target * theta) / (1.0 + std::conj(mu_g) * m_target * theta);
  };
  return out;
}

BeltramiField pullback_beltrami(const RealizedMap& g, const BeltramiField& mu) {
  SmoothMap s{[g](Complex z) { return g.eval(z); }, [g](Complex z) { return g.derivative(z); }, nullptr, 0.0};
  return pullback_beltrami(s, mu);
}

BeltramiField derivative_transport(const RealizedMap& g, const BeltramiField& xi) {
  BeltramiField out;
  out.bound = xi.bound;
  out.support = "transport of " + xi.support;
  out.value = [g, xi](Complex w) {
    Complex v, dv;
    g.eval_with_derivative(w, v, dv);
    if (std::abs(dv) == 0.0) return xi(v);
    return xi(v) * std::conj(dv) / dv;
  };
  return out;
}

QuadDiff push_forward(const RealizedMap& g, const QuadDiff& qt, const PushOptions& opts) {
  std::vector<Complex> finite;
  bool infinity = false;
  auto add = [&](const SpherePoint& p) {
    if (p.at_infinity) infinity = true;
    else if (find_pole(finite, p.z) < 0) finite.push_back(p.z);
  };
  for (const auto& v : g.critical_values()) add(v);
  for (const auto& p : qt.pole_points()) add(g(p));

  double sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < finite.size(); ++i)
    for (std::size_t j = i + 1; j < finite.size(); ++j) sep = std::min(sep, std::abs(finite[i] - finite[j]));
  if (sep < opts.min_separation) {
    throw Error(ErrorCode::PoleSeparationTooSmall, "candidate poles closer than " + std::to_string(opts.min_separation));
  }
  const double radius = std::isfinite(sep) ? 0.45 * sep : 0.5;

  // Sum over preimages; `mass` collects the term sizes, which set the scale when terms cancel.
  auto terms = [&](Complex z, double& mass) {
    Complex s{0.0};
    mass = 0.0;
    for (const auto& w : g.preimages(SpherePoint(z))) {
      if (w.at_infinity) continue;
      const Complex dg = g.derivative(w.z);
      const Complex t = qt(w.z) / (dg * dg);
      s += t;
      mass += std::abs(t);
    }
    return s;
  };
  auto q = [&](Complex z) {
    double mass;
    return terms(z, mass);
  };

  QuadDiff out;
  out.pole_at_infinity = infinity;
  for (const Complex p : finite) {
    double scale = 0.0;
    for (int k = 0; k < 32; ++k) {
      double mass;
      terms(p + radius * std::polar(1.0, kTwoPi * k / 32), mass);
      scale = std::max(scale, mass);
    }
    Complex b = quad::contour_residue(q, p, radius, opts.contour_tol * std::max(scale * radius, 1e-300));
    // Residues at roundoff level of the cancelling terms are zero.
    if (std::abs(b) <= 1e3 * opts.contour_tol * scale * radius) b = 0.0;
    out.poles.push_back(p);
    out.coeffs.push_back(b);
  }
  if (out.moment_defect() > 1e-8) {
    throw Error(ErrorCode::ContourQuadratureNonConvergent,
                "push-forward residues violate the moment conditions (defect " + std::to_string(out.moment_defect()) + ")");
  }
  return out;
}

double l1_norm(const QuadDiff& q, const quad::Budget& budget) {
  const auto cells = unit_disk_cells();
  auto inner = [&q](double r, double t) { return Complex(std::abs(q(std::polar(r, t))) * r); };
  auto outer = [&q](double r, double t) { return Complex(std::abs(q.at_infinity_chart(std::polar(r, t))) * r); };
  quad::Budget half = budget;
  half.abs_tol = 0.5 * budget.abs_tol;
  return quad::adaptive_2d(inner, cells, half).value.real() + quad::adaptive_2d(outer, cells, half).value.real();
}

Complex pairing(const BeltramiField& xi, const QuadDiff& q, const quad::Budget& budget) {
  const auto cells = unit_disk_cells();
  auto inner = [&](double r, double t) {
    const Complex z = std::polar(r, t);
    return xi(z) * q(z) * r;
  };
  auto outer = [&](double r, double t) {
    if (r == 0.0) return Complex(0.0);
    const Complex u = std::polar(r, t);
    // dx dy = |u|^-4 dA(u) and q(1/u) = u^4 q_inf(u), leaving the unimodular factor u^2 / conj(u)^2.
    const Complex phase = std::polar(1.0, 2.0 * t) / std::polar(1.0, -2.0 * t);
    return xi(1.0 / u) * q.at_infinity_chart(u) * phase * r;
  };
  return quad::adaptive_2d(inner, cells, budget).value + quad::adaptive_2d(outer, cells, budget).value;
}

ConformalAnnulus ConformalAnnulus::round(Complex center, double r_in, double r_out) {
  return {[center](Complex w, Complex& z, Complex& dz) {
            z = center + w;
            dz = 1.0;
          },
          r_in, r_out};
}

double annulus_mass(const QuadDiff& q, const ConformalAnnulus& a, const quad::Budget& budget) {
  if (!(a.r_out >= a.r_in) || a.r_in < 0.0) throw Error(ErrorCode::InvalidArgument, "annulus radii out of order");
  if (a.r_out == a.r_in) return 0.0;
  // Winding numbers of the boundary images decide whether a pole sits inside the closed annulus.
  constexpr int kSamples = 512;
  auto winding = [&](double r, Complex p, double& closest) {
    double total = 0.0;
    Complex prev, dz;
    a.chart(r, prev, dz);
    closest = std::min(closest, std::abs(prev - p));
    for (int k = 1; k <= kSamples; ++k) {
      Complex z;
      a.chart(std::polar(r, kTwoPi * k / kSamples), z, dz);
      closest = std::min(closest, std::abs(z - p));
      total += std::arg((z - p) / (prev - p));
      prev = z;
    }
    return static_cast<int>(std::lround(total / kTwoPi));
  };
  for (const Complex p : q.poles) {
    double closest = std::numeric_limits<double>::infinity();
    const int w_out = winding(a.r_out, p, closest);
    const int w_in = a.r_in > 0.0 ? winding(a.r_in, p, closest) : 0;
    if (w_out != w_in || closest < 1e-12 * (1.0 + std::abs(p))) {
      throw Error(ErrorCode::PoleInsideAnnulus, "pole lies in the closed annulus");
    }
  }
  return region_mass(q, a, budget);
}

double region_mass(const QuadDiff& q, const ConformalAnnulus& a, const quad::Budget& budget) {
  if (a.r_out <= a.r_in) return 0.0;
  std::vector<quad::Rect> cells;
  for (int k = 0; k < 8; ++k) cells.push_back({a.r_in, a.r_out, kTwoPi * k / 8, kTwoPi * (k + 1) / 8});
  auto f = [&](double r, double t) {
    Complex z, dz;
    a.chart(std::polar(r, t), z, dz);
    return Complex(std::abs(q(z)) * std::norm(dz) * r);
  };
  return quad::adaptive_2d(f, cells, budget).value.real();
}

std::vector<QuadDiff> quad_diff_basis(const std::vector<SpherePoint>& poles) {
  std::vector<Complex> finite;
  bool infinity = false;
  for (const auto& p : poles) {
    if (p.at_infinity) infinity = true;
    else finite.push_back(p.z);
  }
  const std::size_t nref = infinity ? 2 : 3;
  std::vector<QuadDiff> basis;
  if (finite.size() <= nref) return basis;
  for (std::size_t k = nref; k < finite.size(); ++k) {
    std::vector<Complex> pts{finite[k]};
    for (std::size_t r = 0; r < nref; ++r) pts.push_back(finite[r]);
    QuadDiff q;
    q.pole_at_infinity = infinity;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      Complex prod{1.0};
      for (std::size_t j = 0; j < pts.size(); ++j)
        if (j != i) prod *= pts[i] - pts[j];
      q.poles.push_back(pts[i]);
      q.coeffs.push_back(1.0 / prod);
    }
    basis.push_back(std::move(q));
  }
  return basis;
}

Eigen::VectorXcd basis_coordinates(const QuadDiff& q, const std::vector<SpherePoint>& poles, double tol) {
  const auto basis = quad_diff_basis(poles);
  std::vector<Complex> finite;
  bool infinity = false;
  for (const auto& p : poles) {
    if (p.at_infinity) infinity = true;
    else finite.push_back(p.z);
  }
  double scale = 0.0;
  for (const auto b : q.coeffs) scale = std::max(scale, std::abs(b));
  if (q.pole_at_infinity && !infinity && std::abs(q.moments()[2]) > tol * std::max(scale, 1e-300)) {
    throw Error(ErrorCode::InvalidArgument, "differential has a pole at infinity outside the pole set");
  }
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
  const std::size_t nref = infinity ? 2 : 3;
  for (std::size_t j = 0; j < q.poles.size(); ++j) {
    const int at = find_pole(finite, q.poles[j], 1e-7);
    if (at < 0) {
      if (std::abs(q.coeffs[j]) > tol * std::max(scale, 1e-300)) {
        throw Error(ErrorCode::InvalidArgument, "differential has a pole outside the pole set");
      }
      continue;
    }
    const auto k = static_cast<std::size_t>(at);
    if (k < nref) continue;
    c[static_cast<Eigen::Index>(k - nref)] = q.coeffs[j] / basis[k - nref].coeffs[0];
  }
  return c;
}

QuadDiff random_quad_diff(const std::vector<SpherePoint>& poles, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  QuadDiff q;
  for (const auto& b : quad_diff_basis(poles)) add_scaled(q, b, Complex(normal(rng), normal(rng)));
  return q;
}

PushforwardMatrix pushforward_matrix(const RealizedMap& g, const std::vector<SpherePoint>& src,
                                     const std::vector<SpherePoint>& dst, std::uint64_t seed, int directions,
                                     const quad::Budget& budget) {
  PushforwardMatrix out;
  const auto bs = quad_diff_basis(src);
  const auto bd = quad_diff_basis(dst);
  const auto ms = static_cast<Eigen::Index>(bs.size());
  const auto md = static_cast<Eigen::Index>(bd.size());
  out.matrix = Eigen::MatrixXcd::Zero(md, ms);
  if (ms == 0) return out;

  std::vector<QuadDiff> pushed;
  for (Eigen::Index k = 0; k < ms; ++k) {
    pushed.push_back(push_forward(g, bs[static_cast<std::size_t>(k)]));
    if (md > 0) out.matrix.col(k) = basis_coordinates(pushed.back(), dst);
  }

  auto ratio = [&](const Eigen::VectorXcd& c) {
    QuadDiff up, down;
    for (Eigen::Index k = 0; k < ms; ++k) {
      add_scaled(up, bs[static_cast<std::size_t>(k)], c[k]);
      add_scaled(down, pushed[static_cast<std::size_t>(k)], c[k]);
    }
    const double den = l1_norm(up, budget);
    return den > 0.0 ? l1_norm(down, budget) / den : 0.0;
  };

  if (ms == 1) {
    // Every direction of a one-dimensional space is a unimodular multiple of the basis element.
    out.norm_estimate = ratio(Eigen::VectorXcd::Ones(1));
    out.directions = 1;
    return out;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int s = 0; s < directions; ++s) {
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(ms);
    if (s < ms) {
      c[s] = 1.0;
    } else {
      for (Eigen::Index k = 0; k < ms; ++k) c[k] = Complex(normal(rng), normal(rng));
      c.normalize();
    }
    out.norm_estimate = std::max(out.norm_estimate, ratio(c));
    ++out.directions;
  }
  return out;
}

double cauchy_circle_bound(double r, double R, double delta, double eps) {
  const double c = std::min(r - 1.0 - delta, R - delta - r);
  if (!(c > 0.0) || !(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "need 1 + delta < r < R - delta");
  return 2.0 * r * eps / c;
}

QuadDiff quad_diff_from_json(const json& j) {
  json_io::require_only_keys(j, {"poles", "coeffs"}, "quadratic differential");
  std::vector<SpherePoint> poles;
  std::vector<Complex> coeffs;
  for (const auto& p : json_io::require_key(j, "poles", "quadratic differential")) poles.push_back(json_io::point_from_json(p));
  for (const auto& c : json_io::require_key(j, "coeffs", "quadratic differential")) coeffs.push_back(json_io::complex_from_json(c));
  try {
    return make_quad_diff(std::move(poles), std::move(coeffs));
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

json quad_diff_to_json(const QuadDiff& q) {
  json poles = json::array(), coeffs = json::array();
  for (std::size_t j = 0; j < q.poles.size(); ++j) {
    poles.push_back(json_io::complex_to_json(q.poles[j]));
    coeffs.push_back(json_io::complex_to_json(q.coeffs[j]));
  }
  if (q.pole_at_infinity) poles.push_back("inf");
  return json{{"poles", poles}, {"coeffs", coeffs}};
}

}  // namespace thurston
