#include "thurston/pullback.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

#include "thurston/error.hpp"
#include "thurston/hyperbolic.hpp"
#include "thurston/json_io.hpp"

namespace thurston {

using json_io::json;

const SpherePoint& Configuration::at(const Label& l) const {
  const auto it = positions.find(l);
  if (it == positions.end()) throw Error(ErrorCode::LabelMismatch, "configuration has no label '" + l + "'");
  return it->second;
}

Configuration normalize(const Portrait& p, const Configuration& c) {
  const Mobius m = Mobius::normalizing(c.at(p.anchors[0]), c.at(p.anchors[1]), c.at(p.anchors[2]));
  Configuration out = c;
  for (auto& [l, pos] : out.positions) pos = m.apply(pos);
  out.positions[p.anchors[0]] = SpherePoint(0.0);
  out.positions[p.anchors[1]] = SpherePoint(1.0);
  out.positions[p.anchors[2]] = SpherePoint::infinity();
  out.anchor_normalized = true;
  return out;
}

bool anchors_in_place(const Portrait& p, const Configuration& c) {
  return c.at(p.anchors[0]) == SpherePoint(0.0) && c.at(p.anchors[1]) == SpherePoint(1.0) &&
         c.at(p.anchors[2]).at_infinity;
}

namespace {

using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;

double max_abs(const VecC& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

struct CycleSpec {
  std::vector<Label> labels;
  Complex lambda;
};

// The square polynomial system whose solution realizes a portrait at a configuration.
class System {
 public:
  System(const Portrait& p, const PullbackOptions& opts) : p_(p) {
    const auto report = validate(p);
    if (!report.passed()) {
      throw Error(ErrorCode::UnsupportedPortrait, "portrait fails validation: " + report.violations.front().invariant);
    }
    d_ = p.degree;
    const Label& linf = p.anchors[2];
    polynomial_ = p.local_degree_of(linf) == d_ && p.image(linf) == linf;
    if (polynomial_ && d_ > opts.max_polynomial_degree) {
      throw Error(ErrorCode::UnsupportedPortrait, "polynomial degree above the configured cap");
    }
    if (!polynomial_ && d_ != 2) throw Error(ErrorCode::UnsupportedPortrait, "rational portraits must have degree 2");
    ncoef_ = polynomial_ ? d_ + 1 : 6;

    pinned_[p.anchors[0]] = SpherePoint(0.0);
    pinned_[p.anchors[1]] = SpherePoint(1.0);
    pinned_[linf] = SpherePoint::infinity();

    int slot = ncoef_;
    for (const auto& c : p.critical_labels()) {
      if (polynomial_ && c == linf) continue;
      crit_.push_back(c);
      if (!pinned_.count(c)) crit_slot_[c] = slot++;
      if (p.in_attracting_cycle(p.image(c))) captured_.insert(c);
    }
    for (const auto& t : p.cycle_tags) {
      if (t.kind != CycleKind::Attracting) continue;
      int captures = 0;
      for (const auto& c : captured_) {
        const auto& img = p.image(c);
        if (std::find(t.cycle.begin(), t.cycle.end(), img) != t.cycle.end()) ++captures;
      }
      if (captures != 1) {
        throw Error(ErrorCode::UnsupportedPortrait,
                    "each attracting cycle needs exactly one critical label mapped into it, found " +
                        std::to_string(captures));
      }
      cycles_.push_back({t.cycle, t.lambda});
      for (const auto& l : t.cycle) cycle_slot_[l] = slot++;
    }
    n_ = slot;
  }

  int size() const { return n_; }
  int ncoef() const { return ncoef_; }
  bool polynomial() const { return polynomial_; }
  const Portrait& portrait() const { return p_; }
  bool is_critical(const Label& l) const {
    return std::find(crit_.begin(), crit_.end(), l) != crit_.end() || (polynomial_ && l == p_.anchors[2]);
  }
  bool is_cycle(const Label& l) const { return cycle_slot_.count(l) > 0; }
  bool is_captured(const Label& l) const { return captured_.count(l) > 0; }
  const std::set<Label>& captured() const { return captured_; }

  // Fixes the normalization functional sum conj(s_k) u_k = 1 of the homogeneous rational case.
  void set_normalization(const VecC& coeffs) {
    const double n2 = coeffs.squaredNorm();
    norm_ = n2 > 0 ? VecC(coeffs / n2) : VecC(coeffs);
  }

  Polynomial num(const VecC& u) const {
    const int k = polynomial_ ? ncoef_ : 3;
    return Polynomial(std::vector<Complex>(u.data(), u.data() + k));
  }
  Polynomial den(const VecC& u) const {
    if (polynomial_) return Polynomial({1.0});
    return Polynomial(std::vector<Complex>(u.data() + 3, u.data() + 6));
  }

  SpherePoint upstairs(const Label& l, const VecC& u) const {
    if (const auto it = pinned_.find(l); it != pinned_.end()) return it->second;
    if (const auto it = crit_slot_.find(l); it != crit_slot_.end()) return SpherePoint(u[it->second]);
    if (const auto it = cycle_slot_.find(l); it != cycle_slot_.end()) return SpherePoint(u[it->second]);
    throw Error(ErrorCode::InvalidArgument, "label '" + l + "' is not an unknown of the system");
  }

  VecC residual(const VecC& u, const Configuration& x) const {
    std::vector<Complex> r;
    r.reserve(static_cast<std::size_t>(n_));
    const Polynomial n = num(u), d = den(u);
    const Polynomial dn = n.derivative(), dd = d.derivative();
    const Polynomial w = dn * d - n * dd;

    auto value_eq = [&](const SpherePoint& at, const SpherePoint& target) {
      Complex nv, dv;
      if (at.at_infinity) {
        nv = n.coeff(2);
        dv = d.coeff(2);
      } else {
        nv = n(at.z);
        dv = d(at.z);
      }
      if (target.at_infinity) {
        r.push_back(dv);
      } else if (std::abs(target.z) <= 1.0) {
        r.push_back(nv - target.z * dv);
      } else {
        r.push_back(nv / target.z - dv);
      }
    };

    for (const auto& c : crit_) {
      const SpherePoint at = upstairs(c, u);
      const int m = p_.local_degree_of(c);
      if (polynomial_) {
        Polynomial der = n;
        for (int j = 1; j < m; ++j) {
          der = der.derivative();
          r.push_back(der(at.z));
        }
      } else if (at.at_infinity) {
        r.push_back(n.coeff(1) * d.coeff(2) - n.coeff(2) * d.coeff(1));
      } else {
        r.push_back(w(at.z));
      }
      if (!captured_.count(c)) value_eq(at, x.at(p_.image(c)));
    }
    for (int k = 0; k < 3; ++k) {
      const Label& a = p_.anchors[static_cast<std::size_t>(k)];
      if (is_critical(a)) continue;
      if (polynomial_ && k == 2) continue;
      value_eq(pinned_.at(a), x.at(p_.image(a)));
    }
    for (const auto& cyc : cycles_) {
      Complex mult{1.0};
      const std::size_t len = cyc.labels.size();
      for (std::size_t i = 0; i < len; ++i) {
        const Complex z = upstairs(cyc.labels[i], u).z;
        const Complex znext = upstairs(cyc.labels[(i + 1) % len], u).z;
        const Complex dz = d(z);
        r.push_back(n(z) - znext * dz);
        mult *= w(z) / (dz * dz);
      }
      r.push_back(mult - cyc.lambda);
    }
    if (!polynomial_) {
      Complex s{0.0};
      for (int k = 0; k < 6; ++k) s += std::conj(norm_[k]) * u[k];
      r.push_back(s - 1.0);
    }
    if (static_cast<int>(r.size()) != n_) {
      throw Error(ErrorCode::UnsupportedPortrait, "portrait yields " + std::to_string(r.size()) + " equations for " +
                                                      std::to_string(n_) + " unknowns");
    }
    return Eigen::Map<VecC>(r.data(), static_cast<Eigen::Index>(r.size()));
  }

  // Unknown vector from a coefficient guess plus the current positions of critical and cycle labels.
  VecC assemble(const VecC& coeffs, const Configuration& guess) const {
    VecC u(n_);
    u.head(ncoef_) = coeffs;
    for (const auto& [l, s] : crit_slot_) u[s] = guess.at(l).z;
    for (const auto& [l, s] : cycle_slot_) u[s] = guess.at(l).z;
    return u;
  }

  // Linear least-squares coefficient seed from the current positions.
  VecC seed_coefficients(const Configuration& x) const {
    std::vector<std::vector<Complex>> rows;
    std::vector<Complex> rhs;
    auto guess = [&](const Label& l) -> SpherePoint {
      const auto it = pinned_.find(l);
      return it != pinned_.end() ? it->second : x.at(l);
    };
    auto powers = [&](const SpherePoint& at, int deriv) {
      std::vector<Complex> row(static_cast<std::size_t>(polynomial_ ? ncoef_ : 3), 0.0);
      const int top = static_cast<int>(row.size()) - 1;
      if (at.at_infinity) {
        // Coefficients of the top homogeneous terms: value uses z^top, first derivative z^(top-1).
        row[static_cast<std::size_t>(top - deriv)] = 1.0;
        return row;
      }
      for (int k = deriv; k <= top; ++k) {
        double falling = 1.0;
        for (int j = 0; j < deriv; ++j) falling *= k - j;
        row[static_cast<std::size_t>(k)] = falling * std::pow(at.z, k - deriv);
      }
      return row;
    };
    auto add_value = [&](const SpherePoint& at, const SpherePoint& target, int deriv) {
      const auto pw = powers(at, deriv);
      if (polynomial_) {
        if (target.at_infinity) return;
        rows.push_back(pw);
        rhs.push_back(deriv == 0 ? target.z : Complex(0.0));
        return;
      }
      std::vector<Complex> row(6, 0.0);
      for (int k = 0; k < 3; ++k) {
        if (target.at_infinity) {
          row[static_cast<std::size_t>(k + 3)] = pw[static_cast<std::size_t>(k)];
        } else {
          row[static_cast<std::size_t>(k)] = pw[static_cast<std::size_t>(k)];
          row[static_cast<std::size_t>(k + 3)] = -target.z * pw[static_cast<std::size_t>(k)];
        }
      }
      rows.push_back(row);
      rhs.push_back(0.0);
    };

    for (const auto& c : crit_) {
      const SpherePoint at = guess(c);
      const SpherePoint target = x.at(p_.image(c));
      const int m = p_.local_degree_of(c);
      for (int j = 1; j < m; ++j) add_value(at, target, j);
      if (!captured_.count(c)) add_value(at, target, 0);
    }
    for (const auto& l : p_.marked) {
      if (is_critical(l) || is_cycle(l)) continue;
      add_value(guess(l), x.at(p_.image(l)), 0);
    }
    for (const auto& cyc : cycles_)
      for (std::size_t i = 0; i < cyc.labels.size(); ++i)
        add_value(x.at(cyc.labels[i]), x.at(cyc.labels[(i + 1) % cyc.labels.size()]), 0);

    const auto m = static_cast<Eigen::Index>(rows.size());
    const auto k = static_cast<Eigen::Index>(rows.empty() ? ncoef_ : rows.front().size());
    MatC a(m, k);
    VecC b(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      double scale = 0.0;
      for (Eigen::Index j = 0; j < k; ++j) scale = std::max(scale, std::abs(rows[i][j]));
      if (scale == 0.0) scale = 1.0;
      for (Eigen::Index j = 0; j < k; ++j) a(i, j) = rows[i][j] / scale;
      b[i] = rhs[i] / scale;
    }
    if (polynomial_) {
      VecC coeffs = m > 0 ? VecC(a.completeOrthogonalDecomposition().solve(b)) : VecC::Zero(ncoef_);
      if (std::abs(coeffs[ncoef_ - 1]) < 1e-8) coeffs[ncoef_ - 1] = 1.0;
      return coeffs;
    }
    if (m == 0) {
      VecC coeffs = VecC::Zero(6);
      coeffs[2] = 1.0;
      coeffs[3] = 1.0;
      return coeffs;
    }
    Eigen::JacobiSVD<MatC> svd(a, Eigen::ComputeFullV);
    return svd.matrixV().col(5);
  }

  MapSolution finish(const VecC& u, double residual, int iterations) const {
    MapSolution s;
    Polynomial n = num(u), d = den(u);
    if (!polynomial_) {
      double scale = 0.0;
      for (int k = 0; k < 6; ++k) scale = std::max(scale, std::abs(u[k]));
      std::vector<Complex> nc(n.coeffs()), dc(d.coeffs());
      for (auto* v : {&nc, &dc})
        for (auto& c : *v)
          if (std::abs(c) < 1e-14 * scale) c = 0.0;
      n = Polynomial(nc);
      d = Polynomial(dc);
    }
    try {
      s.map = RealizedMap(n, d);
    } catch (const Error& e) {
      throw Error(ErrorCode::DegenerateConfiguration, std::string("solved map is degenerate: ") + e.what());
    }
    if (s.map.degree() != d_) throw Error(ErrorCode::DegenerateConfiguration, "solved map dropped degree");
    if (!polynomial_ && s.map.common_factor_gap() < 1e-9) {
      throw Error(ErrorCode::DegenerateConfiguration, "solved map has a common factor");
    }
    for (const auto& c : crit_) s.critical[c] = upstairs(c, u);
    if (polynomial_) s.critical[p_.anchors[2]] = SpherePoint::infinity();
    for (const auto& [l, slot] : cycle_slot_) s.cycle[l] = SpherePoint(u[slot]);
    s.residual = residual;
    s.newton_iterations = iterations;
    s.unknowns.assign(u.data(), u.data() + u.size());
    return s;
  }

 private:
  const Portrait& p_;
  int d_ = 2;
  bool polynomial_ = true;
  int ncoef_ = 3;
  int n_ = 0;
  std::map<Label, SpherePoint> pinned_;
  std::vector<Label> crit_;
  std::map<Label, int> crit_slot_;
  std::map<Label, int> cycle_slot_;
  std::set<Label> captured_;
  std::vector<CycleSpec> cycles_;
  VecC norm_;
};

void check_separation(const Configuration& c, double eps) {
  for (auto i = c.positions.begin(); i != c.positions.end(); ++i)
    for (auto j = std::next(i); j != c.positions.end(); ++j)
      if (chordal_distance(i->second, j->second) < eps) {
        throw Error(ErrorCode::DegenerateConfiguration, "labels '" + i->first + "' and '" + j->first + "' collide");
      }
}

VecC newton(const System& sys, const Configuration& x, VecC u, const PullbackOptions& opts, double& residual,
            int& iterations) {
  VecC r = sys.residual(u, x);
  double norm = max_abs(r);
  const auto n = u.size();
  for (iterations = 0; iterations < opts.newton_max_iter; ++iterations) {
    if (norm <= opts.newton_tol) break;
    MatC jac(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double h = 1e-6 * (1.0 + std::abs(u[k]));
      VecC up = u, um = u;
      up[k] += h;
      um[k] -= h;
      jac.col(k) = (sys.residual(up, x) - sys.residual(um, x)) / (2.0 * h);
    }
    const VecC delta = jac.fullPivLu().solve(-r);
    if (!delta.allFinite()) throw Error(ErrorCode::NewtonDivergence, "singular Jacobian");
    double t = 1.0;
    VecC cand;
    VecC rc;
    double nc = std::numeric_limits<double>::infinity();
    for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
      cand = u + t * delta;
      rc = sys.residual(cand, x);
      nc = max_abs(rc);
      if (std::isfinite(nc) && nc < (1.0 - 1e-4 * t) * norm) break;
    }
    if (!(nc < norm)) {
      // No descent: we are at the rounding floor of the residual or Newton has failed.
      if (norm <= 1e3 * opts.newton_tol) break;
      throw Error(ErrorCode::NewtonDivergence, "line search failed at residual " + std::to_string(norm));
    }
    u = cand;
    r = rc;
    norm = nc;
  }
  residual = norm;
  if (!(norm <= 1e3 * opts.newton_tol)) {
    throw Error(ErrorCode::NewtonDivergence, "residual " + std::to_string(norm) + " after " +
                                                 std::to_string(iterations) + " iterations");
  }
  return u;
}

MapSolution solve_with(System& sys, const Configuration& c, const VecC* seed_unknowns,
                       const PullbackOptions& opts) {
  check_separation(c, opts.collision_eps);
  VecC u;
  if (seed_unknowns != nullptr && seed_unknowns->size() == sys.size()) {
    u = *seed_unknowns;
  } else {
    u = sys.assemble(sys.seed_coefficients(c), c);
  }
  if (!sys.polynomial()) sys.set_normalization(u.head(sys.ncoef()));
  double residual = 0.0;
  int iterations = 0;
  u = newton(sys, c, u, opts, residual, iterations);
  return sys.finish(u, residual, iterations);
}

}  // namespace

MapSolution solve_map_detailed(const Portrait& p, const Configuration& c, const MapSolution* seed,
                               const PullbackOptions& opts) {
  System sys(p, opts);
  if (seed != nullptr && !seed->unknowns.empty()) {
    VecC u = Eigen::Map<const VecC>(seed->unknowns.data(), static_cast<Eigen::Index>(seed->unknowns.size()));
    return solve_with(sys, c, &u, opts);
  }
  return solve_with(sys, c, nullptr, opts);
}

RealizedMap solve_map(const Portrait& p, const Configuration& c, const std::optional<RealizedMap>& seed,
                      const PullbackOptions& opts) {
  System sys(p, opts);
  if (!seed) return solve_with(sys, c, nullptr, opts).map;
  VecC coeffs(sys.ncoef());
  if (sys.polynomial()) {
    for (int k = 0; k < sys.ncoef(); ++k) coeffs[k] = seed->num().coeff(static_cast<std::size_t>(k)) / seed->den().coeff(0);
  } else {
    for (int k = 0; k < 3; ++k) {
      coeffs[k] = seed->num().coeff(static_cast<std::size_t>(k));
      coeffs[k + 3] = seed->den().coeff(static_cast<std::size_t>(k));
    }
  }
  const VecC u = sys.assemble(coeffs, c);
  return solve_with(sys, c, &u, opts).map;
}

double distance_proxy(const Configuration& a, const Configuration& b) {
  if (a.positions.size() != b.positions.size()) throw Error(ErrorCode::LabelMismatch, "label sets differ");
  double best = 0.0;
  for (const auto& [l, pa] : a.positions) {
    const auto it = b.positions.find(l);
    if (it == b.positions.end()) throw Error(ErrorCode::LabelMismatch, "label '" + l + "' missing");
    best = std::max(best, chordal_distance(pa, it->second));
  }
  return best;
}

namespace {

// Straight-line interpolation of two configurations with the same point at infinity.
Positions interpolate(const Positions& a, const Positions& b, double t) {
  Positions out;
  for (const auto& [l, pa] : a) {
    const SpherePoint& pb = b.at(l);
    if (pa.at_infinity || pb.at_infinity) {
      if (!(pa.at_infinity && pb.at_infinity)) {
        throw Error(ErrorCode::DegenerateConfiguration, "label '" + l + "' crosses infinity along the path");
      }
      out[l] = SpherePoint::infinity();
    } else {
      out[l] = SpherePoint(pa.z + t * (pb.z - pa.z));
    }
  }
  return out;
}

double min_separation(const Positions& pos) {
  double best = std::numeric_limits<double>::infinity();
  for (auto i = pos.begin(); i != pos.end(); ++i)
    for (auto j = std::next(i); j != pos.end(); ++j) best = std::min(best, chordal_distance(i->second, j->second));
  return best;
}

double planar_min_separation(const Positions& pos) {
  double best = std::numeric_limits<double>::infinity();
  for (auto i = pos.begin(); i != pos.end(); ++i)
    for (auto j = std::next(i); j != pos.end(); ++j)
      if (i->second.is_finite() && j->second.is_finite()) best = std::min(best, std::abs(i->second.z - j->second.z));
  return best;
}

// Distance of point m from the segment [a, b] in the product of the finite coordinates.
double segment_distance(const Positions& a, const Positions& b, const Positions& m) {
  double ab2 = 0.0, am_ab = 0.0;
  for (const auto& [l, pa] : a) {
    if (pa.at_infinity) continue;
    const Complex ab = b.at(l).z - pa.z, am = m.at(l).z - pa.z;
    ab2 += std::norm(ab);
    am_ab += (std::conj(ab) * am).real();
  }
  const double t = ab2 > 0.0 ? std::clamp(am_ab / ab2, 0.0, 1.0) : 0.0;
  double worst = 0.0;
  for (const auto& [l, pa] : a) {
    if (pa.at_infinity) continue;
    const Complex on = pa.z + t * (b.at(l).z - pa.z);
    worst = std::max(worst, std::abs(m.at(l).z - on));
  }
  return worst;
}

void douglas_peucker(const std::vector<Positions>& path, std::size_t i, std::size_t j, double tol,
                     std::vector<bool>& keep) {
  if (j <= i + 1) return;
  double worst = -1.0;
  std::size_t at = i;
  for (std::size_t k = i + 1; k < j; ++k) {
    const double d = segment_distance(path[i], path[j], path[k]);
    if (d > worst) {
      worst = d;
      at = k;
    }
  }
  if (worst > tol) {
    keep[at] = true;
    douglas_peucker(path, i, at, tol, keep);
    douglas_peucker(path, at, j, tol, keep);
  }
}

std::vector<Positions> simplify(const std::vector<Positions>& path) {
  if (path.size() <= 2) return path;
  const double tol = 0.05 * planar_min_separation(path.back());
  std::vector<bool> keep(path.size(), false);
  keep.front() = keep.back() = true;
  douglas_peucker(path, 0, path.size() - 1, tol, keep);
  std::vector<Positions> out;
  for (std::size_t k = 0; k < path.size(); ++k)
    if (keep[k]) out.push_back(path[k]);
  return out;
}

class Lifter {
 public:
  Lifter(const System& sys, const PullbackOptions& opts) : sys_(sys), opts_(opts) {}

  // Chooses new positions for the map solved at downstairs positions y, continuing from `prev`.
  // In strict mode, returns false when the continuation is not clearly determined.
  bool select(const Positions& y, const MapSolution& s, const Positions& prev, Positions& out, bool strict) const {
    const Portrait& p = sys_.portrait();
    out.clear();
    const double sep = min_separation(prev);
    for (const auto& l : p.marked) {
      if (const auto it = s.critical.find(l); it != s.critical.end()) {
        out[l] = it->second;
      } else if (const auto jt = s.cycle.find(l); jt != s.cycle.end()) {
        out[l] = jt->second;
      } else {
        const auto cands = s.map.preimages(y.at(p.image(l)));
        const SpherePoint& from = prev.at(l);
        double d1 = std::numeric_limits<double>::infinity(), d2 = d1;
        SpherePoint best;
        for (const auto& c : cands) {
          const double d = chordal_distance(c, from);
          if (d < d1) {
            d2 = d1;
            d1 = d;
            best = c;
          } else if (d < d2) {
            d2 = d;
          }
        }
        if (strict && 3.0 * d1 > d2) return false;
        out[l] = best;
        continue;
      }
      if (strict && chordal_distance(out[l], prev.at(l)) > 0.25 * sep) return false;
    }
    return min_separation(out) >= opts_.collision_eps;
  }

  // Lifts the path y[0..] starting from upstairs positions u0 and the solution at y[0].
  std::vector<Positions> lift(const std::vector<Positions>& y, const Positions& u0, MapSolution s0,
                              MapSolution& s_end) {
    std::vector<Positions> out{u0};
    Positions u = u0;
    MapSolution s = std::move(s0);
    for (std::size_t k = 0; k + 1 < y.size(); ++k) segment(y[k], y[k + 1], 0, u, s, out);
    s_end = std::move(s);
    return out;
  }

 private:
  void segment(const Positions& ya, const Positions& yb, int depth, Positions& u, MapSolution& s,
               std::vector<Positions>& out) {
    constexpr int kMaxDepth = 24;
    Configuration cb;
    cb.positions = yb;
    std::optional<MapSolution> sb;
    try {
      sb = solve_map_detailed(sys_.portrait(), cb, &s, opts_);
    } catch (const Error& e) {
      if (depth >= kMaxDepth || (e.code() != ErrorCode::NewtonDivergence && e.code() != ErrorCode::DegenerateConfiguration)) {
        throw;
      }
    }
    Positions ub;
    if (sb && select(yb, *sb, u, ub, true)) {
      out.push_back(ub);
      u = std::move(ub);
      s = std::move(*sb);
      return;
    }
    if (depth >= kMaxDepth) {
      throw Error(ErrorCode::BranchCollision, "preimages could not be separated along the lifted path");
    }
    const Positions mid = interpolate(ya, yb, 0.5);
    segment(ya, mid, depth + 1, u, s, out);
    segment(mid, yb, depth + 1, u, s, out);
  }

  const System& sys_;
  const PullbackOptions& opts_;
};

}  // namespace

StepResult pull_back_step(const Portrait& p, const Configuration& c, const MapSolution& g, const BranchTable& bt,
                          const PullbackOptions& opts) {
  System sys(p, opts);
  Lifter lifter(sys, opts);
  StepResult res;
  res.solution = g;
  std::vector<Positions> lifted;
  if (bt.path.empty()) {
    Positions hints = c.positions;
    for (const auto& [l, h] : bt.hints)
      if (hints.count(l)) hints[l] = h;
    Positions next;
    if (!lifter.select(c.positions, g, hints, next, false)) {
      throw Error(ErrorCode::BranchCollision, "initial branch choice sends two labels to the same preimage");
    }
    lifted = {c.positions, next};
    res.table.path_start_solution = g;
  } else {
    MapSolution start;
    if (bt.path_start_solution) {
      start = *bt.path_start_solution;
    } else {
      Configuration c0;
      c0.positions = bt.path.front();
      start = solve_map_detailed(p, c0, &g, opts);
    }
    MapSolution end;
    lifted = lifter.lift(bt.path, c.positions, start, end);
    res.table.path_start_solution = end;
  }

  for (auto& node : lifted) {
    Configuration tmp;
    tmp.positions = node;
    node = normalize(p, tmp).positions;
  }
  res.config.positions = lifted.back();
  res.config.anchor_normalized = true;
  res.config.disk_radii = c.disk_radii;
  res.path_nodes = static_cast<int>(lifted.size());

  if (bt.path.empty()) {
    // Straight segment from the current configuration to its first lift.
    constexpr int kSegments = 8;
    for (int k = 0; k <= kSegments; ++k) res.table.path.push_back(interpolate(lifted[0], lifted[1], double(k) / kSegments));
  } else {
    res.table.path = simplify(lifted);
  }
  return res;
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Converged: return "Converged";
    case Outcome::Degenerated: return "Degenerated";
    case Outcome::Timeout: return "Timeout";
  }
  return "Timeout";
}

double iteration_certificate(const Configuration& c) {
  std::vector<SpherePoint> pts;
  for (const auto& [l, pos] : c.positions) pts.push_back(pos);
  return geometry_certificate(pts, {}).b;
}

IterationOutcome iterate(const Portrait& p, const Configuration& c0, const BranchTable& bt0,
                         const PullbackOptions& opts) {
  IterationOutcome out;
  Configuration c = c0;
  BranchTable bt = bt0;
  if (!c0.anchor_normalized || !anchors_in_place(p, c0)) {
    const Mobius m = Mobius::normalizing(c0.at(p.anchors[0]), c0.at(p.anchors[1]), c0.at(p.anchors[2]));
    c = normalize(p, c0);
    for (auto& [l, h] : bt.hints) h = m.apply(h);
  }
  out.trace.push_back({0, c.positions, iteration_certificate(c), 0.0, 0.0});
  if (out.trace.back().b < opts.collapse_eps) {
    out.outcome = Outcome::Degenerated;
    out.config = c;
    return out;
  }
  MapSolution s = solve_map_detailed(p, c, nullptr, opts);
  int stable = 0;
  for (int n = 1; n <= opts.max_iter; ++n) {
    StepResult step = pull_back_step(p, c, s, bt, opts);
    TraceRecord rec;
    rec.iter = n;
    rec.positions = step.config.positions;
    rec.b = iteration_certificate(step.config);
    rec.delta = distance_proxy(c, step.config);
    rec.newton_residual = s.residual;
    out.trace.push_back(rec);
    c = std::move(step.config);
    bt = std::move(step.table);
    out.config = c;
    if (rec.b < opts.collapse_eps) {
      out.outcome = Outcome::Degenerated;
      return out;
    }
    stable = rec.delta < opts.tol ? stable + 1 : 0;
    s = solve_map_detailed(p, c, &s, opts);
    if (stable >= opts.stable_steps) {
      out.outcome = Outcome::Converged;
      out.map = s.map;
      return out;
    }
  }
  out.outcome = Outcome::Timeout;
  return out;
}

double orbit_defect(const Portrait& p, const Configuration& c, const RealizedMap& g) {
  const auto cap = [&](const Label& l) { return p.local_degree_of(l) > 1 && p.in_attracting_cycle(p.image(l)); };
  double worst = 0.0;
  for (const auto& l : p.marked) {
    if (cap(l)) continue;
    worst = std::max(worst, chordal_distance(g(c.at(l)), c.at(p.image(l))));
  }
  return worst;
}

json positions_to_json(const Positions& pos) {
  json j = json::object();
  for (const auto& [l, x] : pos) j[l] = json_io::point_to_json(x);
  return j;
}

Configuration configuration_from_json(const json& j) {
  json_io::require_only_keys(j, {"positions", "disk_radii"}, "configuration");
  Configuration c;
  const auto& pos = json_io::require_key(j, "positions", "configuration");
  if (!pos.is_object()) throw Error(ErrorCode::ParseError, "configuration: positions must be an object");
  for (const auto& [l, v] : pos.items()) c.positions[l] = json_io::point_from_json(v);
  if (j.contains("disk_radii")) {
    try {
      for (const auto& [k, v] : j.at("disk_radii").items()) c.disk_radii[k] = v.get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, std::string("configuration: ") + e.what());
    }
  }
  return c;
}

json configuration_to_json(const Configuration& c) {
  json j{{"positions", positions_to_json(c.positions)}};
  if (!c.disk_radii.empty()) j["disk_radii"] = c.disk_radii;
  return j;
}

BranchTable branch_table_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "branch hints must be an object");
  BranchTable bt;
  for (const auto& [l, v] : j.items()) bt.hints[l] = json_io::point_from_json(v);
  return bt;
}

json trace_record_to_json(const TraceRecord& r) {
  return json{{"iter", r.iter},
              {"positions", positions_to_json(r.positions)},
              {"b", r.b},
              {"delta", r.delta},
              {"newton_residual", r.newton_residual}};
}

}  // namespace thurston
