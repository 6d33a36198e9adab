#include "thurston/hyperbolic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "thurston/error.hpp"
#include "thurston/json_io.hpp"
#include "thurston/pullback.hpp"

namespace thurston {

using json_io::json;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kDiskSamples = 256;

std::vector<SpherePoint> disk_boundary(const RoundDisk& d) {
  std::vector<SpherePoint> out;
  out.reserve(kDiskSamples);
  for (int k = 0; k < kDiskSamples; ++k) {
    out.emplace_back(d.center + d.radius * std::polar(1.0, 2.0 * std::numbers::pi * k / kDiskSamples));
  }
  return out;
}
}  // namespace

std::vector<std::string> validate_curve_spec(const MarkedSet& ms, const CurveSpec& cs) {
  std::vector<std::string> problems;
  std::set<std::size_t> seen;
  for (const auto* block : {&cs.inner, &cs.outer}) {
    for (const auto i : *block) {
      if (i >= ms.points.size()) problems.push_back("index out of range");
      else if (!seen.insert(i).second) problems.push_back("point listed twice");
    }
    if (block->size() < 2) problems.push_back("peripheral curve: a block has fewer than two points");
  }
  if (seen.size() != ms.points.size()) problems.push_back("blocks do not cover the marked set");
  return problems;
}

double round_annulus_modulus(double r, double R) {
  if (!(r > 0.0) || !(R > r)) throw Error(ErrorCode::InvalidArgument, "round annulus needs 0 < r < R");
  return std::log(R / r) / (2.0 * std::numbers::pi);
}

double basic2_bound(Complex T) { return std::log(16.0 * (std::abs(T) + 1.0)) / (2.0 * std::numbers::pi); }

AnnulusFit max_round_annulus(const MarkedSet& ms, const CurveSpec& cs) {
  if (const auto problems = validate_curve_spec(ms, cs); !problems.empty()) {
    throw Error(ErrorCode::InvalidArgument, "curve spec: " + problems.front());
  }
  AnnulusFit best;
  for (const auto i : cs.inner) {
    for (const auto j : cs.outer) {
      const SpherePoint& a = ms.points[i];
      const SpherePoint& b = ms.points[j];
      Mobius m;
      if (a.at_infinity) m = Mobius(0.0, 1.0, 1.0, -b.z);
      else if (b.at_infinity) m = Mobius(1.0, -a.z, 0.0, 1.0);
      else m = Mobius(1.0, -a.z, 1.0, -b.z);
      double r = 0.0, R = kInf;
      for (const auto k : cs.inner) {
        const SpherePoint w = m.apply(ms.points[k]);
        r = std::max(r, w.at_infinity ? kInf : std::abs(w.z));
      }
      for (const auto k : cs.outer) {
        if (k == j) continue;
        const SpherePoint w = m.apply(ms.points[k]);
        if (!w.at_infinity) R = std::min(R, std::abs(w.z));
      }
      if (!(R > r) || r == 0.0 || !std::isfinite(R)) continue;
      const double mod = round_annulus_modulus(r, R);
      if (mod > best.modulus) best = {mod, r, R, m, i, j};
    }
  }
  return best;
}

double basic2_cap(const MarkedSet& ms, const CurveSpec& cs) {
  if (const auto problems = validate_curve_spec(ms, cs); !problems.empty()) {
    throw Error(ErrorCode::InvalidArgument, "curve spec: " + problems.front());
  }
  double cap = kInf;
  for (const auto i0 : cs.inner)
    for (const auto i1 : cs.inner)
      for (const auto j0 : cs.outer)
        for (const auto j1 : cs.outer) {
          if (i0 == i1 || j0 == j1) continue;
          const Mobius m = Mobius::normalizing(ms.points[i0], ms.points[i1], ms.points[j0]);
          const SpherePoint t = m.apply(ms.points[j1]);
          if (t.is_finite()) cap = std::min(cap, basic2_bound(t.z));
        }
  return cap;
}

LengthBracket length_bracket(const MarkedSet& ms, const CurveSpec& cs) {
  const AnnulusFit fit = max_round_annulus(ms, cs);
  if (!(fit.modulus > 0.0)) throw Error(ErrorCode::NoAnnulusFound, "no round annulus separates the clusters");
  const double m = fit.modulus;
  return {std::numbers::pi / (2.0 * (m + 1.0)), std::numbers::pi / m, m};
}

double weight_from_bracket(const LengthBracket& b) { return -std::log(std::sqrt(b.lo * b.hi)); }

CurveWeight curve_weight(const MarkedSet& ms, const CurveSpec& cs) {
  CurveWeight w;
  w.bracket = length_bracket(ms, cs);
  w.weight = weight_from_bracket(w.bracket);
  return w;
}

GeometryCertificate geometry_certificate(const std::vector<SpherePoint>& points, const std::vector<RoundDisk>& disks) {
  GeometryCertificate g;
  g.b_pairwise = points.size() < 2 ? 2.0 : kInf;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      g.b_pairwise = std::min(g.b_pairwise, chordal_distance(points[i], points[j]));

  g.b_point_disk = g.b_disk_disk = g.b_inradius = kInf;
  std::vector<std::vector<SpherePoint>> boundaries;
  for (const auto& d : disks) boundaries.push_back(disk_boundary(d));

  for (std::size_t k = 0; k < disks.size(); ++k) {
    const auto& d = disks[k];
    for (const auto& q : boundaries[k]) g.b_inradius = std::min(g.b_inradius, chordal_distance(SpherePoint(d.center), q));
    for (const auto& p : points) {
      if (p.is_finite() && std::abs(p.z - d.center) <= d.radius) {
        g.b_point_disk = 0.0;
        continue;
      }
      for (const auto& q : boundaries[k]) g.b_point_disk = std::min(g.b_point_disk, chordal_distance(p, q));
    }
    for (std::size_t l = k + 1; l < disks.size(); ++l) {
      if (std::abs(d.center - disks[l].center) <= d.radius + disks[l].radius) {
        g.b_disk_disk = 0.0;
        continue;
      }
      for (const auto& q : boundaries[k])
        for (const auto& s : boundaries[l]) g.b_disk_disk = std::min(g.b_disk_disk, chordal_distance(q, s));
    }
  }
  g.b = std::min({g.b_pairwise, g.b_point_disk, g.b_disk_disk, g.b_inradius});
  return g;
}

GeometryCertificate geometry_certificate(const Configuration& c, const std::vector<RoundDisk>& disks) {
  std::vector<SpherePoint> pts;
  for (const auto& [l, p] : c.positions) pts.push_back(p);
  return geometry_certificate(pts, disks);
}

std::optional<Gap> gap_scan(const std::vector<double>& sorted_weights, double a_min, double width) {
  if (!(width > 0.0)) throw Error(ErrorCode::InvalidArgument, "gap width must be positive");
  Gap g{a_min, a_min + width, false};
  bool jumped_past_last = false;
  for (std::size_t i = 0; i < sorted_weights.size(); ++i) {
    const double l = sorted_weights[i];
    if (l < g.a || (l == g.a && g.left_open)) continue;
    if (l <= g.b) {
      g = {l, l + width, true};
      jumped_past_last = i + 1 == sorted_weights.size();
    } else {
      break;
    }
  }
  if (jumped_past_last) return std::nullopt;
  return g;
}

double cal_bound(double b0, double c0, double M0, int m0) {
  if (!(b0 > 1.0) || !(c0 > 0.0) || !(M0 > 0.0) || m0 < 2) {
    throw Error(ErrorCode::InvalidArgument, "cal_bound needs b0 > 1, c0 > 0, M0 > 0, m0 > 1");
  }
  return std::max(std::pow(b0, m0 - 1) * c0, std::pow(b0, m0) * M0);
}

std::vector<CurveSpec> cluster_curves(std::size_t n, std::size_t cap) {
  std::vector<CurveSpec> out;
  if (n < 4) return out;
  const std::size_t max_inner = n / 2;
  for (std::size_t k = 2; k <= max_inner && out.size() < cap; ++k) {
    if (n - k < 2) break;
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (out.size() < cap) {
      // With equal halves, keep only the block containing point 0 so complements are not repeated.
      if (!(2 * k == n && idx[0] != 0)) {
        CurveSpec cs;
        cs.inner = idx;
        for (std::size_t p = 0; p < n; ++p)
          if (!std::binary_search(idx.begin(), idx.end(), p)) cs.outer.push_back(p);
        out.push_back(std::move(cs));
      }
      std::size_t i = k;
      while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return out;
}

MonitorReport monitor_sequence(const std::vector<double>& x, int m0, std::optional<double> M0) {
  MonitorReport r;
  r.x = x;
  r.m0 = m0;
  if (x.empty()) return r;
  double ratio = 1.0;
  for (std::size_t n = 0; n + 1 < x.size(); ++n) ratio = std::max(ratio, x[n + 1] / x[n]);
  r.b0 = std::max(ratio, 1.0 + 1e-12);
  r.c0 = x.front();
  if (M0) {
    r.M0 = *M0;
  } else {
    double level = *std::min_element(x.begin(), x.end());
    for (std::size_t n = 0; n + static_cast<std::size_t>(m0) < x.size(); ++n)
      if (x[n + static_cast<std::size_t>(m0)] > x[n]) level = std::max(level, x[n] * (1.0 + 1e-12));
    r.M0 = level;
  }
  r.hypotheses_hold = true;
  for (std::size_t n = 0; n + 1 < x.size(); ++n)
    if (x[n + 1] / x[n] > r.b0) r.hypotheses_hold = false;
  for (std::size_t n = 0; n + static_cast<std::size_t>(m0) < x.size(); ++n)
    if (x[n] >= r.M0 && x[n + static_cast<std::size_t>(m0)] > x[n]) r.hypotheses_hold = false;
  r.bound = cal_bound(r.b0, r.c0, r.M0, m0);
  r.holds = std::all_of(x.begin(), x.end(), [&](double v) { return v <= r.bound; });
  return r;
}

std::vector<double> monitor_values(const std::vector<MarkedSet>& sets, std::size_t cap) {
  std::vector<double> out;
  for (const auto& ms : sets) {
    double best = 0.0;
    for (const auto& cs : cluster_curves(ms.points.size(), cap)) {
      const AnnulusFit fit = max_round_annulus(ms, cs);
      if (!(fit.modulus > 0.0)) continue;
      const LengthBracket b{std::numbers::pi / (2.0 * (fit.modulus + 1.0)), std::numbers::pi / fit.modulus,
                            fit.modulus};
      best = std::max(best, std::exp(weight_from_bracket(b)));
    }
    out.push_back(best);
  }
  return out;
}

json certificate_to_json(const GeometryCertificate& g) {
  auto num = [](double v) -> json { return std::isfinite(v) ? json(v) : json(nullptr); };
  return json{{"b_pairwise", num(g.b_pairwise)},
              {"b_point_disk", num(g.b_point_disk)},
              {"b_disk_disk", num(g.b_disk_disk)},
              {"b_inradius", num(g.b_inradius)},
              {"b", num(g.b)}};
}

MarkedSet marked_set_from_json(const json& j) {
  MarkedSet ms;
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "marked set must be an object");
  if (j.contains("positions")) {
    for (const auto& [l, v] : j.at("positions").items()) {
      ms.labels.push_back(l);
      ms.points.push_back(json_io::point_from_json(v));
    }
  } else {
    for (const auto& v : json_io::require_key(j, "points", "marked set")) ms.points.push_back(json_io::point_from_json(v));
    if (j.contains("labels")) {
      for (const auto& l : j.at("labels")) ms.labels.push_back(l.get<std::string>());
    }
  }
  if (j.contains("role")) ms.role = j.at("role").get<std::string>();
  return ms;
}

}  // namespace thurston
