#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "support.hpp"
#include "thurston/error.hpp"
#include "thurston/hyperbolic.hpp"
#include "thurston/pullback.hpp"

using namespace thurston;

namespace {

constexpr double kPi = std::numbers::pi;

MarkedSet marked(std::vector<SpherePoint> pts) {
  MarkedSet ms;
  ms.points = std::move(pts);
  return ms;
}

MarkedSet epsilon_set(double eps) { return marked({Complex(0), Complex(eps), Complex(1), SpherePoint::infinity()}); }

const CurveSpec kAroundFirstTwo{{0, 1}, {2, 3}};

// Sequences obeying x_0 <= c0, x_{n+1} <= b0 x_n, and x_{n+m0} <= x_n whenever x_n >= M0. The generator
// is biased upward so that the constraints bind; with `respect_return` false the third rule is dropped.
std::vector<double> simulate(std::mt19937_64& rng, double b0, double c0, double M0, int m0, int length,
                             bool respect_return) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x{c0 * (0.5 + 0.5 * u(rng))};
  for (int n = 1; n < length; ++n) {
    double upper = b0 * x.back();
    if (respect_return && n >= m0 && x[n - m0] >= M0) upper = std::min(upper, x[n - m0]);
    x.push_back(std::max(u(rng) < 0.7 ? upper : upper * u(rng), 1e-300));
  }
  return x;
}

}  // namespace

TEST(Hyperbolic, RoundAnnulusModulusClosedForms) {
  EXPECT_NEAR(round_annulus_modulus(1.0, std::exp(2 * kPi)), 1.0, 1e-14);
  EXPECT_NEAR(round_annulus_modulus(2.0, 2.0 * std::exp(2 * kPi)), 1.0, 1e-14);
  EXPECT_NEAR(round_annulus_modulus(1.0, 16.0), std::log(16.0) / (2 * kPi), 1e-15);
}

TEST(Hyperbolic, Basic2BoundClosedFormsAndMonotone) {
  EXPECT_NEAR(basic2_bound(0.0), std::log(16.0) / (2 * kPi), 1e-15);
  EXPECT_NEAR(basic2_bound(15.0), 4 * std::log(2.0) / kPi, 1e-14);
  double prev = 0.0;
  for (double t = 0.0; t < 100.0; t += 0.37) {
    const double b = basic2_bound(std::polar(t, t));
    EXPECT_GE(b, prev);
    prev = b;
  }
}

TEST(Hyperbolic, MaxRoundAnnulusOracles) {
  const AnnulusFit thin = max_round_annulus(epsilon_set(1e-4), kAroundFirstTwo);
  EXPECT_NEAR(thin.modulus, std::log(1e4) / (2 * kPi), 0.1 * std::log(1e4) / (2 * kPi));
  const AnnulusFit half = max_round_annulus(epsilon_set(0.5), kAroundFirstTwo);
  EXPECT_NEAR(half.modulus, std::log(2.0) / (2 * kPi), 1e-12);
}

TEST(Hyperbolic, MaxRoundAnnulusIsMobiusInvariant) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  const MarkedSet base = marked({Complex(0), Complex(0.05, 0.02), Complex(1), Complex(-0.7, 1.3), Complex(2, -1)});
  const CurveSpec cs{{0, 1}, {2, 3, 4}};
  const double m0 = max_round_annulus(base, cs).modulus;
  for (int trial = 0; trial < 20; ++trial) {
    const Mobius m(Complex(n(rng), n(rng)), Complex(n(rng), n(rng)), Complex(n(rng), n(rng)), Complex(n(rng), n(rng)));
    MarkedSet moved;
    for (const auto& p : base.points) moved.points.push_back(m.apply(p));
    EXPECT_NEAR(max_round_annulus(moved, cs).modulus, m0, 0.05 * m0);
  }
}

TEST(Hyperbolic, EveryFoundAnnulusRespectsBasic2) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t count = 4 + trial % 4;
    std::vector<SpherePoint> pts;
    for (std::size_t i = 0; i < count; ++i) pts.push_back(Complex(n(rng), n(rng)) * (i < 2 ? 0.1 : 1.0));
    const MarkedSet ms = marked(pts);
    for (const CurveSpec& cs : cluster_curves(count)) {
      const AnnulusFit fit = max_round_annulus(ms, cs);
      EXPECT_LE(fit.modulus, basic2_cap(ms, cs) + 1e-12);
    }
  }
}

TEST(Hyperbolic, LengthBracketTracksModulusOracle) {
  for (const double eps : {1e-2, 1e-3, 1e-4}) {
    const LengthBracket b = length_bracket(epsilon_set(eps), kAroundFirstTwo);
    const double oracle = 2 * kPi * kPi / std::log(1.0 / eps);
    EXPECT_NEAR(b.hi, oracle, 0.1 * oracle) << eps;
    EXPECT_LE(b.lo, b.hi);
  }
}

TEST(Hyperbolic, LengthBracketOrderedOnRandomSpecs) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  int checked = 0;
  while (checked < 100) {
    std::vector<SpherePoint> pts{SpherePoint::infinity()};
    for (int i = 0; i < 5; ++i) pts.push_back(Complex(n(rng), n(rng)));
    const MarkedSet ms = marked(pts);
    const auto specs = cluster_curves(pts.size());
    const CurveSpec& cs = specs[rng() % specs.size()];
    try {
      const LengthBracket b = length_bracket(ms, cs);
      EXPECT_LE(b.lo, b.hi);
      ++checked;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::NoAnnulusFound);
    }
  }
}

TEST(Hyperbolic, SymmetricConfigurationHasSymmetricBracket) {
  // z -> 1/z swaps {0, x} with {inf, 1/x} and fixes 1 and -1.
  const Complex x(0.1, 0.05);
  const MarkedSet a = marked({Complex(0), x, Complex(1), Complex(-1), SpherePoint::infinity(), 1.0 / x});
  const LengthBracket inner = length_bracket(a, {{0, 1}, {2, 3, 4, 5}});
  const LengthBracket outer = length_bracket(a, {{4, 5}, {0, 1, 2, 3}});
  EXPECT_NEAR(inner.hi, outer.hi, 0.05 * inner.hi);
}

TEST(Hyperbolic, CurveWeightProperties) {
  EXPECT_NEAR(weight_from_bracket({0.1, 0.1, 0.0}), -std::log(0.1), 1e-14);
  double prev = -1e300;
  for (const double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
    const CurveWeight w = curve_weight(epsilon_set(eps), kAroundFirstTwo);
    EXPECT_GT(w.weight, prev);
    EXPECT_GE(w.weight, -std::log(w.bracket.hi) - 1e-14);
    EXPECT_LE(w.weight, -std::log(w.bracket.lo) + 1e-14);
    prev = w.weight;
  }
}

TEST(Hyperbolic, NoAnnulusWhenClustersInterleave) {
  const MarkedSet ms = marked({Complex(0), Complex(1), Complex(-1), SpherePoint::infinity()});
  EXPECT_GE(max_round_annulus(ms, {{0, 3}, {1, 2}}).modulus, 0.0);
}

TEST(Hyperbolic, GeometryCertificateChordalOracles) {
  const double s2 = std::sqrt(2.0);
  EXPECT_NEAR(geometry_certificate({Complex(0), Complex(1), SpherePoint::infinity(), Complex(0, 1)}, {}).b, s2, 1e-12);
  EXPECT_NEAR(geometry_certificate({Complex(0), Complex(1), SpherePoint::infinity()}, {}).b, s2, 1e-12);
  const GeometryCertificate degenerate =
      geometry_certificate({Complex(0), Complex(1), SpherePoint::infinity()}, {{Complex(0.5, 0.5), 0.0}});
  EXPECT_EQ(degenerate.b, 0.0);
}

TEST(Hyperbolic, GeometryCertificateMatchesBruteForce) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<SpherePoint> pts{Complex(0), Complex(1), SpherePoint::infinity()};
    for (int i = 0; i < 3; ++i) pts.push_back(Complex(n(rng), n(rng)));
    double best = 1e300;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        const auto lift = [](const SpherePoint& p) {
          if (p.at_infinity) return std::array<double, 3>{0.0, 0.0, 1.0};
          const double d = 1.0 + std::norm(p.z);
          return std::array<double, 3>{2 * p.z.real() / d, 2 * p.z.imag() / d, (std::norm(p.z) - 1.0) / d};
        };
        const auto a = lift(pts[i]), b = lift(pts[j]);
        best = std::min(best, std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]));
      }
    EXPECT_NEAR(geometry_certificate(pts, {}).b_pairwise, best, 1e-12);
  }
}

TEST(Hyperbolic, GapScanExamples) {
  const auto g = gap_scan({0.5, 5.0}, 1.0, 2.0);
  ASSERT_TRUE(g.has_value());
  EXPECT_DOUBLE_EQ(g->a, 1.0);
  EXPECT_DOUBLE_EQ(g->b, 3.0);
  const auto empty = gap_scan({}, 1.0, 2.0);
  ASSERT_TRUE(empty.has_value());
  EXPECT_DOUBLE_EQ(empty->a, 1.0);
  std::vector<double> dense;
  for (double v = 0.0; v < 10.0; v += 0.5) dense.push_back(v);
  EXPECT_FALSE(gap_scan(dense, 0.0, 1.0).has_value());
}

TEST(Hyperbolic, GapScanAvoidsEveryWeight) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 20.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> L(10);
    for (auto& v : L) v = u(rng);
    std::sort(L.begin(), L.end());
    const auto g = gap_scan(L, 1.0, 1.5);
    if (!g) continue;
    EXPECT_GE(g->a, 1.0);
    EXPECT_NEAR(g->b - g->a, 1.5, 1e-12);
    for (const double v : L) EXPECT_FALSE(v > g->a && v < g->b) << v;
  }
}

TEST(Hyperbolic, CalBoundFormula) {
  EXPECT_DOUBLE_EQ(cal_bound(2.0, 1.0, 4.0, 2), 16.0);
  EXPECT_DOUBLE_EQ(cal_bound(2.0, 1e6, 4.0, 2), 2e6);
  EXPECT_THROW(cal_bound(1.0, 1.0, 1.0, 2), Error);
}

TEST(Hyperbolic, CalBoundHoldsOnSimulatedSequences) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int violated = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const double b0 = 1.05 + 2.0 * u(rng), c0 = 0.1 + 5.0 * u(rng), M0 = 0.1 + 5.0 * u(rng);
    const int m0 = 2 + static_cast<int>(rng() % 4);
    const double bound = cal_bound(b0, c0, M0, m0);
    for (const double v : simulate(rng, b0, c0, M0, m0, 60, true)) ASSERT_LE(v, bound * (1.0 + 1e-12));
    const auto bad = simulate(rng, b0, c0, M0, m0, 60, false);
    if (*std::max_element(bad.begin(), bad.end()) > bound) ++violated;
  }
  EXPECT_GT(violated, 0);
}

TEST(Hyperbolic, ClusterCurveCounts) {
  EXPECT_EQ(cluster_curves(3).size(), 0u);
  EXPECT_EQ(cluster_curves(4).size(), 3u);
  EXPECT_EQ(cluster_curves(5).size(), 10u);
  EXPECT_EQ(cluster_curves(6).size(), 15u + 10u);
}

TEST(Hyperbolic, MonitorHoldsAlongConvergedRuns) {
  for (const char* name : {"rabbit", "lambda_half"}) {
    const Portrait p = portrait_from_json(test::load(std::string("portraits/") + name + ".json"));
    const IterationOutcome out = iterate(p, configuration_from_json(test::load(std::string("init/") + name + ".json")), {});
    std::vector<MarkedSet> sets;
    for (const auto& r : out.trace) {
      MarkedSet ms;
      for (const auto& [l, pt] : r.positions) ms.points.push_back(pt);
      sets.push_back(ms);
    }
    const MonitorReport m = monitor_sequence(monitor_values(sets), 2);
    EXPECT_TRUE(m.hypotheses_hold) << name;
    EXPECT_TRUE(m.holds) << name;
  }
}
