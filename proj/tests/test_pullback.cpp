#include <gtest/gtest.h>

#include <array>
#include <random>

#include "support.hpp"
#include "thurston/error.hpp"
#include "thurston/pullback.hpp"

using namespace thurston;

namespace {

struct Fixture {
  Portrait portrait;
  Configuration init;
};

Fixture load_fixture(const std::string& name) {
  return {portrait_from_json(test::load("portraits/" + name + ".json")),
          configuration_from_json(test::load("init/" + name + ".json"))};
}

// Cardano's formula for the roots of z^3 + a z^2 + b z + d.
std::array<Complex, 3> cubic_roots(Complex a, Complex b, Complex d) {
  const Complex p = b - a * a / 3.0;
  const Complex q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + d;
  const Complex u = std::pow(-q / 2.0 + std::sqrt(q * q / 4.0 + p * p * p / 27.0), 1.0 / 3.0);
  const Complex omega = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
  std::array<Complex, 3> out;
  Complex w = 1.0;
  for (auto& r : out) {
    const Complex uk = u * w;
    r = uk - p / (3.0 * uk) - a / 3.0;
    w *= omega;
  }
  return out;
}

Complex realized_c(const IterationOutcome& out) { return monic_centered_form(*out.map).coeff(0); }

}  // namespace

TEST(Pullback, BasilicaConvergesToPeriodTwoParameter) {
  const auto [p, c0] = load_fixture("basilica");
  const IterationOutcome out = iterate(p, c0, {});
  ASSERT_EQ(out.outcome, Outcome::Converged);
  const Complex c = realized_c(out);
  // Critical point 0 has period two exactly when c^2 + c = 0 with c != 0.
  EXPECT_LT(std::abs(c * c + c), 1e-10);
  EXPECT_LT(std::abs(c + 1.0), 1e-10);
}

TEST(Pullback, RabbitConvergesToCubicRoot) {
  const auto [p, c0] = load_fixture("rabbit");
  const IterationOutcome out = iterate(p, c0, {});
  ASSERT_EQ(out.outcome, Outcome::Converged);
  EXPECT_LE(out.trace.size(), 200u);
  Complex oracle;
  for (const Complex r : cubic_roots(2.0, 1.0, 1.0))
    if (r.imag() > 0.1) oracle = r;
  EXPECT_LT(std::abs(realized_c(out) - oracle), 1e-10);
}

TEST(Pullback, AttractingFixedPointWithMultiplierHalf) {
  const auto [p, c0] = load_fixture("lambda_half");
  const IterationOutcome out = iterate(p, c0, {});
  ASSERT_EQ(out.outcome, Outcome::Converged);
  // z^2 + c with fixed point a and 2a = 1/2 gives a = 1/4 and c = a - a^2.
  EXPECT_LT(std::abs(realized_c(out) - 0.1875), 1e-10);
}

TEST(Pullback, LevyObstructedMatingDegenerates) {
  const auto [p, c0] = load_fixture("mating_obstructed");
  const IterationOutcome out = iterate(p, c0, {});
  EXPECT_EQ(out.outcome, Outcome::Degenerated);
  ASSERT_FALSE(out.trace.empty());
  EXPECT_LT(out.trace.back().b, 1e-6);
  EXPECT_FALSE(out.map.has_value());
}

TEST(Pullback, TimeoutWhenIterationBudgetIsTiny) {
  const auto [p, c0] = load_fixture("rabbit");
  PullbackOptions opts;
  opts.max_iter = 3;
  EXPECT_EQ(iterate(p, c0, {}, opts).outcome, Outcome::Timeout);
}

TEST(Pullback, ConvergedMapReproducesTheOrbit) {
  for (const char* name : {"basilica", "rabbit", "lambda_half"}) {
    const auto [p, c0] = load_fixture(name);
    const IterationOutcome out = iterate(p, c0, {});
    ASSERT_TRUE(out.map.has_value()) << name;
    EXPECT_LT(orbit_defect(p, out.config, *out.map), 1e-8) << name;
    EXPECT_TRUE(anchors_in_place(p, out.config)) << name;
  }
}

TEST(Pullback, IterationIsDeterministic) {
  const auto [p, c0] = load_fixture("rabbit");
  const IterationOutcome a = iterate(p, c0, {});
  const IterationOutcome b = iterate(p, c0, {});
  ASSERT_EQ(a.trace.size(), b.trace.size());
  EXPECT_EQ(configuration_to_json(a.config).dump(), configuration_to_json(b.config).dump());
}

TEST(Pullback, NormalizationFixesAnchorsAndPreservesCrossRatios) {
  const Portrait p = load_fixture("rabbit").portrait;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Configuration c;
    for (const auto& l : p.marked) c.positions[l] = Complex(n(rng), n(rng));
    const Configuration m = normalize(p, c);
    EXPECT_TRUE(anchors_in_place(p, m));
    // With c, v1, inf at 0, 1, infinity the remaining position is the cross-ratio.
    const Complex z0 = c.at("c").z, z1 = c.at("v1").z, zi = c.at("inf").z, z = c.at("v2").z;
    const Complex cross = (z - z0) * (z1 - zi) / ((z - zi) * (z1 - z0));
    EXPECT_LT(std::abs(m.at("v2").z - cross), 1e-9 * (1.0 + std::abs(cross)));
  }
}

TEST(Pullback, SolvedMapHasPrescribedCriticalValues) {
  const auto [p, c0] = load_fixture("rabbit");
  const Configuration c = normalize(p, c0);
  const RealizedMap g = solve_map(p, c);
  EXPECT_TRUE(g.is_polynomial());
  EXPECT_EQ(g.degree(), 2);
  // Critical point at the anchor 0 maps to v1's position.
  EXPECT_LT(std::abs(g.derivative(0.0)), 1e-10);
  EXPECT_LT(std::abs(g.eval(0.0) - c.at("v1").z), 1e-10);
}

TEST(Pullback, DistanceProxyRejectsMismatchedLabels) {
  const auto basilica = load_fixture("basilica").init;
  const auto rabbit = load_fixture("rabbit").init;
  try {
    distance_proxy(basilica, rabbit);
    FAIL() << "expected LabelMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LabelMismatch);
  }
  EXPECT_DOUBLE_EQ(distance_proxy(rabbit, rabbit), 0.0);
}

TEST(Pullback, TraceCertificatesArePositiveUntilCollapse) {
  const auto [p, c0] = load_fixture("rabbit");
  const IterationOutcome out = iterate(p, c0, {});
  for (const auto& r : out.trace) EXPECT_GT(r.b, 0.0);
}
