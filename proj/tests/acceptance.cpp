#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "support.hpp"
#include "thurston/curves.hpp"
#include "thurston/error.hpp"
#include "thurston/hyperbolic.hpp"
#include "thurston/pullback.hpp"
#include "thurston/qdiff.hpp"
#include "thurston/rings.hpp"

using namespace thurston;

namespace {

constexpr double kPi = std::numbers::pi;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RealizedMap load_map(const std::string& name) { return json_io::map_from_json(test::load("maps/" + name + ".json")); }

struct Realized {
  Portrait portrait;
  IterationOutcome out;
};

Realized realize(const std::string& name) {
  Portrait p = portrait_from_json(test::load("portraits/" + name + ".json"));
  const Configuration c0 = configuration_from_json(test::load("init/" + name + ".json"));
  IterationOutcome out = iterate(p, c0, {});
  return {std::move(p), std::move(out)};
}

std::vector<SpherePoint> positions_of(const Configuration& c) {
  std::vector<SpherePoint> out;
  for (const auto& [label, p] : c.positions) out.push_back(p);
  return out;
}

// Each criterion returns pass/fail and fills a one-line summary of the measured values.
using Criterion = std::function<bool(std::ostringstream&)>;

bool perron_certificates(std::ostringstream& msg) {
  const auto t0 = std::chrono::steady_clock::now();
  const Rational tol("1/1000000000000");
  const std::pair<TransitionMatrix, Verdict> cases[] = {
      {TransitionMatrix({{Rational(1, 2)}}), Verdict::Unobstructed},
      {TransitionMatrix({{1}}), Verdict::Obstructed},
      {TransitionMatrix({{0, 1}, {Rational(1, 2), Rational(1, 2)}}), Verdict::Obstructed},
      {TransitionMatrix({{0, 1}, {Rational(1, 2), 0}}), Verdict::Unobstructed}};
  // Exact Perron roots: 1/2, 1, 1 and sqrt(1/2).
  const double roots[] = {0.5, 1.0, 1.0, std::sqrt(0.5)};
  bool ok = true;
  for (std::size_t i = 0; i < 4; ++i) {
    const ObstructionResult r = classify_matrix(cases[i].first, tol);
    const PerronEnclosure e = leading_eigenvalue(cases[i].first, tol);
    ok &= r.verdict == cases[i].second;
    ok &= e.width() <= tol;
    ok &= e.lo.get_d() <= roots[i] + 1e-15 && roots[i] - 1e-15 <= e.hi.get_d();
    msg << to_string(r.verdict)[0];
  }
  const double elapsed = seconds_since(t0);
  ok &= elapsed < 1.0;
  msg << " verdicts, " << elapsed << " s";
  return ok;
}

bool universal_k_exact(std::ostringstream& msg) {
  const auto k1 = universal_k(TransitionMatrix({{Rational(1, 2)}}), 50);
  const auto k2 = universal_k(TransitionMatrix({{0, 1}, {Rational(1, 2), 0}}), 50);
  const auto k3 = universal_k(TransitionMatrix({{1}}), 50);
  msg << "k = " << (k1 ? std::to_string(*k1) : "none") << ", " << (k2 ? std::to_string(*k2) : "none") << ", "
      << (k3 ? std::to_string(*k3) : "none");
  return k1 == 2 && k2 == 4 && !k3;
}

bool realization_oracles(std::ostringstream& msg) {
  const auto t0 = std::chrono::steady_clock::now();
  // Rabbit parameter: the root of c^3 + 2c^2 + c + 1 with positive imaginary part, polished by Newton.
  Complex rabbit(-0.12, 0.74);
  for (int i = 0; i < 50; ++i)
    rabbit -= (((rabbit + 2.0) * rabbit + 1.0) * rabbit + 1.0) / ((3.0 * rabbit + 4.0) * rabbit + 1.0);
  const std::pair<const char*, Complex> cases[] = {{"basilica", -1.0}, {"rabbit", rabbit}, {"lambda_half", 3.0 / 16}};
  bool ok = true;
  for (const auto& [name, oracle] : cases) {
    const Realized r = realize(name);
    const bool converged = r.out.outcome == Outcome::Converged && r.out.map;
    const double err = converged ? std::abs(monic_centered_form(*r.out.map).coeff(0) - oracle) : INFINITY;
    ok &= converged && err <= 1e-10 && r.out.trace.size() <= 200;
    msg << name << " err " << err << " in " << r.out.trace.size() << " it; ";
  }
  const double elapsed = seconds_since(t0);
  ok &= elapsed < 10.0;
  msg << elapsed << " s";
  return ok;
}

bool contraction(std::ostringstream& msg) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Complex c(u(rng) / 2, u(rng) / 2), w1(u(rng), u(rng)), w2(u(rng), u(rng));
    const RealizedMap g = RealizedMap::polynomial(Polynomial({c, 0.0, 1.0}));
    const std::vector<SpherePoint> src{SpherePoint::infinity(), Complex(0), Complex(1), w1, w2};
    const std::vector<SpherePoint> dst{SpherePoint::infinity(), c, c + 1.0, c + w1 * w1, c + w2 * w2};
    worst = std::max(worst, pushforward_matrix(g, src, dst, t, 200).norm_estimate);
  }
  bool ok = worst <= 1.0 + 1e-6;

  const Realized r = realize("rabbit");
  if (r.out.outcome != Outcome::Converged) {
    msg << "rabbit did not converge";
    return false;
  }
  const auto src = positions_of(r.out.config);
  const PushforwardMatrix m = pushforward_matrix(*r.out.map, src, src, 0, 200);
  const double factor = m.norm_estimate;
  // Geometric mean of successive step ratios while the step is above the round-off floor.
  double log_sum = 0.0;
  int count = 0;
  const auto& tr = r.out.trace;
  for (std::size_t i = tr.size() / 2; i + 1 < tr.size(); ++i)
    if (tr[i + 1].delta > 1e-13 && tr[i].delta > 0.0) {
      log_sum += std::log(tr[i + 1].delta / tr[i].delta);
      ++count;
    }
  const double ratio = count ? std::exp(log_sum / count) : NAN;
  ok &= m.matrix.rows() == 1 && m.matrix.cols() == 1 && factor < 1.0 && std::abs(factor - ratio) <= 0.1 * ratio;
  msg << "max norm " << worst << " over 20 maps; rabbit factor " << factor << " vs trace ratio " << ratio;
  return ok;
}

bool pushforward_algebra(std::ostringstream& msg) {
  const RealizedMap square = load_map("square");
  const QuadDiff odd = push_forward(square, quad_diff_from_json(test::load("qd/odd.json")));
  double odd_err = 0.0;
  for (const Complex b : odd.coeffs) odd_err = std::max(odd_err, std::abs(b));

  // 1/(2 z (z - 1)(z - 4)) in partial fractions.
  const QuadDiff even = push_forward(square, quad_diff_from_json(test::load("qd/even.json")));
  const std::pair<Complex, Complex> expected[] = {{0.0, 1.0 / 8}, {1.0, -1.0 / 6}, {4.0, 1.0 / 24}};
  double even_err = 0.0;
  for (std::size_t j = 0; j < even.poles.size(); ++j) {
    Complex want = 0.0;
    for (const auto& [pole, coeff] : expected)
      if (std::abs(even.poles[j] - pole) < 1e-12) want = coeff;
    even_err = std::max(even_err, std::abs(even.coeffs[j] - want));
  }
  for (const auto& [pole, coeff] : expected)
    if (std::none_of(even.poles.begin(), even.poles.end(), [&](Complex p) { return std::abs(p - pole) < 1e-12; }))
      even_err = INFINITY;

  double worst_rel = 0.0;
  for (const char* name : {"square_even", "lambda_half", "newton"}) {
    const auto j = test::load(std::string("pairings/") + name + ".json");
    const RealizedMap g = json_io::map_from_json(j["map"]);
    const QuadDiff qt = quad_diff_from_json(j["qd"]);
    const Complex center = json_io::complex_from_json(j["xi"]["center"]);
    const double r = j["xi"]["radius"];
    const Complex amp = json_io::complex_from_json(j["xi"]["amplitude"]);
    const BeltramiField xi{[=](Complex z) {
                             const double s = std::norm(z - center) / (r * r);
                             return s < 1.0 ? amp * (1.0 - s) * (1.0 - s) : Complex(0.0);
                           },
                           std::abs(amp), "bump"};
    const Complex lhs = pairing(derivative_transport(g, xi), qt);
    const Complex rhs = pairing(xi, push_forward(g, qt));
    worst_rel = std::max(worst_rel, std::abs(lhs - rhs) / std::abs(lhs));
  }
  msg << "odd err " << odd_err << ", even err " << even_err << ", pairing rel " << worst_rel;
  return odd_err <= 1e-12 && even_err <= 1e-12 && worst_rel <= 1e-6;
}

bool norm_decrease_on_rings(std::ostringstream& msg) {
  const RealizedMap g = load_map("lambda_half");
  const auto P_f = postcritical_set(g);
  const RingSystem rs = build_rings(g, koenigs_chart(g, {0.25}, 0.5), P_f);
  if (!verify_rings(rs, g, P_f).passed) {
    msg << "rings failed verification";
    return false;
  }
  std::mt19937_64 rng(2024);
  int held = 0;
  double min_slack = INFINITY;
  for (int i = 0; i < 10; ++i) {
    const QuadDiff qt = random_differential_off_rings(g, rs, 5, rng);
    const NormDecrease n = norm_decrease(g, rs, qt);
    const bool holds = n.pushed <= n.source - n.ring_mass + 1e-6 * n.source;
    held += holds;
    min_slack = std::min(min_slack, (n.source - n.ring_mass + 1e-6 * n.source - n.pushed) / n.source);
  }
  msg << held << "/10 hold, min relative slack " << min_slack;
  return held == 10;
}

bool geometry(std::ostringstream& msg) {
  const double b = geometry_certificate({Complex(0), Complex(1), SpherePoint::infinity(), Complex(0, 1)}, {}).b;
  bool ok = std::abs(b - std::sqrt(2.0)) <= 1e-12;
  msg << "b - sqrt2 = " << b - std::sqrt(2.0) << "; brackets";
  for (const double eps : {1e-2, 1e-3, 1e-4}) {
    MarkedSet ms;
    ms.points = {Complex(0), Complex(eps), Complex(1), SpherePoint::infinity()};
    const LengthBracket br = length_bracket(ms, {{0, 1}, {2, 3}});
    const double oracle = 2 * kPi * kPi / std::log(1.0 / eps);
    ok &= br.lo <= br.hi && std::abs(br.hi - oracle) <= 0.1 * oracle;
    msg << " " << br.hi / oracle;
  }
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n(0.0, 1.0);
  int found = 0, violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t count = 4 + trial % 4;
    MarkedSet ms;
    for (std::size_t i = 0; i < count; ++i) ms.points.push_back(Complex(n(rng), n(rng)) * (i < 2 ? 0.1 : 1.0));
    for (const CurveSpec& cs : cluster_curves(count)) {
      try {
        const AnnulusFit fit = max_round_annulus(ms, cs);
        ++found;
        if (fit.modulus > basic2_cap(ms, cs) + 1e-12) ++violations;
      } catch (const Error&) {
      }
    }
  }
  ok &= violations == 0 && found > 0;
  msg << "; " << violations << " of " << found << " annuli exceed the cap";
  return ok;
}

// Sequences with x_0 <= c0, x_{n+1} <= b0 x_n and x_{n+m0} <= x_n whenever x_n >= M0, pushed against the
// constraints. With `respect_return` false the last rule is dropped.
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

bool cal_property(std::ostringstream& msg) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int exceeded = 0, violated = 0;
  for (int trial = 0; trial < 100000; ++trial) {
    const double b0 = 1.05 + 2.0 * u(rng), c0 = 0.1 + 5.0 * u(rng), M0 = 0.1 + 5.0 * u(rng);
    const int m0 = 2 + static_cast<int>(rng() % 4);
    const double bound = cal_bound(b0, c0, M0, m0);
    const auto good = simulate(rng, b0, c0, M0, m0, 60, true);
    if (*std::max_element(good.begin(), good.end()) > bound * (1.0 + 1e-12)) ++exceeded;
    if (trial < 1000) {
      const auto bad = simulate(rng, b0, c0, M0, m0, 60, false);
      if (*std::max_element(bad.begin(), bad.end()) > bound) ++violated;
    }
  }
  msg << exceeded << " of 1e5 admissible sequences exceed the bound; " << violated << " of 1000 violating ones do";
  return exceeded == 0 && violated > 0;
}

bool rings(std::ostringstream& msg) {
  const double s = std::sqrt(0.5);
  struct Case {
    const char* map;
    std::vector<Complex> cycle;
    std::vector<SpherePoint> extra;
  };
  const Case cases[] = {{"linear_half", {0.0}, {Complex(0), SpherePoint::infinity()}},
                        {"lambda_half", {0.25}, {}},
                        {"period2", {(-1.0 + s) / 2, (-1.0 - s) / 2}, {}}};
  bool ok = true;
  for (const Case& c : cases) {
    const RealizedMap g = load_map(c.map);
    const auto P_f = postcritical_set(g, c.extra);
    const RingSystem rs = build_rings(g, koenigs_chart(g, c.cycle, 0.5), P_f);
    const VerificationReport r = verify_rings(rs, g, P_f);
    double min_margin = INFINITY;
    for (const auto& bullet : r.bullets)
      if (std::isfinite(bullet.margin)) min_margin = std::min(min_margin, bullet.margin);
    ok &= r.passed && min_margin > 0.0;
    msg << c.map << " margin " << min_margin << "; ";

    if (std::string(c.map) == "lambda_half") {
      const double lam = std::abs(rs.chart.lambda);
      double a = rs.a();
      while (a * std::pow(lam, -1.5) >= rs.chart.image_radius) a *= lam;
      const VerificationReport bad = verify_rings(make_ring_system(rs.chart, a, a * std::pow(lam, -1.5)), g, P_f);
      ok &= !bad.passed && !bad.bullets[2].passed;
      msg << "inflated control " << (bad.bullets[2].passed ? "passes (iii)" : "fails (iii)") << "; ";
    }
  }
  return ok;
}

bool degeneration(std::ostringstream& msg) {
  const Realized r = realize("mating_obstructed");
  const double b = r.out.trace.empty() ? INFINITY : r.out.trace.back().b;
  msg << to_string(r.out.outcome) << " after " << r.out.trace.size() << " it, b = " << b;
  return r.out.outcome == Outcome::Degenerated && b < 1e-6;
}

}  // namespace

int main() {
  const Criterion criteria[] = {perron_certificates, universal_k_exact,      realization_oracles, contraction,
                                pushforward_algebra, norm_decrease_on_rings, geometry,            cal_property,
                                rings,               degeneration};
  int failures = 0;
  for (std::size_t i = 0; i < std::size(criteria); ++i) {
    std::ostringstream msg;
    bool pass = false;
    try {
      pass = criteria[i](msg);
    } catch (const std::exception& e) {
      msg << " threw: " << e.what();
    }
    failures += !pass;
    std::printf("criterion %zu: %s  %s\n", i + 1, pass ? "PASS" : "FAIL", msg.str().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
