#include "thurston/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "thurston/curves.hpp"
#include "thurston/error.hpp"
#include "thurston/hyperbolic.hpp"
#include "thurston/json_io.hpp"
#include "thurston/portrait.hpp"
#include "thurston/qdiff.hpp"

namespace thurston::cli {

namespace {

using Inputs = std::vector<std::pair<std::string, Path>>;

json envelope(const std::string& command, const RunConfig& cfg, const Inputs& inputs, json result) {
  json in = json::object();
  for (const auto& [name, path] : inputs) in[name] = {{"path", path.string()}, {"digest", json_io::file_digest(path)}};
  return json{{"command", command}, {"config", run_config_to_json(cfg)}, {"inputs", in}, {"result", std::move(result)}};
}

// Runs a command body; library errors become a report with exit code 2.
CommandResult guarded(const std::string& command, const RunConfig& cfg, const Inputs& inputs,
                      const std::function<CommandResult()>& body) {
  try {
    validate_run_config(cfg);
    return body();
  } catch (const Error& e) {
    json in = json::object();
    for (const auto& [name, path] : inputs) in[name] = {{"path", path.string()}};
    return {2, json{{"command", command},
                    {"config", run_config_to_json(cfg)},
                    {"inputs", in},
                    {"error", {{"kind", std::string(to_string(e.code()))}, {"message", e.what()}}}}};
  }
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json matrix_to_json(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(json_io::complex_to_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

std::vector<SpherePoint> positions_of(const Configuration& c) {
  std::vector<SpherePoint> out;
  for (const auto& [l, p] : c.positions) out.push_back(p);
  return out;
}

void add_unique(std::vector<SpherePoint>& pts, const SpherePoint& p) {
  for (const auto& q : pts)
    if (chordal_distance(p, q) < 1e-9) return;
  pts.push_back(p);
}

std::vector<SpherePoint> read_points(const Path& file) {
  return marked_set_from_json(json_io::read_file(file)).points;
}

json realization_document(const Path& file) {
  json doc = json_io::read_file(file);
  if (doc.contains("result")) doc = doc.at("result");
  if (!doc.contains("map") || doc.at("map").is_null() || !doc.contains("configuration")) {
    throw Error(ErrorCode::ParseError, "realization document needs map and configuration");
  }
  return doc;
}

json ring_report(const RealizedMap& g, const RingSystem& rs, const std::vector<SpherePoint>& P_f, const RunConfig& cfg) {
  return json{{"rings", ring_system_to_json(rs)},
              {"verification", report_to_json(verify_rings(rs, g, P_f, cfg.rings.ring_margin))}};
}

}  // namespace

RunConfig run_config_from_json(const json& j) {
  json_io::require_only_keys(j,
                             {"tol", "collision_eps", "collapse_eps", "newton_tol", "newton_max_iter", "max_iter",
                              "stable_steps", "quad_rel_tol", "quad_max_cells", "ring_margin", "perron_tol", "kmax",
                              "directions", "m0", "M0", "audit_samples", "seed"},
                             "run config");
  RunConfig c;
  try {
    auto get = [&j](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("tol", c.pullback.tol);
    get("collision_eps", c.pullback.collision_eps);
    get("collapse_eps", c.pullback.collapse_eps);
    get("newton_tol", c.pullback.newton_tol);
    get("newton_max_iter", c.pullback.newton_max_iter);
    get("max_iter", c.pullback.max_iter);
    get("stable_steps", c.pullback.stable_steps);
    get("quad_rel_tol", c.budget.rel_tol);
    get("quad_max_cells", c.budget.max_cells);
    get("ring_margin", c.rings.ring_margin);
    get("perron_tol", c.perron_tol);
    get("kmax", c.kmax);
    get("directions", c.directions);
    get("m0", c.m0);
    get("audit_samples", c.audit_samples);
    get("seed", c.seed);
    if (j.contains("M0") && !j.at("M0").is_null()) c.M0 = j.at("M0").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("run config: ") + e.what());
  }
  return c;
}

json run_config_to_json(const RunConfig& c) {
  return json{{"tol", c.pullback.tol},
              {"collision_eps", c.pullback.collision_eps},
              {"collapse_eps", c.pullback.collapse_eps},
              {"newton_tol", c.pullback.newton_tol},
              {"newton_max_iter", c.pullback.newton_max_iter},
              {"max_iter", c.pullback.max_iter},
              {"stable_steps", c.pullback.stable_steps},
              {"quad_rel_tol", c.budget.rel_tol},
              {"quad_max_cells", c.budget.max_cells},
              {"ring_margin", c.rings.ring_margin},
              {"perron_tol", c.perron_tol},
              {"kmax", c.kmax},
              {"directions", c.directions},
              {"m0", c.m0},
              {"M0", c.M0 ? json(*c.M0) : json(nullptr)},
              {"audit_samples", c.audit_samples},
              {"seed", c.seed}};
}

void validate_run_config(const RunConfig& c) {
  const double positives[] = {c.pullback.tol,     c.pullback.collision_eps, c.pullback.collapse_eps,
                              c.pullback.newton_tol, c.budget.rel_tol,       c.rings.ring_margin,
                              c.perron_tol};
  for (const double v : positives)
    if (!(v > 0.0)) throw Error(ErrorCode::InvalidArgument, "run config tolerances must be positive");
  if (c.pullback.max_iter < 1 || c.pullback.stable_steps < 1 || c.kmax < 1 || c.directions < 1 || c.m0 < 2 ||
      c.budget.max_cells < 1 || c.audit_samples < 0) {
    throw Error(ErrorCode::InvalidArgument, "run config counts out of range");
  }
  if (c.M0 && !(*c.M0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "M0 must be positive");
}

CommandResult cmd_check(const Path& portrait, const std::vector<Path>& curve_systems, const RunConfig& cfg) {
  Inputs inputs{{"portrait", portrait}};
  for (std::size_t i = 0; i < curve_systems.size(); ++i) inputs.emplace_back("curves" + std::to_string(i), curve_systems[i]);
  return guarded("check", cfg, inputs, [&]() -> CommandResult {
    const Portrait p = portrait_from_json(json_io::read_file(portrait));
    const ValidationReport v = validate(p);
    if (!v.passed()) {
      json violations = json::array();
      for (const auto& x : v.violations) violations.push_back({{"invariant", x.invariant}, {"labels", x.labels}});
      return {2, envelope("check", cfg, inputs, {{"portrait_valid", false}, {"violations", violations}})};
    }
    const Rational tol(cfg.perron_tol);
    json systems = json::array();
    bool obstructed = false;
    for (const auto& file : curve_systems) {
      const CurveSystem cs = curve_system_from_json(json_io::read_file(file));
      if (const auto problems = validate_curve_system(cs); !problems.empty()) {
        throw Error(ErrorCode::ParseError, file.string() + ": " + problems.front());
      }
      const ObstructionResult r = is_obstruction(cs, tol);
      json matrix = json::array();
      for (std::size_t i = 0; i < r.matrix.size(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < r.matrix.size(); ++j) row.push_back(r.matrix(i, j).get_str());
        matrix.push_back(row);
      }
      const auto k = universal_k(r.matrix, cfg.kmax);
      systems.push_back({{"file", file.string()},
                         {"matrix", matrix},
                         {"degree_bound_ok", validate_curve_system(cs, p.degree).empty()},
                         {"perron_lo", rational_to_json(r.enclosure.lo)},
                         {"perron_hi", rational_to_json(r.enclosure.hi)},
                         {"verdict", to_string(r.verdict)},
                         {"exact_boundary", r.exact_boundary},
                         {"universal_k", k ? json(*k) : json(nullptr)}});
      obstructed = obstructed || r.verdict == Verdict::Obstructed;
    }
    json result{{"portrait_valid", true},
                {"systems", systems},
                {"verdict", obstructed ? "Obstructed" : "Unobstructed"},
                {"summary", obstructed ? "obstruction found" : "no obstruction among supplied systems"}};
    return {obstructed ? 1 : 0, envelope("check", cfg, inputs, result)};
  });
}

CommandResult cmd_realize(const Path& portrait, const Path& init, const std::optional<Path>& hints,
                          const RunConfig& cfg) {
  Inputs inputs{{"portrait", portrait}, {"init", init}};
  if (hints) inputs.emplace_back("hints", *hints);
  return guarded("realize", cfg, inputs, [&]() -> CommandResult {
    const Portrait p = portrait_from_json(json_io::read_file(portrait));
    const Configuration c0 = configuration_from_json(json_io::read_file(init));
    const BranchTable bt = hints ? branch_table_from_json(json_io::read_file(*hints)) : BranchTable{};
    const IterationOutcome out = iterate(p, c0, bt, cfg.pullback);

    json trace = json::array();
    for (const auto& r : out.trace) trace.push_back(trace_record_to_json(r));
    json result{{"outcome", to_string(out.outcome)},
                {"iterations", out.trace.empty() ? 0 : out.trace.back().iter},
                {"configuration", configuration_to_json(out.config)},
                {"certificate_b", out.trace.empty() ? json(nullptr) : num(out.trace.back().b)},
                {"map", out.map ? json_io::map_to_json(*out.map) : json(nullptr)},
                {"trace", trace}};
    if (out.map && out.map->is_polynomial()) {
      json coeffs = json::array();
      const Polynomial monic = monic_centered_form(*out.map);
      for (const Complex a : monic.coeffs()) coeffs.push_back(json_io::complex_to_json(a));
      result["monic_centered"] = coeffs;
    }
    const int code = out.outcome == Outcome::Converged ? 0 : out.outcome == Outcome::Degenerated ? 3 : 4;
    return {code, envelope("realize", cfg, inputs, result)};
  });
}

CommandResult cmd_audit(const Path& realization, const Path& portrait, const RunConfig& cfg) {
  const Inputs inputs{{"realization", realization}, {"portrait", portrait}};
  return guarded("audit", cfg, inputs, [&]() -> CommandResult {
    const Portrait p = portrait_from_json(json_io::read_file(portrait));
    const json doc = realization_document(realization);
    const RealizedMap g = json_io::map_from_json(doc.at("map"));
    const Configuration c = configuration_from_json(doc.at("configuration"));
    const double defect = orbit_defect(p, c, g);
    if (!(defect <= 1e-8)) {
      throw Error(ErrorCode::AuditPreconditionFailed, "map does not reproduce the portrait orbit (defect " +
                                                          std::to_string(defect) + ")");
    }
    json result{{"orbit_defect", defect}};
    result["certificate"] = certificate_to_json(geometry_certificate(c, {}));

    const auto src = positions_of(c);
    auto dst = src;
    for (const auto& v : g.critical_values()) add_unique(dst, v);
    const PushforwardMatrix m = pushforward_matrix(g, src, dst, cfg.seed, cfg.directions, cfg.budget);
    result["pushforward"] = {{"src_dimension", m.matrix.cols()},
                             {"dst_dimension", m.matrix.rows()},
                             {"matrix", matrix_to_json(m.matrix)},
                             {"norm_estimate", m.norm_estimate},
                             {"directions", m.directions}};

    json rings = json::array();
    std::mt19937_64 rng(cfg.seed);
    double min_mass_ratio = std::numeric_limits<double>::infinity();
    for (const auto& tag : p.cycle_tags) {
      if (tag.kind != CycleKind::Attracting) continue;
      std::vector<Complex> cycle;
      for (const auto& l : tag.cycle) cycle.push_back(c.at(l).z);
      const KoenigsChart chart = koenigs_chart(g, cycle, tag.lambda);
      const auto P_f = postcritical_set(g, src);
      const RingSystem rs = build_rings(g, chart, P_f, cfg.rings);
      json entry = ring_report(g, rs, P_f, cfg);
      entry["cycle"] = tag.cycle;
      json checks = json::array();
      for (int s = 0; s < cfg.audit_samples; ++s) {
        const NormDecrease n = norm_decrease(g, rs, random_differential_off_rings(g, rs, 5, rng), 1e-6, cfg.budget);
        min_mass_ratio = std::min(min_mass_ratio, n.ring_mass / n.total);
        checks.push_back(norm_decrease_to_json(n));
      }
      entry["norm_decrease"] = checks;
      rings.push_back(entry);
    }
    result["rings"] = rings;
    result["empirical_min_ring_mass_ratio"] = num(min_mass_ratio);
    return {0, envelope("audit", cfg, inputs, result)};
  });
}

CommandResult cmd_qd_push(const Path& map, const Path& qd, const RunConfig& cfg) {
  const Inputs inputs{{"map", map}, {"qd", qd}};
  return guarded("qd push", cfg, inputs, [&]() -> CommandResult {
    const RealizedMap g = json_io::map_from_json(json_io::read_file(map));
    const QuadDiff q = push_forward(g, quad_diff_from_json(json_io::read_file(qd)));
    return {0, envelope("qd push", cfg, inputs, {{"qd", quad_diff_to_json(q)}, {"moment_defect", q.moment_defect()}})};
  });
}

CommandResult cmd_qd_norm(const Path& qd, const RunConfig& cfg) {
  const Inputs inputs{{"qd", qd}};
  return guarded("qd norm", cfg, inputs, [&]() -> CommandResult {
    const QuadDiff q = quad_diff_from_json(json_io::read_file(qd));
    return {0, envelope("qd norm", cfg, inputs, {{"l1_norm", l1_norm(q, cfg.budget)}})};
  });
}

CommandResult cmd_qd_pair(const Path& pairing_file, const RunConfig& cfg) {
  const Inputs inputs{{"pairing", pairing_file}};
  return guarded("qd pair", cfg, inputs, [&]() -> CommandResult {
    const json j = json_io::read_file(pairing_file);
    json_io::require_only_keys(j, {"map", "qd", "xi"}, "pairing");
    const RealizedMap g = json_io::map_from_json(json_io::require_key(j, "map", "pairing"));
    const QuadDiff qt = quad_diff_from_json(json_io::require_key(j, "qd", "pairing"));
    const json& x = json_io::require_key(j, "xi", "pairing");
    json_io::require_only_keys(x, {"center", "radius", "amplitude"}, "bump");
    const Complex center = json_io::complex_from_json(json_io::require_key(x, "center", "bump"));
    const double radius = json_io::require_key(x, "radius", "bump").get<double>();
    const Complex amp = json_io::complex_from_json(json_io::require_key(x, "amplitude", "bump"));
    if (!(radius > 0.0) || !(std::abs(amp) < 1.0)) throw Error(ErrorCode::InvalidArgument, "bump needs radius > 0, |amplitude| < 1");
    const BeltramiField xi{[=](Complex z) {
                             const double s = std::norm(z - center) / (radius * radius);
                             return s < 1.0 ? amp * (1.0 - s) * (1.0 - s) : Complex(0.0);
                           },
                           std::abs(amp), "bump"};
    const Complex upstairs = pairing(derivative_transport(g, xi), qt, cfg.budget);
    const Complex downstairs = pairing(xi, push_forward(g, qt), cfg.budget);
    return {0, envelope("qd pair", cfg, inputs,
                        {{"transported", json_io::complex_to_json(upstairs)},
                         {"pushed", json_io::complex_to_json(downstairs)},
                         {"relative_difference", std::abs(upstairs - downstairs) / std::max(std::abs(upstairs), 1e-300)}})};
  });
}

CommandResult cmd_qd_opnorm(const Path& map, const Path& src, const Path& dst, const RunConfig& cfg) {
  const Inputs inputs{{"map", map}, {"src", src}, {"dst", dst}};
  return guarded("qd opnorm", cfg, inputs, [&]() -> CommandResult {
    const RealizedMap g = json_io::map_from_json(json_io::read_file(map));
    const auto m = pushforward_matrix(g, read_points(src), read_points(dst), cfg.seed, cfg.directions, cfg.budget);
    return {0, envelope("qd opnorm", cfg, inputs,
                        {{"matrix", matrix_to_json(m.matrix)},
                         {"norm_estimate", m.norm_estimate},
                         {"directions", m.directions}})};
  });
}

CommandResult cmd_geom_cert(const Path& marked, const RunConfig& cfg) {
  const Inputs inputs{{"marked", marked}};
  return guarded("geom cert", cfg, inputs, [&]() -> CommandResult {
    const json j = json_io::read_file(marked);
    const MarkedSet ms = marked_set_from_json(j);
    std::vector<RoundDisk> disks;
    if (j.contains("disks")) {
      for (const auto& d : j.at("disks")) {
        disks.push_back({json_io::complex_from_json(json_io::require_key(d, "center", "disk")),
                         json_io::require_key(d, "radius", "disk").get<double>()});
      }
    }
    return {0, envelope("geom cert", cfg, inputs, {{"certificate", certificate_to_json(geometry_certificate(ms.points, disks))}})};
  });
}

CommandResult cmd_geom_length(const Path& marked, const std::vector<std::size_t>& inner,
                              const std::vector<std::size_t>& outer, const RunConfig& cfg) {
  const Inputs inputs{{"marked", marked}};
  return guarded("geom length", cfg, inputs, [&]() -> CommandResult {
    const MarkedSet ms = marked_set_from_json(json_io::read_file(marked));
    const CurveSpec cs{inner, outer};
    const CurveWeight w = curve_weight(ms, cs);
    const AnnulusFit fit = max_round_annulus(ms, cs);
    const double cap = basic2_cap(ms, cs);
    return {0, envelope("geom length", cfg, inputs,
                        {{"modulus", fit.modulus},
                         {"r", fit.r},
                         {"R", fit.R},
                         {"length_lo", w.bracket.lo},
                         {"length_hi", w.bracket.hi},
                         {"weight", w.weight},
                         {"basic2_cap", num(cap)},
                         {"respects_basic2", fit.modulus <= cap}})};
  });
}

CommandResult cmd_geom_scan(const std::vector<double>& weights, double a_min, double width, const RunConfig& cfg) {
  return guarded("geom scan", cfg, {}, [&]() -> CommandResult {
    auto sorted = weights;
    std::sort(sorted.begin(), sorted.end());
    const auto gap = gap_scan(sorted, a_min, width);
    json result{{"weights", sorted}, {"a_min", a_min}, {"width", width}};
    if (gap) result["gap"] = {{"a", gap->a}, {"b", gap->b}, {"left_open", gap->left_open}};
    else result["gap"] = "NoGap";
    return {0, envelope("geom scan", cfg, {}, result)};
  });
}

CommandResult cmd_geom_monitor(const Path& realization, const RunConfig& cfg) {
  const Inputs inputs{{"realization", realization}};
  return guarded("geom monitor", cfg, inputs, [&]() -> CommandResult {
    json doc = json_io::read_file(realization);
    if (doc.contains("result")) doc = doc.at("result");
    std::vector<MarkedSet> sets;
    for (const auto& rec : json_io::require_key(doc, "trace", "realization")) {
      sets.push_back(marked_set_from_json(json{{"positions", json_io::require_key(rec, "positions", "trace record")}}));
    }
    const auto x = monitor_values(sets);
    if (std::any_of(x.begin(), x.end(), [](double v) { return !(v > 0.0); })) {
      throw Error(ErrorCode::NoAnnulusFound, "a trace step has no separating annulus for any cluster curve");
    }
    const MonitorReport r = monitor_sequence(x, cfg.m0, cfg.M0);
    return {0, envelope("geom monitor", cfg, inputs,
                        {{"x", r.x},
                         {"b0", r.b0},
                         {"c0", r.c0},
                         {"M0", r.M0},
                         {"m0", r.m0},
                         {"bound", r.bound},
                         {"hypotheses_hold", r.hypotheses_hold},
                         {"holds", r.holds}})};
  });
}

CommandResult cmd_rings_build(const Path& map, const std::vector<Complex>& cycle, Complex lambda,
                              const std::optional<Path>& marked, const RunConfig& cfg) {
  Inputs inputs{{"map", map}};
  if (marked) inputs.emplace_back("marked", *marked);
  return guarded("rings build", cfg, inputs, [&]() -> CommandResult {
    const RealizedMap g = json_io::map_from_json(json_io::read_file(map));
    const auto P_f = postcritical_set(g, marked ? read_points(*marked) : std::vector<SpherePoint>{});
    const RingSystem rs = build_rings(g, koenigs_chart(g, cycle, lambda), P_f, cfg.rings);
    json result = ring_report(g, rs, P_f, cfg);
    const bool passed = result["verification"]["passed"].get<bool>();
    return {passed ? 0 : 1, envelope("rings build", cfg, inputs, result)};
  });
}

CommandResult cmd_rings_verify(const Path& map, const Path& rings, const std::optional<Path>& marked,
                               const RunConfig& cfg) {
  Inputs inputs{{"map", map}, {"rings", rings}};
  if (marked) inputs.emplace_back("marked", *marked);
  return guarded("rings verify", cfg, inputs, [&]() -> CommandResult {
    const RealizedMap g = json_io::map_from_json(json_io::read_file(map));
    json j = json_io::read_file(rings);
    if (j.contains("result")) j = j.at("result").at("rings");
    const RingSystem rs = ring_system_from_json(j);
    const auto P_f = postcritical_set(g, marked ? read_points(*marked) : std::vector<SpherePoint>{});
    const VerificationReport r = verify_rings(rs, g, P_f, cfg.rings.ring_margin);
    return {r.passed ? 0 : 1, envelope("rings verify", cfg, inputs, {{"verification", report_to_json(r)}})};
  });
}

Complex parse_complex(const std::string& text) {
  std::stringstream in(text);
  double re = 0.0, im = 0.0;
  char comma = 0;
  in >> re;
  if (in.fail()) throw Error(ErrorCode::ParseError, "expected RE,IM but got '" + text + "'");
  if (in >> comma) {
    if (comma != ',' || !(in >> im)) throw Error(ErrorCode::ParseError, "expected RE,IM but got '" + text + "'");
  }
  std::string rest;
  if (in >> rest) throw Error(ErrorCode::ParseError, "trailing characters in '" + text + "'");
  return {re, im};
}

std::vector<Complex> parse_points(const std::string& text) {
  std::vector<Complex> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ';'))
    if (!item.empty()) out.push_back(parse_complex(item));
  if (out.empty()) throw Error(ErrorCode::ParseError, "no points given");
  return out;
}

}  // namespace thurston::cli
