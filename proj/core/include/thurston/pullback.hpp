#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "thurston/portrait.hpp"
#include "thurston/rational_map.hpp"
#include "thurston/sphere.hpp"

namespace thurston {

using Positions = std::map<Label, SpherePoint>;

/// Marked-point positions on the sphere; anchors at 0, 1, infinity when normalized.
struct Configuration {
  Positions positions;
  bool anchor_normalized = false;
  std::map<std::string, double> disk_radii;  // keyed by the first label of an attracting cycle

  const SpherePoint& at(const Label& l) const;
};

/// Möbius map sending the anchors to 0, 1, infinity, and the normalized configuration.
Configuration normalize(const Portrait& p, const Configuration& c);
/// Checks that the three anchors sit exactly at 0, 1, infinity.
bool anchors_in_place(const Portrait& p, const Configuration& c);

struct PullbackOptions {
  double tol = 1e-11;
  double collision_eps = 1e-9;
  double newton_tol = 1e-12;
  int newton_max_iter = 60;
  int max_iter = 500;
  double collapse_eps = 1e-6;
  int stable_steps = 3;
  int max_polynomial_degree = 6;
};

/// A map solving the portrait equations at a configuration, with the solved upstairs points.
struct MapSolution {
  RealizedMap map;
  Positions critical;        // critical labels (anchored ones included)
  Positions cycle;           // attracting-cycle labels
  double residual = 0.0;     // max-norm of the final Newton residual
  int newton_iterations = 0;
  std::vector<Complex> unknowns;  // raw Newton vector, reused as a continuation seed
};

/// Realizes the portrait at configuration c: critical points with the right local degrees mapping
/// to the configured critical values, attracting cycles with the tagged multipliers, upstairs anchors
/// at 0, 1, infinity. Supports polynomial portraits (anchor at infinity fully critical and fixed) up
/// to the configured degree, and rational portraits of degree 2.
MapSolution solve_map_detailed(const Portrait& p, const Configuration& c, const MapSolution* seed = nullptr,
                               const PullbackOptions& opts = {});
RealizedMap solve_map(const Portrait& p, const Configuration& c, const std::optional<RealizedMap>& seed = {},
                      const PullbackOptions& opts = {});

/// Lifting data. `path` is a polyline of configurations ending at the current configuration; each step
/// lifts the whole path through the solved maps and keeps the preimage that moves continuously.
/// Before the first step there is no path and `hints` selects the initial branches.
struct BranchTable {
  std::vector<Positions> path;
  std::optional<MapSolution> path_start_solution;
  Positions hints;
};

/// Branch hints file: {"label": {re,im} | "inf", ...}.
BranchTable branch_table_from_json(const nlohmann::json& j);

struct StepResult {
  Configuration config;
  BranchTable table;
  MapSolution solution;  // the map solved at the input configuration
  int path_nodes = 0;
};

/// One application of the pull-back operator: new positions are the critical points, cycle points and
/// tracked preimages for the map solved at c, renormalized so the anchors return to 0, 1, infinity.
StepResult pull_back_step(const Portrait& p, const Configuration& c, const MapSolution& g, const BranchTable& bt,
                          const PullbackOptions& opts = {});

/// Max chordal distance over labels; LabelMismatch if the label sets differ.
double distance_proxy(const Configuration& a, const Configuration& b);

struct TraceRecord {
  int iter = 0;
  Positions positions;
  double b = 0.0;
  double delta = 0.0;
  double newton_residual = 0.0;
};

enum class Outcome { Converged, Degenerated, Timeout };
std::string to_string(Outcome o);

struct IterationOutcome {
  Outcome outcome = Outcome::Timeout;
  Configuration config;             // last configuration reached
  std::optional<RealizedMap> map;   // on convergence, the map solved at the fixed configuration
  std::vector<TraceRecord> trace;
};

/// Bounded-geometry value used by the iteration: min chordal separation of the marked positions.
double iteration_certificate(const Configuration& c);

/// Iterates the pull-back operator from c0 until successive configurations agree to opts.tol for
/// opts.stable_steps steps, the geometry certificate drops below opts.collapse_eps, or max_iter.
IterationOutcome iterate(const Portrait& p, const Configuration& c0, const BranchTable& bt0,
                         const PullbackOptions& opts = {});

/// Each marked position is carried by the map to its image label's position within tol.
double orbit_defect(const Portrait& p, const Configuration& c, const RealizedMap& g);

Configuration configuration_from_json(const nlohmann::json& j);
nlohmann::json configuration_to_json(const Configuration& c);
nlohmann::json positions_to_json(const Positions& pos);
nlohmann::json trace_record_to_json(const TraceRecord& r);

}  // namespace thurston
