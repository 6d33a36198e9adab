#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "thurston/pullback.hpp"
#include "thurston/quadrature.hpp"
#include "thurston/rings.hpp"

namespace thurston::cli {

using nlohmann::json;
using Path = std::filesystem::path;

/// Settings shared by all commands; embedded verbatim in every report.
struct RunConfig {
  PullbackOptions pullback;
  quad::Budget budget;
  RingOptions rings;
  double perron_tol = 1e-12;
  int kmax = 50;
  int directions = 200;
  int m0 = 2;
  std::optional<double> M0;
  int audit_samples = 5;
  std::uint64_t seed = 0;
};

RunConfig run_config_from_json(const json& j);
json run_config_to_json(const RunConfig& c);
/// Throws InvalidArgument unless every tolerance is positive.
void validate_run_config(const RunConfig& c);

struct CommandResult {
  int exit_code = 0;
  json report;
};

/// Exit 0 unobstructed/undecided, 1 obstructed, 2 on parse or validation failure.
CommandResult cmd_check(const Path& portrait, const std::vector<Path>& curve_systems, const RunConfig& cfg);
/// Exit 0 converged, 3 degenerated, 4 timeout.
CommandResult cmd_realize(const Path& portrait, const Path& init, const std::optional<Path>& hints,
                          const RunConfig& cfg);
/// `realization` is a realize report or a document {map, configuration}.
CommandResult cmd_audit(const Path& realization, const Path& portrait, const RunConfig& cfg);

CommandResult cmd_qd_push(const Path& map, const Path& qd, const RunConfig& cfg);
CommandResult cmd_qd_norm(const Path& qd, const RunConfig& cfg);
/// Pairing file: {map, qd, xi: {center, radius, amplitude}} with a smooth bump xi.
CommandResult cmd_qd_pair(const Path& pairing, const RunConfig& cfg);
CommandResult cmd_qd_opnorm(const Path& map, const Path& src, const Path& dst, const RunConfig& cfg);

/// Marked-set file, optionally with "disks": [{center, radius}].
CommandResult cmd_geom_cert(const Path& marked, const RunConfig& cfg);
CommandResult cmd_geom_length(const Path& marked, const std::vector<std::size_t>& inner,
                              const std::vector<std::size_t>& outer, const RunConfig& cfg);
CommandResult cmd_geom_scan(const std::vector<double>& weights, double a_min, double width, const RunConfig& cfg);
/// Monitor over the trace of a realize report.
CommandResult cmd_geom_monitor(const Path& realization, const RunConfig& cfg);

CommandResult cmd_rings_build(const Path& map, const std::vector<Complex>& cycle, Complex lambda,
                              const std::optional<Path>& marked, const RunConfig& cfg);
CommandResult cmd_rings_verify(const Path& map, const Path& rings, const std::optional<Path>& marked,
                               const RunConfig& cfg);

/// "re,im" pairs separated by ';'.
std::vector<Complex> parse_points(const std::string& text);
Complex parse_complex(const std::string& text);

}  // namespace thurston::cli
