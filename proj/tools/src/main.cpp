#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "thurston/cli/commands.hpp"
#include "thurston/error.hpp"
#include "thurston/json_io.hpp"

using namespace thurston;
using namespace thurston::cli;

int main(int argc, char** argv) {
  CLI::App app{"Thurston realization and certificate toolkit"};
  app.require_subcommand(1);

  std::string config_file, json_out;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_file, "Run configuration JSON")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Random seed for sampled estimates");
  app.add_option("--json-out", json_out, "Write the report to this file instead of stdout");

  std::function<CommandResult(const RunConfig&)> action;

  auto* check = app.add_subcommand("check", "Validate a portrait and classify candidate curve systems");
  std::string portrait, init, hints;
  std::vector<std::string> curves;
  check->add_option("portrait", portrait)->required()->check(CLI::ExistingFile);
  check->add_option("--curves", curves, "Curve-system files")->check(CLI::ExistingFile);
  check->callback([&] {
    action = [&](const RunConfig& c) { return cmd_check(portrait, {curves.begin(), curves.end()}, c); };
  });

  auto* realize = app.add_subcommand("realize", "Run the pull-back iteration");
  realize->add_option("portrait", portrait)->required()->check(CLI::ExistingFile);
  realize->add_option("--init", init, "Initial configuration")->required()->check(CLI::ExistingFile);
  realize->add_option("--hints", hints, "Branch hints")->check(CLI::ExistingFile);
  realize->callback([&] {
    action = [&](const RunConfig& c) {
      return cmd_realize(portrait, init, hints.empty() ? std::nullopt : std::optional<Path>(hints), c);
    };
  });

  auto* audit = app.add_subcommand("audit", "Audit a realized map");
  std::string realization;
  audit->add_option("realization", realization)->required()->check(CLI::ExistingFile);
  audit->add_option("--portrait", portrait)->required()->check(CLI::ExistingFile);
  audit->callback([&] { action = [&](const RunConfig& c) { return cmd_audit(realization, portrait, c); }; });

  auto* qd = app.add_subcommand("qd", "Quadratic differentials");
  qd->require_subcommand(1);
  std::string map, qd_file, src, dst, pairing_file;
  auto* push = qd->add_subcommand("push", "Push a differential forward");
  push->add_option("--map", map)->required()->check(CLI::ExistingFile);
  push->add_option("qd", qd_file)->required()->check(CLI::ExistingFile);
  push->callback([&] { action = [&](const RunConfig& c) { return cmd_qd_push(map, qd_file, c); }; });
  auto* norm = qd->add_subcommand("norm", "L1 norm of a differential");
  norm->add_option("qd", qd_file)->required()->check(CLI::ExistingFile);
  norm->callback([&] { action = [&](const RunConfig& c) { return cmd_qd_norm(qd_file, c); }; });
  auto* pair = qd->add_subcommand("pair", "Compare both sides of the pairing identity");
  pair->add_option("pairing", pairing_file)->required()->check(CLI::ExistingFile);
  pair->callback([&] { action = [&](const RunConfig& c) { return cmd_qd_pair(pairing_file, c); }; });
  auto* opnorm = qd->add_subcommand("opnorm", "Matrix and norm estimate of the push-forward");
  opnorm->add_option("--map", map)->required()->check(CLI::ExistingFile);
  opnorm->add_option("--src", src)->required()->check(CLI::ExistingFile);
  opnorm->add_option("--dst", dst)->required()->check(CLI::ExistingFile);
  opnorm->callback([&] { action = [&](const RunConfig& c) { return cmd_qd_opnorm(map, src, dst, c); }; });

  auto* geom = app.add_subcommand("geom", "Hyperbolic geometry of marked sets");
  geom->require_subcommand(1);
  std::string marked;
  std::vector<std::size_t> inner, outer;
  std::vector<double> weights;
  double a_min = 0.0, width = 1.0;
  auto* cert = geom->add_subcommand("cert", "Separation certificate");
  cert->add_option("marked", marked)->required()->check(CLI::ExistingFile);
  cert->callback([&] { action = [&](const RunConfig& c) { return cmd_geom_cert(marked, c); }; });
  auto* length = geom->add_subcommand("length", "Length bracket and weight of a curve");
  length->add_option("marked", marked)->required()->check(CLI::ExistingFile);
  length->add_option("--inner", inner, "Indices inside the curve")->required();
  length->add_option("--outer", outer, "Indices outside the curve")->required();
  length->callback([&] { action = [&](const RunConfig& c) { return cmd_geom_length(marked, inner, outer, c); }; });
  auto* scan = geom->add_subcommand("scan", "Find a gap in a list of weights");
  scan->add_option("--weights", weights)->required();
  scan->add_option("--a-min", a_min);
  scan->add_option("--width", width)->check(CLI::PositiveNumber);
  scan->callback([&] { action = [&](const RunConfig& c) { return cmd_geom_scan(weights, a_min, width, c); }; });
  auto* monitor = geom->add_subcommand("monitor", "Bound the weights along a realize trace");
  monitor->add_option("realization", realization)->required()->check(CLI::ExistingFile);
  monitor->callback([&] { action = [&](const RunConfig& c) { return cmd_geom_monitor(realization, c); }; });

  auto* rings = app.add_subcommand("rings", "Rings around an attracting cycle");
  rings->require_subcommand(1);
  std::string cycle_text, lambda_text, rings_file;
  auto* build = rings->add_subcommand("build", "Construct and verify rings");
  build->add_option("--map", map)->required()->check(CLI::ExistingFile);
  build->add_option("--cycle", cycle_text, "Cycle points as re,im;re,im")->required();
  build->add_option("--lambda", lambda_text, "Multiplier as re,im")->required();
  build->add_option("--marked", marked, "Extra marked points")->check(CLI::ExistingFile);
  build->callback([&] {
    action = [&](const RunConfig& c) {
      return cmd_rings_build(map, parse_points(cycle_text), parse_complex(lambda_text),
                             marked.empty() ? std::nullopt : std::optional<Path>(marked), c);
    };
  });
  auto* verify = rings->add_subcommand("verify", "Re-verify a stored ring system");
  verify->add_option("--map", map)->required()->check(CLI::ExistingFile);
  verify->add_option("rings", rings_file)->required()->check(CLI::ExistingFile);
  verify->add_option("--marked", marked, "Extra marked points")->check(CLI::ExistingFile);
  verify->callback([&] {
    action = [&](const RunConfig& c) {
      return cmd_rings_verify(map, rings_file, marked.empty() ? std::nullopt : std::optional<Path>(marked), c);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CommandResult result;
  try {
    RunConfig cfg = config_file.empty() ? RunConfig{} : run_config_from_json(json_io::read_file(config_file));
    if (seed) cfg.seed = *seed;
    result = action(cfg);
  } catch (const Error& e) {
    result = {2, json{{"error", {{"kind", std::string(to_string(e.code()))}, {"message", e.what()}}}}};
  }

  if (json_out.empty()) {
    std::cout << result.report.dump(2) << '\n';
  } else {
    json_io::write_file(json_out, result.report);
  }
  if (result.report.contains("error")) std::cerr << result.report["error"]["message"].get<std::string>() << '\n';
  return result.exit_code;
}
