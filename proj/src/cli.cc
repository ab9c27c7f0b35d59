#include "dfmsynth/cli.h"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dfmsynth/abstraction.h"
#include "dfmsynth/errors.h"
#include "dfmsynth/io.h"
#include "dfmsynth/simulate.h"
#include "dfmsynth/synthesis.h"

namespace dfmsynth {
namespace {

// Reference value reported next to our own controller size.
constexpr std::size_t kReferenceControllerStates = 190;

Scenario load_scenario(const std::string& path) {
  return path.empty() ? reference_scenario() : parse_scenario(read_file(path));
}

std::string edge_text(const ObserverMachine& obs, const ObserverEdge& e) {
  return obs.label(e.state) + " " + std::string(sensor_name(e.y)) + " " + obs.controls[e.control] + " -> " +
         obs.label(e.target);
}

// Level whose partition has `cells` cells.
int level_for_cells(std::size_t base, std::size_t cells) {
  for (int level = 1; level <= 40; ++level) {
    const std::size_t n = base << (level - 1);
    if (n == cells) return level;
    if (n > cells) break;
  }
  throw ConfigError("controller does not match any partition level of this scenario");
}

// The controller's initial state is the full range [0,n].
int controller_level(const Dfm& controller, std::size_t base) {
  const std::string& label = controller.state_labels.at(controller.initial);
  const auto comma = label.find(',');
  if (label.size() < 5 || label.front() != '[' || label.back() != ']' || comma == std::string::npos) {
    throw ConfigError("controller initial state '" + label + "' is not a cell range");
  }
  const std::size_t hi = std::stoul(label.substr(comma + 1, label.size() - comma - 2));
  return level_for_cells(base, hi);
}

void print_attempts(const std::vector<LevelAttempt>& attempts, std::ostream& out) {
  for (const auto& a : attempts) {
    out << "level " << a.level << " (" << a.cells << " cells, " << a.observer_states
        << " observer states): delta gain bound " << to_decimal_string(a.delta_bound) << ", tau "
        << to_decimal_string(a.tau) << ": " << (a.converged ? "" : "not successful; ") << a.diagnosis << '\n';
  }
}

struct Context {
  std::ostream& out;
  std::ostream& err;
};

int cmd_abstract(Context& cx, const std::string& scenario_path, int level, const std::string& out_path,
                 bool bound_only) {
  const Scenario s = load_scenario(scenario_path);
  const Plant1D plant = scenario_plant(s);
  const ObserverMachine obs = build_observer(plant, build_partition(plant, s.base_cells, level));
  const DeltaBound bound = delta_gain_bound(obs, scenario_error_model(s));
  if (!bound_only) {
    cx.out << "level " << level << ": " << obs.partition.cells << " cells of width "
           << to_decimal_string(obs.partition.width) << ", " << obs.states.size() << " observer states\n";
  }
  cx.out << "delta gain bound: " << to_decimal_string(bound.gamma_bound) << '\n';
  if (!bound.witness.empty()) {
    cx.out << "witness cycle:";
    for (const auto& e : bound.witness) cx.out << "\n  " << edge_text(obs, e);
    cx.out << '\n';
  }
  if (!bound_only) {
    if (out_path.empty()) {
      cx.out << write_observer_edges(obs);
    } else {
      write_file(out_path, write_observer_edges(obs));
      cx.out << "observer written to " << out_path << '\n';
    }
  }
  return kExitOk;
}

int cmd_synthesize(Context& cx, const std::string& scenario_path, std::optional<int> level,
                   const std::string& certificate_path, const std::string& controller_path, bool retry_tau) {
  const Scenario s = load_scenario(scenario_path);
  const Plant1D plant = scenario_plant(s);
  PipelineOptions options = scenario_pipeline_options(s);
  options.retry_tau = retry_tau;
  const PipelineResult result =
      level ? synthesize_level(plant, scenario_objective(s), scenario_error_model(s), *level, options)
            : synthesize_pipeline(plant, scenario_objective(s), scenario_error_model(s), options);
  print_attempts(result.attempts, cx.out);
  if (!result.success) {
    cx.out << "synthesis not successful";
    if (!level) cx.out << " up to level " << options.max_level;
    cx.out << '\n';
    return kExitInfeasible;
  }
  const SynthesisResult& r = *result.success;
  cx.out << "success at level " << r.level << '\n';
  cx.out << "controller states: " << r.controller.reachable_state_count() << " (reference value "
         << kReferenceControllerStates << ")\n";
  cx.out << "value bound B: " << to_decimal_string(r.certificate.value_bound) << '\n';
  if (!controller_path.empty()) write_file(controller_path, write_dfm_table(r.controller.machine));
  if (!certificate_path.empty()) {
    write_file(certificate_path, write_certificate({s, r.certificate, r.controller.machine}));
  }
  return kExitOk;
}

int cmd_simulate(Context& cx, const std::string& scenario_path, const std::string& controller_path,
                 const std::string& x0_text, std::optional<std::size_t> steps, const std::string& out_path) {
  const Scenario s = load_scenario(scenario_path);
  const Plant1D plant = scenario_plant(s);
  const Dfm table = read_dfm_table(read_file(controller_path));
  const int level = controller_level(table, s.base_cells);
  const ObserverMachine obs = build_observer(plant, build_partition(plant, s.base_cells, level));
  const ControllerDfm controller = attach_controller(table, obs);
  const Rational x0 = parse_rational(x0_text);
  if (x0 < 0 || x0 > plant.height) throw ConfigError("x0 outside [0, h]");
  const ClosedLoopRun run =
      closed_loop_sim(plant, controller, x0, steps.value_or(s.sim_steps), scenario_objective(s), &obs);
  const std::string csv = write_trajectory_csv(run, obs.controls);
  if (out_path.empty()) {
    cx.out << csv;
  } else {
    write_file(out_path, csv);
    const ObjectiveReport report = empirical_objective_check(run, scenario_objective(s));
    cx.out << "minimum partial sum " << to_decimal_string(report.min_partial_sum) << ", last v != 0 at "
           << (report.last_nonzero_v ? std::to_string(*report.last_nonzero_v) : std::string("none")) << '\n';
  }
  return kExitOk;
}

int cmd_certify(Context& cx, const std::string& certificate_path) {
  const CertificateDocument doc = read_certificate(read_file(certificate_path));
  try {
    const Plant1D plant = scenario_plant(doc.scenario);
    const Partition partition = build_partition(plant, doc.scenario.base_cells, doc.certificate.level);
    if (partition.cells != doc.certificate.cells) throw CertificateError("cell count does not match the level");
    const ObserverMachine obs = build_observer(plant, partition);
    const ControllerDfm controller = attach_controller(doc.controller, obs);
    verify_certificate(doc.certificate, plant, obs, controller, scenario_objective(doc.scenario),
                       scenario_error_model(doc.scenario));
  } catch (const CertificateError&) {
    throw;
  } catch (const Error& e) {
    throw CertificateError(e.what());
  }
  const Certificate& c = doc.certificate;
  cx.out << "certificate valid: level " << c.level << ", gamma " << to_decimal_string(c.gamma_bound) << ", tau "
         << to_decimal_string(c.tau) << ", B " << to_decimal_string(c.value_bound) << '\n';
  for (const auto& line : c.chain) cx.out << "  " << line << '\n';
  return kExitOk;
}

std::string x0_tag(const Rational& x0) {
  std::string tag = to_decimal_string(x0);
  for (char& ch : tag) {
    if (ch == '/') ch = '_';
  }
  return tag;
}

int cmd_demo_tank(Context& cx, const std::string& out_dir, std::optional<std::size_t> steps) {
  namespace fs = std::filesystem;
  const Scenario s = reference_scenario();
  const Plant1D plant = scenario_plant(s);
  const Objective objective = scenario_objective(s);
  const ErrorModel model = scenario_error_model(s);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create " + out_dir + ": " + ec.message());
  const fs::path dir(out_dir);
  write_file((dir / "scenario.json").string(), write_scenario(s));

  cx.out << "water tank: displacement " << to_decimal_string(tank_displacement(s.tank)) << " cm per sample, band ["
         << to_decimal_string(s.tank.band.lo) << ", " << to_decimal_string(s.tank.band.hi) << "], threshold "
         << to_decimal_string(s.tank.threshold) << '\n';
  std::vector<std::string> bounds;
  for (int level = 1; level <= 3; ++level) {
    const ObserverMachine obs = build_observer(plant, build_partition(plant, s.base_cells, level));
    const DeltaBound bound = delta_gain_bound(obs, model);
    bounds.push_back(to_decimal_string(bound.gamma_bound));
    write_file((dir / ("observer_level" + std::to_string(level) + ".txt")).string(), write_observer_edges(obs));
  }
  cx.out << "delta gain bounds for levels 1-3: " << bounds[0] << ", " << bounds[1] << ", " << bounds[2] << '\n';

  const PipelineResult result = synthesize_pipeline(plant, objective, model, scenario_pipeline_options(s));
  print_attempts(result.attempts, cx.out);
  if (!result.success) {
    cx.out << "synthesis not successful up to level " << s.max_level << '\n';
    return kExitInfeasible;
  }
  const SynthesisResult& r = *result.success;
  cx.out << "success at level " << r.level << '\n';
  cx.out << "controller states: " << r.controller.reachable_state_count() << " (reference value "
         << kReferenceControllerStates << "; counts depend on the observer construction)\n";
  cx.out << "value bound B: " << to_decimal_string(r.certificate.value_bound) << '\n';

  const std::string cert_path = (dir / "certificate.json").string();
  write_file(cert_path, write_certificate({s, r.certificate, r.controller.machine}));
  write_file((dir / "controller.txt").string(), write_dfm_table(r.controller.machine));
  const CertificateDocument reread = read_certificate(read_file(cert_path));
  verify_certificate(reread.certificate, plant, r.observer, attach_controller(reread.controller, r.observer),
                     objective, model);
  cx.out << "certificate re-verified from " << cert_path << '\n';

  const bool open_loop = check_eventual_exactness(r.observer, plant).has_value();
  const auto closed_loop = check_eventual_exactness(r.observer, plant, controller_edge_filter(r.controller));
  cx.out << "eventual exactness: open loop " << (open_loop ? "certified" : "not certified") << ", closed loop "
         << (closed_loop ? "certified with T* = " + std::to_string(closed_loop->t_star) : std::string("not certified"))
         << '\n';

  const std::size_t horizon = steps.value_or(s.sim_steps);
  bool all_ok = true;
  for (const Rational& x0 : s.sim_x0) {
    const ClosedLoopRun run = closed_loop_sim(plant, r.controller, x0, horizon, objective, &r.observer);
    write_file((dir / ("trajectory_x0_" + x0_tag(x0) + ".csv")).string(), write_trajectory_csv(run, r.observer.controls));
    const ObjectiveReport report = empirical_objective_check(run, objective);
    const auto violation = certificate_violation(run, r.certificate, objective, model, r.observer.controls);
    const std::size_t settle = report.last_nonzero_v ? *report.last_nonzero_v + 1 : 0;
    all_ok = all_ok && !violation && settle <= horizon;
    cx.out << "x0 = " << to_decimal_string(x0) << ": v = 0 from t = " << settle << ", minimum partial sum "
           << to_decimal_string(report.min_partial_sum) << ", certificate inequality "
           << (violation ? "violated at t = " + std::to_string(*violation) : std::string("holds")) << '\n';
  }
  cx.out << "artifacts written to " << out_dir << '\n';
  return all_ok ? kExitOk : kExitCertificate;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite-state abstraction and certified controller synthesis", "dfmsynth"};
  app.require_subcommand(1);

  std::string scenario_path;
  int level = 1;
  std::string out_path;
  auto* abstract = app.add_subcommand("abstract", "Build an observer and print its error-system gain bound");
  abstract->add_option("--scenario", scenario_path, "Scenario JSON (default: the water tank)");
  abstract->add_option("--level", level, "Abstraction level")->required()->check(CLI::Range(1, 20));
  abstract->add_option("--out", out_path, "Write the observer edge list here instead of stdout");

  auto* gain = app.add_subcommand("gain", "Print the error-system gain bound of one level");
  gain->add_option("--scenario", scenario_path, "Scenario JSON (default: the water tank)");
  gain->add_option("--level", level, "Abstraction level")->required()->check(CLI::Range(1, 20));

  std::optional<int> synth_level;
  std::string certificate_path;
  std::string controller_path;
  bool retry_tau = false;
  auto* synthesize = app.add_subcommand("synthesize", "Synthesize at one level or refine until success");
  synthesize->add_option("--scenario", scenario_path, "Scenario JSON (default: the water tank)");
  synthesize->add_option("--level", synth_level, "Single level (default: levels 1..max_level)")
      ->check(CLI::Range(1, 20));
  synthesize->add_option("--certificate", certificate_path, "Write the certificate JSON here");
  synthesize->add_option("--controller", controller_path, "Write the controller table here");
  synthesize->add_flag("--retry-tau", retry_tau, "Retry with tau scaled by 2 and 4 on divergence");

  std::string x0_text;
  std::optional<std::size_t> steps;
  auto* simulate = app.add_subcommand("simulate", "Run the plant in closed loop with a controller table");
  simulate->add_option("--scenario", scenario_path, "Scenario JSON (default: the water tank)");
  simulate->add_option("--controller", controller_path, "Controller table")->required();
  simulate->add_option("--x0", x0_text, "Initial level in cm, e.g. 25/2")->required();
  simulate->add_option("--steps", steps, "Number of steps (default: scenario sim.steps)");
  simulate->add_option("--out", out_path, "Write the CSV here instead of stdout");

  auto* certify_cmd = app.add_subcommand("certify", "Re-verify a certificate file");
  certify_cmd->add_option("--certificate", certificate_path, "Certificate JSON")->required();

  std::string out_dir = "tank_artifacts";
  auto* demo = app.add_subcommand("demo-tank", "Run the water tank example end to end");
  demo->add_option("--out-dir", out_dir, "Artifact directory");
  demo->add_option("--steps", steps, "Simulation horizon (default 1000)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  Context cx{out, err};
  try {
    if (*abstract) return cmd_abstract(cx, scenario_path, level, out_path, false);
    if (*gain) return cmd_abstract(cx, scenario_path, level, {}, true);
    if (*synthesize) return cmd_synthesize(cx, scenario_path, synth_level, certificate_path, controller_path, retry_tau);
    if (*simulate) return cmd_simulate(cx, scenario_path, controller_path, x0_text, steps, out_path);
    if (*certify_cmd) return cmd_certify(cx, certificate_path);
    if (*demo) return cmd_demo_tank(cx, out_dir, steps);
  } catch (const CertificateError& e) {
    err << "certificate verification failed: " << e.what() << '\n';
    return kExitCertificate;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace dfmsynth
