#include "wante/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "wante/errors.hpp"
#include "wante/harness.hpp"

namespace wante {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Flags {
  std::string topo;
  std::string tm;
  std::string model = "te";
  std::vector<std::string> tunnels;
  std::vector<std::string> models;
  std::string capacity_mode = "all";
  std::vector<double> scales;
  double scale = 1.0;
  std::uint64_t seed = 1;
  std::string backend = "simplex";
  std::string out;
  int workers = 1;
  std::string config;
  std::string solution;
  double mu = 0.0;
  double sigma = 1.0;
  std::string fit_from;
  bool calibrate = false;
  bool per_link = false;
};

class VerifyFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text << "\n";
  } else {
    write_file_atomic(path, text + "\n");
  }
}

json verification_json(const VerificationReport& report, const Topology& topo, const TrafficMatrix& tm) {
  json j;
  j["congestion_free"] = report.congestion_free();
  j["scenarios_checked"] = report.scenarios_checked;
  j["violations"] = json::array();
  for (const Violation& v : report.violations) {
    json item;
    item["scenario"] = v.scenario;
    item["slack"] = v.slack;
    if (v.kind == Violation::Kind::kCapacity) {
      const Arc& arc = topo.arc(v.index);
      item["kind"] = "capacity";
      item["arc"] = v.index;
      item["link"] = {topo.node(arc.src).id, topo.node(arc.dst).id};
    } else {
      const Demand& d = tm.demand(v.index);
      item["kind"] = "delivery";
      item["demand"] = {topo.node(d.src).id, topo.node(d.dst).id};
    }
    j["violations"].push_back(std::move(item));
  }
  return j;
}

int run_solve(const Flags& f, std::ostream& out) {
  const Topology topo = load_topology(f.topo);
  const TrafficMatrix tm = scale_tm(load_tm(f.tm, topo), f.scale);
  const auto policy = TunnelPolicy::parse(f.tunnels.empty() ? "fixed:5" : f.tunnels.front());
  const ModelKind model = parse_model_kind(f.model);
  const CapacityMode mode = parse_capacity_mode(f.capacity_mode);
  const auto backend = lp::make_backend(f.backend);

  const TunnelSet ts = build_tunnel_sets(topo, tm, policy);
  const ScenarioSet scen = enumerate_single_link_scenarios(topo);
  const PointResult pr = run_point(topo, tm, ts, scen, model, mode, *backend);
  if (!pr.ok()) {
    throw SolveError("solve failed: " + std::string(lp::to_string(pr.status)) +
                     (pr.error.empty() ? "" : " (" + pr.error + ")"));
  }
  const std::string dump = serialize_solution(*pr.solution, topo, tm, ts, f.scale);
  if (!f.out.empty()) write_file_atomic(f.out, dump + "\n");

  json doc;
  doc["solution"] = json::parse(dump);
  doc["metrics"] = json::parse(metrics_json(*pr.metrics));
  if (f.per_link) doc["metrics"]["link_utilizations_per_link"] = link_utilization_per_link(pr.metrics->link_utilizations, topo);
  doc["num_variables"] = pr.num_variables;
  doc["num_constraints"] = pr.num_constraints;
  doc["build_time_s"] = pr.build_time_s;
  if (pr.verification) doc["verification"] = verification_json(*pr.verification, topo, tm);
  out << doc.dump(1) << "\n";
  if (pr.verification && !pr.verification->congestion_free()) {
    throw VerifyFailed("FFC solution failed the congestion-free check");
  }
  return kExitOk;
}

int run_sweep(const Flags& f, const CLI::App& cmd, std::ostream& out) {
  ExperimentConfig cfg;
  if (!f.config.empty()) {
    cfg = load_experiment_config(f.config);
  } else {
    if (f.topo.empty()) throw ValidationError("sweep: either --config or --topo is required");
    cfg.topology = f.topo;
    if (!f.tm.empty()) {
      cfg.tm = f.tm;
    } else if (cmd.count("--mu") || cmd.count("--sigma")) {
      cfg.fit = LognormalFit{f.mu, f.sigma, 0};
    } else {
      throw ValidationError("sweep: --tm or --mu/--sigma is required without --config");
    }
  }
  if (cmd.count("--topo") && !f.config.empty()) cfg.topology = f.topo;
  if (cmd.count("--tm") && !f.config.empty()) cfg.tm = f.tm;
  if (cmd.count("--scales")) cfg.scales = f.scales;
  if (cmd.count("--model")) {
    cfg.models.clear();
    for (const auto& m : f.models) cfg.models.push_back(parse_model_kind(m));
  }
  if (cmd.count("--tunnels")) {
    cfg.policies.clear();
    for (const auto& p : f.tunnels) cfg.policies.push_back(TunnelPolicy::parse(p));
  }
  if (cmd.count("--capacity-mode")) cfg.capacity_mode = parse_capacity_mode(f.capacity_mode);
  if (cmd.count("--seed")) cfg.seed = f.seed;
  if (cmd.count("--backend")) cfg.backend = f.backend;
  if (cmd.count("--out")) cfg.output_dir = f.out;
  if (cmd.count("--workers")) cfg.workers = f.workers;
  if (cmd.count("--calibrate")) cfg.calibrate = true;

  const ExperimentResult result = run_experiment(cfg);
  int failed = 0;
  int unsound = 0;
  for (const ResultRow& row : result.rows) {
    if (!row.metrics) ++failed;
    if (row.congestion_free == "fail") ++unsound;
  }
  out << "rows: " << result.rows.size() << " (failed: " << failed << ")\n"
      << "capacity_factor: " << result.capacity_factor << "\n"
      << "results: " << (cfg.output_dir / "results.csv").string() << "\n";
  if (unsound > 0) throw VerifyFailed(std::to_string(unsound) + " FFC rows failed the congestion-free check");
  return kExitOk;
}

int run_calibrate(const Flags& f, std::ostream& out) {
  const Topology topo = load_topology(f.topo);
  const TrafficMatrix tm = load_tm(f.tm, topo);
  const auto backend = lp::make_backend(f.backend);
  std::vector<std::string> policies = f.tunnels;
  if (policies.empty()) policies = {"fixed:5"};
  json doc;
  double factor = 0.0;
  int solves = 0;
  std::vector<int> unroutable;
  for (const auto& name : policies) {
    const TunnelSet ts = build_tunnel_sets(topo, tm, TunnelPolicy::parse(name));
    const CalibrationResult r = calibrate_capacities(topo, tm, ts, *backend);
    factor = std::max(factor, r.factor);
    solves += r.solves;
    unroutable = r.unroutable_demands;
  }
  doc["factor"] = factor;
  doc["solves"] = solves;
  doc["unroutable_demands"] = json::array();
  for (int d : unroutable) {
    doc["unroutable_demands"].push_back({topo.node(tm.demand(d).src).id, topo.node(tm.demand(d).dst).id});
  }
  if (!f.out.empty()) write_file_atomic(f.out, serialize_topology(scale_capacities(topo, factor)) + "\n");
  out << doc.dump(1) << "\n";
  return kExitOk;
}

int run_verify(const Flags& f, std::ostream& out) {
  const Topology raw = load_topology(f.topo);
  const LoadedSolution loaded = parse_solution(read_file(f.solution), raw);
  const Topology topo = loaded.capacity_factor == 1.0 ? raw : scale_capacities(raw, loaded.capacity_factor);
  const ScenarioSet scen = enumerate_single_link_scenarios(topo);
  const VerificationReport report = verify_congestion_free(loaded.solution, topo, loaded.tunnels, scen);
  out << verification_json(report, topo, loaded.tm).dump(1) << "\n";
  if (!report.congestion_free()) {
    throw VerifyFailed(std::to_string(report.violations.size()) + " violations across " +
                       std::to_string(report.scenarios_checked) + " scenarios");
  }
  return kExitOk;
}

int run_gen_tm(const Flags& f, const CLI::App& cmd, std::ostream& out) {
  const Topology topo = load_topology(f.topo);
  LognormalFit fit{f.mu, f.sigma, 0};
  if (!f.fit_from.empty()) {
    fit = fit_lognormal(load_tm(f.fit_from, topo));
  } else if (!cmd.count("--mu") || !cmd.count("--sigma")) {
    throw ValidationError("gen-tm: --mu and --sigma (or --fit-from) are required");
  }
  if (!(fit.sigma > 0.0)) throw ValidationError("gen-tm: sigma must be positive");
  const TrafficMatrix tm = scale_tm(generate_lognormal_tm(topo, fit, f.seed), f.scale);
  const std::string comment = "synthetic lognormal TM: mu=" + std::to_string(fit.mu) +
                              " sigma=" + std::to_string(fit.sigma) + " seed=" + std::to_string(f.seed);
  write_output(f.out, serialize_tm(tm, topo, comment), out);
  return kExitOk;
}

int run_fit_tm(const Flags& f, std::ostream& out) {
  const Topology topo = load_topology(f.topo);
  const LognormalFit fit = fit_lognormal(load_tm(f.tm, topo));
  json doc{{"mu", fit.mu}, {"sigma", fit.sigma}, {"n_samples", fit.n_samples}};
  write_output(f.out, doc.dump(1), out);
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"WAN traffic-engineering lab: TE/FFC LP models, sweeps and metrics", "wante"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  Flags f;

  auto* solve = app.add_subcommand("solve", "Solve one TE or FFC instance and print solution and metrics");
  solve->add_option("--topo", f.topo, "Topology JSON")->required();
  solve->add_option("--tm", f.tm, "Traffic matrix (JSON or CSV)")->required();
  solve->add_option("--model", f.model, "te | ffc");
  solve->add_option("--tunnels", f.tunnels, "fixed:K | adaptive")->expected(1);
  solve->add_option("--capacity-mode", f.capacity_mode, "all | normal-only");
  solve->add_option("--scale", f.scale, "Demand scale factor");
  solve->add_option("--backend", f.backend, "LP backend");
  solve->add_option("--out", f.out, "Also write the solution dump to this file");
  solve->add_flag("--per-link", f.per_link, "Also report utilization per undirected link");

  auto* sweep = app.add_subcommand("sweep", "Run a model x policy x scale sweep and write results");
  sweep->add_option("--config", f.config, "Experiment config JSON");
  sweep->add_option("--topo", f.topo, "Topology JSON");
  sweep->add_option("--tm", f.tm, "Traffic matrix (JSON or CSV)");
  sweep->add_option("--mu", f.mu, "Lognormal mu when no TM is given");
  sweep->add_option("--sigma", f.sigma, "Lognormal sigma when no TM is given");
  sweep->add_option("--model", f.models, "te | ffc (repeatable)");
  sweep->add_option("--tunnels", f.tunnels, "fixed:K | adaptive (repeatable)");
  sweep->add_option("--capacity-mode", f.capacity_mode, "all | normal-only");
  sweep->add_option("--scales", f.scales, "Comma-separated demand scales")->delimiter(',');
  sweep->add_option("--seed", f.seed, "Seed recorded in results and used for TM sampling");
  sweep->add_option("--backend", f.backend, "LP backend");
  sweep->add_option("--out", f.out, "Output directory");
  sweep->add_option("--workers", f.workers, "Concurrent sweep points");
  sweep->add_flag("--calibrate", f.calibrate, "Calibrate capacities to the base TM first");

  auto* calibrate = app.add_subcommand("calibrate", "Find the minimal capacity factor meeting the TM");
  calibrate->add_option("--topo", f.topo, "Topology JSON")->required();
  calibrate->add_option("--tm", f.tm, "Traffic matrix (JSON or CSV)")->required();
  calibrate->add_option("--tunnels", f.tunnels, "fixed:K | adaptive (repeatable)");
  calibrate->add_option("--backend", f.backend, "LP backend");
  calibrate->add_option("--out", f.out, "Write the scaled topology here");

  auto* verify = app.add_subcommand("verify", "Check a solution dump for congestion under single-link failures");
  verify->add_option("--solution", f.solution, "Solution JSON")->required();
  verify->add_option("--topo", f.topo, "Topology JSON")->required();

  auto* gen_tm = app.add_subcommand("gen-tm", "Sample a full-mesh lognormal traffic matrix");
  gen_tm->add_option("--topo", f.topo, "Topology JSON")->required();
  gen_tm->add_option("--mu", f.mu, "Log-space mean");
  gen_tm->add_option("--sigma", f.sigma, "Log-space standard deviation");
  gen_tm->add_option("--fit-from", f.fit_from, "Fit mu/sigma from this TM instead");
  gen_tm->add_option("--seed", f.seed, "RNG seed");
  gen_tm->add_option("--scale", f.scale, "Multiply sampled volumes");
  gen_tm->add_option("--out", f.out, "Output file (stdout if omitted)");

  auto* fit_tm = app.add_subcommand("fit-tm", "Fit a lognormal model to a traffic matrix");
  fit_tm->add_option("--topo", f.topo, "Topology JSON")->required();
  fit_tm->add_option("--tm", f.tm, "Traffic matrix (JSON or CSV)")->required();
  fit_tm->add_option("--out", f.out, "Output file (stdout if omitted)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*solve) return run_solve(f, out);
    if (*sweep) return run_sweep(f, *sweep, out);
    if (*calibrate) return run_calibrate(f, out);
    if (*verify) return run_verify(f, out);
    if (*gen_tm) return run_gen_tm(f, *gen_tm, out);
    if (*fit_tm) return run_fit_tm(f, out);
  } catch (const FileError& e) {
    err << "error: " << e.what() << "\n";
    return kExitMissingFile;
  } catch (const ParseError& e) {
    err << "error: invalid input: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const ValidationError& e) {
    err << "error: invalid input: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const VerifyFailed& e) {
    err << "error: not congestion-free: " << e.what() << "\n";
    return kExitVerifyFailed;
  } catch (const SolveError& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolveFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitUsage;
}

}  // namespace wante
