#include "wante/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "wante/errors.hpp"
#include "wante/format.hpp"

namespace wante {

namespace fs = std::filesystem;
using nlohmann::json;

void ExperimentConfig::validate() const {
  if (topology.empty()) throw ValidationError("config: topology path is required");
  if (!tm && !fit) throw ValidationError("config: either tm or fit is required");
  if (scales.empty()) throw ValidationError("config: scales must be nonempty");
  for (double s : scales) {
    if (!std::isfinite(s) || s <= 0.0) throw ValidationError("config: scales must be positive");
  }
  if (models.empty()) throw ValidationError("config: models must be nonempty");
  if (policies.empty()) throw ValidationError("config: tunnel_policies must be nonempty");
  if (workers < 1) throw ValidationError("config: workers must be >= 1");
  if (fit && !(fit->sigma > 0.0)) throw ValidationError("config: fit sigma must be positive");
}

ExperimentConfig parse_experiment_config(std::string_view text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("config: expected a JSON object");

  static const std::vector<std::string> known = {
      "topology", "tm",      "fit",           "seed",      "scales",     "models",         "tunnel_policies",
      "backend",  "capacity_mode", "calibrate", "output_dir", "workers", "write_solutions", "comment"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ParseError("config: unknown key '" + key + "'");
    }
  }

  auto resolve = [&](const std::string& p) {
    return (fs::path(p).is_absolute() ? fs::path(p) : base_dir / p).lexically_normal();
  };
  ExperimentConfig cfg;
  try {
    cfg.topology = resolve(doc.at("topology").get<std::string>());
    if (doc.contains("tm")) cfg.tm = resolve(doc["tm"].get<std::string>());
    if (doc.contains("fit")) {
      LognormalFit fit;
      fit.mu = doc["fit"].at("mu").get<double>();
      fit.sigma = doc["fit"].at("sigma").get<double>();
      cfg.fit = fit;
    }
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("scales")) cfg.scales = doc["scales"].get<std::vector<double>>();
    if (doc.contains("models")) {
      cfg.models.clear();
      for (const auto& m : doc["models"]) cfg.models.push_back(parse_model_kind(m.get<std::string>()));
    }
    if (doc.contains("tunnel_policies")) {
      cfg.policies.clear();
      for (const auto& p : doc["tunnel_policies"]) cfg.policies.push_back(TunnelPolicy::parse(p.get<std::string>()));
    }
    if (doc.contains("backend")) cfg.backend = doc["backend"].get<std::string>();
    if (doc.contains("capacity_mode")) cfg.capacity_mode = parse_capacity_mode(doc["capacity_mode"].get<std::string>());
    if (doc.contains("calibrate")) cfg.calibrate = doc["calibrate"].get<bool>();
    if (doc.contains("output_dir")) cfg.output_dir = resolve(doc["output_dir"].get<std::string>());
    if (doc.contains("workers")) cfg.workers = doc["workers"].get<int>();
    if (doc.contains("write_solutions")) cfg.write_solutions = doc["write_solutions"].get<bool>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  return parse_experiment_config(read_file(path), path.parent_path());
}

std::string serialize_experiment_config(const ExperimentConfig& cfg) {
  json doc;
  doc["topology"] = cfg.topology.string();
  if (cfg.tm) doc["tm"] = cfg.tm->string();
  if (cfg.fit) doc["fit"] = {{"mu", cfg.fit->mu}, {"sigma", cfg.fit->sigma}};
  doc["seed"] = cfg.seed;
  doc["scales"] = cfg.scales;
  doc["models"] = json::array();
  for (ModelKind m : cfg.models) doc["models"].push_back(to_string(m));
  doc["tunnel_policies"] = json::array();
  for (const auto& p : cfg.policies) doc["tunnel_policies"].push_back(p.name());
  doc["backend"] = cfg.backend;
  doc["capacity_mode"] = to_string(cfg.capacity_mode);
  doc["calibrate"] = cfg.calibrate;
  doc["output_dir"] = cfg.output_dir.string();
  doc["workers"] = cfg.workers;
  doc["write_solutions"] = cfg.write_solutions;
  return doc.dump(2);
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

bool delivers_all(const Topology& topo, const TrafficMatrix& tm, const TunnelSet& ts, const lp::LpBackend& backend,
                  double routable_volume) {
  const TeModel model = build_te_lp(topo, tm, ts);
  const lp::LpSolution lp_sol = lp::solve(model.problem, backend);
  const TeSolution sol = extract_solution(lp_sol, model, topo, ts);
  return routable_volume - sol.objective <= 1e-6 * routable_volume;
}

}  // namespace

CalibrationResult calibrate_capacities(const Topology& topo, const TrafficMatrix& tm, const TunnelSet& ts,
                                       const lp::LpBackend& backend) {
  CalibrationResult result;
  result.unroutable_demands = ts.unroutable_demands();
  double routable = 0.0;
  for (const Demand& d : tm.demands()) {
    if (!ts.of_demand(d.id).empty()) routable += d.volume;
  }
  if (routable <= 0.0) return result;

  auto feasible = [&](double factor) {
    ++result.solves;
    return delivers_all(scale_capacities(topo, factor), tm, ts, backend, routable);
  };

  double lo = 0.0;
  double hi = 1.0;
  if (feasible(1.0)) {
    lo = 0.5;
    while (feasible(lo)) {
      hi = lo;
      lo /= 2.0;
      if (lo < 1e-12) throw SolveError("calibration: demands fit at every capacity factor");
    }
  } else {
    lo = 1.0;
    hi = 2.0;
    while (!feasible(hi)) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e12) throw SolveError("calibration: no finite capacity factor delivers every demand");
    }
  }
  while ((hi - lo) > 1e-3 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  result.factor = hi;
  return result;
}

PointResult run_point(const Topology& topo, const TrafficMatrix& tm, const TunnelSet& ts, const ScenarioSet& scen,
                      ModelKind model_kind, CapacityMode mode, const lp::LpBackend& backend) {
  using Clock = std::chrono::steady_clock;
  PointResult out;
  const auto start = Clock::now();
  TeModel model = model_kind == ModelKind::kTe ? build_te_lp(topo, tm, ts) : build_ffc_lp(topo, tm, ts, scen, mode);
  out.build_time_s = std::chrono::duration<double>(Clock::now() - start).count();
  out.num_variables = model.problem.num_variables();
  out.num_constraints = model.problem.num_constraints();

  const lp::LpSolution lp_sol = lp::solve(model.problem, backend);
  out.status = lp_sol.status;
  if (!lp_sol.optimal()) {
    out.error = lp_sol.diagnostics;
    return out;
  }
  out.solution = extract_solution(lp_sol, model, topo, ts);
  out.metrics = compute_metrics(*out.solution, tm, ts, topo);
  if (model_kind == ModelKind::kFfc) out.verification = verify_congestion_free(*out.solution, topo, ts, scen);
  return out;
}

std::string results_csv_header() {
  return "model,policy,scale,seed,backend,capacity_mode,status,objective,num_variables,num_constraints,"
         "total_tunnels,solver_time_s,build_time_s,mean_utility,overprovisioning_ratio,unmet_flow_ratio,"
         "unmet_demands_ratio,used_tunnel_ratio,critical_link_fraction,network_criticality,congestion_free";
}

std::string results_csv_row(const ResultRow& row) {
  std::string out;
  auto field = [&](const std::string& v) {
    if (!out.empty()) out += ',';
    out += v;
  };
  field(std::string(to_string(row.model)));
  field(row.policy);
  field(format_double(row.scale));
  field(std::to_string(row.seed));
  field(row.backend);
  field(std::string(to_string(row.capacity_mode)));
  field(row.status);
  const bool ok = row.metrics.has_value();
  field(ok ? format_double(row.objective) : "");
  field(std::to_string(row.num_variables));
  field(std::to_string(row.num_constraints));
  field(std::to_string(row.total_tunnels));
  field(format_double(row.solver_time_s));
  field(format_double(row.build_time_s));
  if (ok) {
    const MetricsReport& m = *row.metrics;
    for (double v : {m.mean_utility, m.overprovisioning_ratio, m.unmet_flow_ratio, m.unmet_demands_ratio,
                     m.used_tunnel_ratio, m.critical_link_fraction, m.network_criticality}) {
      field(format_double(v));
    }
  } else {
    for (int i = 0; i < 7; ++i) field("");
  }
  field(row.congestion_free);
  return out;
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw FileError("cannot write '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

namespace {

struct Point {
  ModelKind model;
  int policy;
  double scale;
};

json row_json(const ResultRow& row) {
  json j;
  j["model"] = to_string(row.model);
  j["policy"] = row.policy;
  j["scale"] = row.scale;
  j["seed"] = row.seed;
  j["backend"] = row.backend;
  j["capacity_mode"] = to_string(row.capacity_mode);
  j["status"] = row.status;
  if (!row.error.empty()) j["error"] = row.error;
  j["objective"] = row.objective;
  j["num_variables"] = row.num_variables;
  j["num_constraints"] = row.num_constraints;
  j["total_tunnels"] = row.total_tunnels;
  j["solver_time_s"] = row.solver_time_s;
  j["build_time_s"] = row.build_time_s;
  j["congestion_free"] = row.congestion_free;
  j["violations"] = row.violations;
  if (row.metrics) j["metrics"] = json::parse(metrics_json(*row.metrics));
  return j;
}

std::string solution_filename(const ResultRow& row) {
  std::string policy = row.policy;
  for (char& c : policy) {
    if (c == ':' || c == ',') c = '_';
  }
  return std::string(to_string(row.model)) + "_" + policy + "_s" + format_double(row.scale) + ".json";
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto backend = lp::make_backend(cfg.backend);
  const Topology base_topo = load_topology(cfg.topology);
  const TrafficMatrix base_tm = cfg.tm ? load_tm(*cfg.tm, base_topo) : generate_lognormal_tm(base_topo, *cfg.fit, cfg.seed);

  std::vector<TunnelSet> tunnel_sets;
  for (const auto& policy : cfg.policies) tunnel_sets.push_back(build_tunnel_sets(base_topo, base_tm, policy));

  ExperimentResult result;
  result.config_hash = fnv1a_hex(serialize_experiment_config(cfg));
  result.unroutable_demands = tunnel_sets.front().unroutable_demands();
  if (cfg.calibrate) {
    double factor = 0.0;
    for (const auto& ts : tunnel_sets) factor = std::max(factor, calibrate_capacities(base_topo, base_tm, ts, *backend).factor);
    result.capacity_factor = factor;
  }
  const Topology topo = cfg.calibrate ? scale_capacities(base_topo, result.capacity_factor) : base_topo;
  const ScenarioSet scen = enumerate_single_link_scenarios(topo);

  std::vector<Point> points;
  for (ModelKind m : cfg.models) {
    for (int p = 0; p < static_cast<int>(cfg.policies.size()); ++p) {
      for (double s : cfg.scales) points.push_back({m, p, s});
    }
  }

  result.rows.resize(points.size());
  std::vector<std::string> solutions(points.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < points.size(); i = next++) {
      const Point& pt = points[i];
      const TunnelSet& ts = tunnel_sets[pt.policy];
      ResultRow& row = result.rows[i];
      row.model = pt.model;
      row.policy = cfg.policies[pt.policy].name();
      row.scale = pt.scale;
      row.seed = cfg.seed;
      row.backend = cfg.backend;
      row.capacity_mode = cfg.capacity_mode;
      row.total_tunnels = ts.total_tunnels();
      try {
        const TrafficMatrix tm = scale_tm(base_tm, pt.scale);
        PointResult pr = run_point(topo, tm, ts, scen, pt.model, cfg.capacity_mode, *backend);
        row.status = std::string(lp::to_string(pr.status));
        row.error = pr.error;
        row.num_variables = pr.num_variables;
        row.num_constraints = pr.num_constraints;
        row.build_time_s = pr.build_time_s;
        if (pr.ok()) {
          row.objective = pr.solution->objective;
          row.solver_time_s = pr.solution->solve_time_s;
          row.metrics = pr.metrics;
          if (pr.verification) {
            row.violations = static_cast<int>(pr.verification->violations.size());
            row.congestion_free = pr.verification->congestion_free() ? "pass" : "fail";
          }
          if (cfg.write_solutions) {
            solutions[i] = serialize_solution(*pr.solution, topo, tm, ts, pt.scale, result.capacity_factor);
          }
        }
      } catch (const std::exception& e) {
        row.status = "error";
        row.error = e.what();
      }
    }
  };
  const int threads = std::min<int>(cfg.workers, static_cast<int>(points.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::string csv = results_csv_header() + "\n";
  json rows_json = json::array();
  int peak_vars = 0;
  int peak_rows = 0;
  for (size_t i = 0; i < result.rows.size(); ++i) {
    const ResultRow& row = result.rows[i];
    csv += results_csv_row(row) + "\n";
    rows_json.push_back(row_json(row));
    peak_vars = std::max(peak_vars, row.num_variables);
    peak_rows = std::max(peak_rows, row.num_constraints);
    if (!solutions[i].empty()) write_file_atomic(cfg.output_dir / "solutions" / solution_filename(row), solutions[i]);
  }
  write_file_atomic(cfg.output_dir / "results.csv", csv);
  write_file_atomic(cfg.output_dir / "results.json", rows_json.dump(1));

  json manifest;
  manifest["version"] = kVersion;
  manifest["seed"] = cfg.seed;
  manifest["config_hash"] = result.config_hash;
  manifest["config"] = json::parse(serialize_experiment_config(cfg));
  manifest["topology"] = topo.name();
  manifest["num_demands"] = base_tm.size();
  manifest["num_scenarios"] = scen.size();
  manifest["capacity_factor"] = result.capacity_factor;
  manifest["unroutable_demands"] = result.unroutable_demands;
  manifest["peak_variables"] = peak_vars;
  manifest["peak_constraints"] = peak_rows;
  manifest["rows"] = result.rows.size();
  write_file_atomic(cfg.output_dir / "manifest.json", manifest.dump(2));
  return result;
}

}  // namespace wante
