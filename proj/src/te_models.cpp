#include "wante/te_models.hpp"

#include <algorithm>
#include <string>

#include <json.hpp>

#include "wante/errors.hpp"

namespace wante {

using nlohmann::json;

std::string_view to_string(ModelKind kind) { return kind == ModelKind::kTe ? "te" : "ffc"; }

std::string_view to_string(CapacityMode mode) {
  return mode == CapacityMode::kAll ? "all" : "normal-only";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "te" || text == "TE") return ModelKind::kTe;
  if (text == "ffc" || text == "FFC") return ModelKind::kFfc;
  throw ValidationError("unknown model '" + std::string(text) + "' (expected te or ffc)");
}

CapacityMode parse_capacity_mode(std::string_view text) {
  if (text == "all") return CapacityMode::kAll;
  if (text == "normal-only" || text == "normal_only") return CapacityMode::kNormalOnly;
  throw ValidationError("unknown capacity mode '" + std::string(text) + "' (expected all or normal-only)");
}

namespace {

void add_columns(TeModel& model, const TrafficMatrix& tm, const TunnelSet& ts) {
  if (ts.num_demands() != tm.size()) {
    throw ValidationError("tunnel set does not match traffic matrix");
  }
  auto& lp = model.problem;
  model.tunnel_var.resize(ts.total_tunnels());
  model.demand_var.resize(tm.size());
  for (const Tunnel& t : ts.tunnels()) {
    model.tunnel_var[t.id] =
        lp.add_variable("a_f" + std::to_string(t.demand_id) + "_t" + std::to_string(t.id), 0.0, lp::kInfinity);
  }
  for (const Demand& d : tm.demands()) {
    const double upper = ts.of_demand(d.id).empty() ? 0.0 : d.volume;
    model.demand_var[d.id] = lp.add_variable("b_f" + std::to_string(d.id), 0.0, upper, 1.0);
  }
}

void add_capacity_row(TeModel& model, const Arc& arc, const std::vector<int>& tunnels, const std::string& name) {
  if (tunnels.empty()) return;
  std::vector<lp::Term> terms;
  terms.reserve(tunnels.size());
  for (int t : tunnels) terms.push_back({model.tunnel_var[t], 1.0});
  model.problem.add_constraint(name, std::move(terms), lp::RowSense::kLessEqual, arc.capacity);
}

void add_delivery_row(TeModel& model, int f, std::span<const int> tunnels, const std::string& name) {
  if (tunnels.empty()) return;
  std::vector<lp::Term> terms;
  terms.reserve(tunnels.size() + 1);
  for (int t : tunnels) terms.push_back({model.tunnel_var[t], 1.0});
  terms.push_back({model.demand_var[f], -1.0});
  model.problem.add_constraint(name, std::move(terms), lp::RowSense::kGreaterEqual, 0.0);
}

}  // namespace

TeModel build_te_lp(const Topology& topo, const TrafficMatrix& tm, const TunnelSet& ts) {
  TeModel model;
  model.kind = ModelKind::kTe;
  model.policy = ts.policy().name();
  add_columns(model, tm, ts);
  for (const Arc& arc : topo.arcs()) {
    const auto on_arc = ts.on_arc(arc.id);
    add_capacity_row(model, arc, std::vector<int>(on_arc.begin(), on_arc.end()), "cap_e" + std::to_string(arc.id));
  }
  for (const Demand& d : tm.demands()) {
    add_delivery_row(model, d.id, ts.of_demand(d.id), "dlv_f" + std::to_string(d.id));
  }
  return model;
}

TeModel build_ffc_lp(const Topology& topo, const TrafficMatrix& tm, const TunnelSet& ts,
                     const ScenarioSet& scen, CapacityMode mode) {
  if (scen.size() == 0 || scen.scenario(0).failed_link != -1) {
    throw ValidationError("scenario set must start with the normal condition");
  }
  TeModel model;
  model.kind = ModelKind::kFfc;
  model.capacity_mode = mode;
  model.num_scenarios = scen.size();
  model.policy = ts.policy().name();
  add_columns(model, tm, ts);

  for (int q = 0; q < scen.size(); ++q) {
    const auto alive = available_tunnels(ts, scen, q);
    const std::string suffix = "_q" + std::to_string(q);
    for (const Demand& d : tm.demands()) {
      if (alive[d.id].empty()) {
        model.problem.set_bounds(model.demand_var[d.id], 0.0, 0.0);
        continue;
      }
      add_delivery_row(model, d.id, alive[d.id], "dlv_f" + std::to_string(d.id) + suffix);
    }
    if (q > 0 && mode == CapacityMode::kNormalOnly) continue;
    for (const Arc& arc : topo.arcs()) {
      if (scen.arc_dead(q, arc.id)) continue;
      std::vector<int> tunnels;
      for (int t : ts.on_arc(arc.id)) {
        if (q == 0 || tunnel_alive(ts.tunnel(t), scen, q)) tunnels.push_back(t);
      }
      add_capacity_row(model, arc, tunnels, "cap_e" + std::to_string(arc.id) + suffix);
    }
  }
  return model;
}

std::vector<double> arc_loads(const Topology& topo, const TunnelSet& ts, std::span<const double> allocation) {
  std::vector<double> load(topo.num_arcs(), 0.0);
  for (const Tunnel& t : ts.tunnels()) {
    for (int a : t.arcs) load[a] += allocation[t.id];
  }
  return load;
}

TeSolution extract_solution(const lp::LpSolution& lp_sol, const TeModel& model, const Topology& topo,
                            const TunnelSet& ts) {
  if (!lp_sol.optimal()) {
    throw SolveError("LP solve ended with status " + std::string(lp::to_string(lp_sol.status)) +
                     (lp_sol.diagnostics.empty() ? "" : ": " + lp_sol.diagnostics));
  }
  TeSolution sol;
  sol.model = model.kind;
  sol.capacity_mode = model.capacity_mode;
  sol.policy = model.policy;
  sol.num_scenarios = model.num_scenarios;
  sol.solve_time_s = lp_sol.solve_time_s;
  sol.solution_kind = lp_sol.kind;

  sol.allocation.resize(model.tunnel_var.size());
  for (size_t t = 0; t < model.tunnel_var.size(); ++t) {
    sol.allocation[t] = std::max(0.0, lp_sol.values.at(model.tunnel_var[t]));
  }
  sol.delivered.resize(model.demand_var.size());
  for (size_t f = 0; f < model.demand_var.size(); ++f) {
    const lp::Variable& var = model.problem.variable(model.demand_var[f]);
    sol.delivered[f] = std::clamp(lp_sol.values.at(model.demand_var[f]), 0.0, var.upper);
    sol.objective += sol.delivered[f];
  }
  sol.arc_load = arc_loads(topo, ts, sol.allocation);
  return sol;
}

VerificationReport verify_congestion_free(const TeSolution& sol, const Topology& topo, const TunnelSet& ts,
                                          const ScenarioSet& scen) {
  if (static_cast<int>(sol.allocation.size()) != ts.total_tunnels() ||
      static_cast<int>(sol.delivered.size()) != ts.num_demands()) {
    throw ValidationError("solution does not match tunnel set");
  }
  VerificationReport report;
  std::vector<double> load(topo.num_arcs());
  for (int q = 0; q < scen.size(); ++q) {
    std::fill(load.begin(), load.end(), 0.0);
    std::vector<double> surviving(ts.num_demands(), 0.0);
    for (const Tunnel& t : ts.tunnels()) {
      if (!tunnel_alive(t, scen, q)) continue;
      const double a = sol.allocation[t.id];
      surviving[t.demand_id] += a;
      for (int e : t.arcs) load[e] += a;
    }
    for (const Arc& arc : topo.arcs()) {
      if (scen.arc_dead(q, arc.id)) continue;
      const double slack = arc.capacity - load[arc.id];
      if (slack < -kVerifyTolerance) {
        report.violations.push_back({q, Violation::Kind::kCapacity, arc.id, slack});
      }
    }
    for (int f = 0; f < ts.num_demands(); ++f) {
      const double slack = surviving[f] - sol.delivered[f];
      if (slack < -kVerifyTolerance) {
        report.violations.push_back({q, Violation::Kind::kDelivery, f, slack});
      }
    }
    ++report.scenarios_checked;
  }
  return report;
}

std::string serialize_solution(const TeSolution& sol, const Topology& topo, const TrafficMatrix& tm,
                               const TunnelSet& ts, double scale, double capacity_factor) {
  json doc;
  doc["model"] = to_string(sol.model);
  doc["policy"] = sol.policy;
  doc["scale"] = scale;
  doc["capacity_factor"] = capacity_factor;
  doc["capacity_mode"] = to_string(sol.capacity_mode);
  doc["num_scenarios"] = sol.num_scenarios;
  doc["objective"] = sol.objective;
  doc["solution_kind"] = lp::to_string(sol.solution_kind);
  doc["solve_time_s"] = sol.solve_time_s;
  doc["b"] = sol.delivered;
  json alloc = json::array();
  for (const Tunnel& t : ts.tunnels()) {
    alloc.push_back({{"demand", t.demand_id}, {"tunnel", t.id}, {"value", sol.allocation[t.id]}});
  }
  doc["a"] = std::move(alloc);
  doc["loads"] = sol.arc_load;
  json demands = json::array();
  for (const Demand& d : tm.demands()) {
    demands.push_back({{"src", topo.node(d.src).id}, {"dst", topo.node(d.dst).id}, {"volume", d.volume}});
  }
  doc["demands"] = std::move(demands);
  doc["tunnels"] = json::parse(dump_tunnels(ts, tm, topo));
  return doc.dump(1);
}

LoadedSolution parse_solution(std::string_view text, const Topology& topo) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("solution: ") + e.what());
  }
  try {
    std::vector<Demand> demands;
    for (const json& d : doc.at("demands")) {
      demands.push_back({0, topo.node_index(d.at("src").get<std::string>()),
                         topo.node_index(d.at("dst").get<std::string>()), d.at("volume").get<double>()});
    }
    TrafficMatrix tm(std::move(demands), topo.num_nodes());
    const auto policy = TunnelPolicy::parse(doc.at("policy").get<std::string>());
    TunnelSet ts = parse_tunnels(doc.at("tunnels").dump(), topo, tm, policy);

    TeSolution sol;
    sol.model = parse_model_kind(doc.at("model").get<std::string>());
    sol.capacity_mode = parse_capacity_mode(doc.value("capacity_mode", std::string("all")));
    sol.policy = policy.name();
    sol.num_scenarios = doc.value("num_scenarios", 1);
    sol.solve_time_s = doc.value("solve_time_s", 0.0);
    sol.solution_kind =
        doc.value("solution_kind", std::string("vertex")) == "interior" ? lp::SolutionKind::kInterior
                                                                        : lp::SolutionKind::kVertex;
    sol.delivered = doc.at("b").get<std::vector<double>>();
    if (static_cast<int>(sol.delivered.size()) != tm.size()) {
      throw ValidationError("solution: b has " + std::to_string(sol.delivered.size()) + " entries, expected " +
                            std::to_string(tm.size()));
    }
    sol.allocation.assign(ts.total_tunnels(), 0.0);
    for (const json& entry : doc.at("a")) {
      const int t = entry.at("tunnel").get<int>();
      if (t < 0 || t >= ts.total_tunnels() || ts.tunnel(t).demand_id != entry.at("demand").get<int>()) {
        throw ValidationError("solution: allocation entry references unknown tunnel " + std::to_string(t));
      }
      sol.allocation[t] = entry.at("value").get<double>();
    }
    for (double b : sol.delivered) sol.objective += b;
    sol.arc_load = arc_loads(topo, ts, sol.allocation);

    LoadedSolution out{std::move(tm), std::move(ts), std::move(sol)};
    out.scale = doc.value("scale", 1.0);
    out.capacity_factor = doc.value("capacity_factor", 1.0);
    return out;
  } catch (const json::exception& e) {
    throw ParseError(std::string("solution: ") + e.what());
  }
}

}  // namespace wante
