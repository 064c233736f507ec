#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wante/demands.hpp"
#include "wante/lp.hpp"
#include "wante/topology.hpp"
#include "wante/tunnels.hpp"

namespace wante {

enum class ModelKind { kTe, kFfc };

// Which FFC capacity rows are emitted: one set per scenario, or only for the
// normal condition (failures only remove load, so the latter is equivalent).
enum class CapacityMode { kAll, kNormalOnly };

std::string_view to_string(ModelKind kind);
std::string_view to_string(CapacityMode mode);
ModelKind parse_model_kind(std::string_view text);        // "te" | "ffc"
CapacityMode parse_capacity_mode(std::string_view text);  // "all" | "normal-only"

// An LP plus the column maps needed to read a TE solution back.
struct TeModel {
  lp::LpProblem problem;
  std::vector<int> tunnel_var;  // a_{f,t} column per tunnel id
  std::vector<int> demand_var;  // b_f column per demand id
  ModelKind kind = ModelKind::kTe;
  CapacityMode capacity_mode = CapacityMode::kAll;
  int num_scenarios = 1;
  std::string policy;
};

// max sum b_f  s.t.  per-arc load <= c_e,  sum_t a_{f,t} >= b_f,
// 0 <= b_f <= d_f, a >= 0. Demands with empty T_f have b_f fixed to 0.
TeModel build_te_lp(const Topology& topo, const TrafficMatrix& tm, const TunnelSet& ts);

// TE with T_f replaced by T_f^q for every scenario q: shared a/b columns,
// delivery rows per (f, q), capacity rows per (arc, q) over surviving tunnels
// (only q = 0 in normal-only mode). Any empty T_f^q fixes b_f to 0.
TeModel build_ffc_lp(const Topology& topo, const TrafficMatrix& tm, const TunnelSet& ts,
                     const ScenarioSet& scen, CapacityMode mode = CapacityMode::kAll);

struct TeSolution {
  std::vector<double> delivered;   // b_f
  std::vector<double> allocation;  // a_{f,t} by tunnel id
  std::vector<double> arc_load;    // normal-condition load per arc
  double objective = 0.0;
  double solve_time_s = 0.0;
  lp::SolutionKind solution_kind = lp::SolutionKind::kVertex;
  ModelKind model = ModelKind::kTe;
  CapacityMode capacity_mode = CapacityMode::kAll;
  std::string policy;
  int num_scenarios = 1;
};

// Per-arc load from allocations and tunnel incidence.
std::vector<double> arc_loads(const Topology& topo, const TunnelSet& ts, std::span<const double> allocation);

// Throws SolveError when `lp_sol` is not optimal. Loads are recomputed from
// the allocations, not read from the solver.
TeSolution extract_solution(const lp::LpSolution& lp_sol, const TeModel& model, const Topology& topo,
                            const TunnelSet& ts);

struct Violation {
  enum class Kind { kCapacity, kDelivery };
  int scenario = 0;
  Kind kind = Kind::kCapacity;
  int index = 0;       // arc id or demand id
  double slack = 0.0;  // negative: amount of violation
};

struct VerificationReport {
  std::vector<Violation> violations;
  int scenarios_checked = 0;

  bool congestion_free() const { return violations.empty(); }
};

inline constexpr double kVerifyTolerance = 1e-6;

// For every scenario: surviving-tunnel load on every alive arc within
// c_e + 1e-6, and surviving allocation of every demand at least b_f - 1e-6.
VerificationReport verify_congestion_free(const TeSolution& sol, const Topology& topo, const TunnelSet& ts,
                                          const ScenarioSet& scen);

// Solution dump: {model, policy, scale, capacity_mode, objective, status,
// solution_kind, solve_time_s, b, a: [{demand, tunnel, value}], loads,
// demands, tunnels}. The embedded demands and tunnels make it self-contained
// for later verification. `capacity_factor` records any calibration applied
// to the topology the solution was computed on.
std::string serialize_solution(const TeSolution& sol, const Topology& topo, const TrafficMatrix& tm,
                               const TunnelSet& ts, double scale, double capacity_factor = 1.0);

struct LoadedSolution {
  TrafficMatrix tm;
  TunnelSet tunnels;
  TeSolution solution;
  double scale = 1.0;
  double capacity_factor = 1.0;
};

// `topo` is the uncalibrated topology; callers scale it by capacity_factor
// before verifying.
LoadedSolution parse_solution(std::string_view text, const Topology& topo);

}  // namespace wante
