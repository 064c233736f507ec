#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wante/demands.hpp"
#include "wante/lp.hpp"
#include "wante/metrics.hpp"
#include "wante/te_models.hpp"
#include "wante/topology.hpp"
#include "wante/tunnels.hpp"

namespace wante {

inline constexpr std::string_view kVersion = "0.1.0";

struct ExperimentConfig {
  std::filesystem::path topology;
  // Either a TM file or a lognormal fit to sample from with `seed`.
  std::optional<std::filesystem::path> tm;
  std::optional<LognormalFit> fit;
  std::uint64_t seed = 1;
  std::vector<double> scales{0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
  std::vector<ModelKind> models{ModelKind::kTe, ModelKind::kFfc};
  std::vector<TunnelPolicy> policies{TunnelPolicy::fixed(5), TunnelPolicy::adaptive()};
  std::string backend = "simplex";
  CapacityMode capacity_mode = CapacityMode::kAll;
  // Scale capacities so that TE meets the unscaled TM under every policy.
  bool calibrate = false;
  std::filesystem::path output_dir = "results";
  int workers = 1;
  bool write_solutions = true;

  // Throws ValidationError on empty models/policies, nonpositive scales,
  // missing TM source or a bad worker count.
  void validate() const;
};

// JSON keys: topology, tm | fit {mu, sigma}, seed, scales, models,
// tunnel_policies, backend, capacity_mode, calibrate, output_dir, workers,
// write_solutions. Relative paths resolve against `base_dir`.
ExperimentConfig parse_experiment_config(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
// Canonical JSON form (paths as given after resolution).
std::string serialize_experiment_config(const ExperimentConfig& cfg);

// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view text);

struct CalibrationResult {
  double factor = 1.0;
  std::vector<int> unroutable_demands;
  int solves = 0;
};

// Smallest uniform capacity factor (relative precision 1e-3) at which the TE
// model delivers every routable demand in full. Demands without tunnels are
// reported and excluded.
CalibrationResult calibrate_capacities(const Topology& topo, const TrafficMatrix& tm, const TunnelSet& ts,
                                       const lp::LpBackend& backend);

// One build/solve/extract/verify/metrics pass.
struct PointResult {
  lp::SolveStatus status = lp::SolveStatus::kNumericalFailure;
  std::string error;
  int num_variables = 0;
  int num_constraints = 0;
  double build_time_s = 0.0;
  std::optional<TeSolution> solution;
  std::optional<MetricsReport> metrics;
  std::optional<VerificationReport> verification;

  bool ok() const { return solution.has_value(); }
};

PointResult run_point(const Topology& topo, const TrafficMatrix& tm, const TunnelSet& ts, const ScenarioSet& scen,
                      ModelKind model, CapacityMode mode, const lp::LpBackend& backend);

struct ResultRow {
  ModelKind model = ModelKind::kTe;
  std::string policy;
  double scale = 1.0;
  std::uint64_t seed = 0;
  std::string backend;
  CapacityMode capacity_mode = CapacityMode::kAll;
  std::string status;  // LP status, or "error"
  std::string error;
  double objective = 0.0;
  int num_variables = 0;
  int num_constraints = 0;
  int total_tunnels = 0;
  double solver_time_s = 0.0;
  double build_time_s = 0.0;
  std::optional<MetricsReport> metrics;
  // "pass" / "fail" for FFC rows, "n/a" for TE rows and failed solves.
  std::string congestion_free = "n/a";
  int violations = 0;
};

// Fixed column order; failed rows leave the metric columns empty.
std::string results_csv_header();
std::string results_csv_row(const ResultRow& row);

struct ExperimentResult {
  std::vector<ResultRow> rows;
  double capacity_factor = 1.0;
  std::vector<int> unroutable_demands;
  std::string config_hash;
};

// Runs every (model, policy, scale) point and writes results.csv,
// results.json, manifest.json and solutions/ under cfg.output_dir. A failed
// point becomes a row with its status; the sweep continues.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Writes via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace wante
