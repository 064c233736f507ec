#pragma once

#include <span>
#include <string>
#include <vector>

#include "wante/demands.hpp"
#include "wante/te_models.hpp"
#include "wante/topology.hpp"
#include "wante/tunnels.hpp"

namespace wante {

// Threshold above which a b_f or a_{f,t} counts as carrying flow.
inline constexpr double kFlowEpsilon = 1e-9;

struct MetricsReport {
  double solver_time_s = 0.0;
  double mean_utility = 0.0;
  double overprovisioning_ratio = 0.0;
  double unmet_flow_ratio = 0.0;
  double unmet_demands_ratio = 0.0;
  double used_tunnel_ratio = 0.0;
  std::vector<double> link_utilizations;
  std::vector<double> criticality_scores;
  double critical_link_fraction = 0.0;
  double network_criticality = 0.0;
};

// U_e = load_e / c_e from the normal-condition loads.
std::vector<double> link_utilization(const TeSolution& sol, const Topology& topo);

// Per undirected link, the larger utilization of its two arcs.
std::vector<double> link_utilization_per_link(std::span<const double> util, const Topology& topo);

MetricsReport compute_metrics(const TeSolution& sol, const TrafficMatrix& tm, const TunnelSet& ts,
                              const Topology& topo);

// For each demand with b_f > eps, the most utilized arc among its
// flow-carrying tunnels (ties to the smallest arc id) accrues b_f / |F|.
std::vector<double> criticality_scores(const TeSolution& sol, const TunnelSet& ts, std::span<const double> util);

// Sum of S_e / U_e over arcs with positive score.
double network_criticality(std::span<const double> scores, std::span<const double> util);

double critical_link_fraction(std::span<const double> scores, const Topology& topo);

// Arc counts per [k*w, (k+1)*w) bin; the last bin ends at 1.0 inclusive and
// also absorbs values above 1 (within solver tolerance). Throws
// ValidationError unless 0 < width <= 1.
std::vector<int> utilization_histogram(std::span<const double> util, double width);

// Scalar fields only, in the fixed column order of metrics_csv_header().
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsReport& m);
// Flat object including the per-arc vectors.
std::string metrics_json(const MetricsReport& m);

}  // namespace wante
