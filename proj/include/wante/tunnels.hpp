#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wante/demands.hpp"
#include "wante/topology.hpp"

namespace wante {

// A simple path as both its arc and node sequences. `cost` is the sum of arc
// weights accumulated in path order.
struct Path {
  std::vector<int> arcs;
  std::vector<int> nodes;
  double cost = 0.0;

  bool operator==(const Path&) const = default;
};

// Total order used for tunnel enumeration: cost (with a relative tolerance of
// 1e-9), then node-index sequence, then arc-id sequence.
bool path_less(const Path& a, const Path& b);

// Sum of arc weights in order.
double path_cost(const Topology& topo, std::span<const int> arcs);

// Up to k loopless s->t paths in path_less order (Yen's algorithm with
// lexicographically smallest spur paths). Empty when t is unreachable.
std::vector<Path> k_shortest_paths(const Topology& topo, int s, int t, int k);

// T(d_f): fixed k per demand, or an adaptive step function over demand-volume
// rank groups.
class TunnelPolicy {
 public:
  static TunnelPolicy fixed(int k);
  // Positive-volume demands sorted ascending by volume are split into
  // group_counts.size() near-equal contiguous groups; group g gets
  // group_counts[g] tunnels. Counts must be >= 2 and nondecreasing.
  static TunnelPolicy adaptive(std::vector<int> group_counts = {3, 4, 5});
  // "fixed:K", "adaptive", or "adaptive:C1,C2,...".
  static TunnelPolicy parse(std::string_view text);

  bool is_adaptive() const { return adaptive_; }
  std::span<const int> group_counts() const { return counts_; }
  int max_count() const { return counts_.back(); }
  std::string name() const;

  bool operator==(const TunnelPolicy&) const = default;

 private:
  bool adaptive_ = false;
  std::vector<int> counts_{5};
};

// Requested tunnel count per demand id under `policy`.
std::vector<int> assign_tunnel_counts(const TrafficMatrix& tm, const TunnelPolicy& policy);

struct Tunnel {
  int id = 0;
  int demand_id = 0;
  std::vector<int> arcs;
  std::vector<int> nodes;
  double cost = 0.0;
};

// Per-demand ordered tunnel lists T_f. Tunnel ids are dense, grouped by
// demand in demand-id order.
class TunnelSet {
 public:
  TunnelSet() = default;
  TunnelSet(TunnelPolicy policy, const std::vector<std::vector<Path>>& per_demand, int num_arcs);

  std::span<const Tunnel> tunnels() const { return tunnels_; }
  const Tunnel& tunnel(int id) const { return tunnels_.at(id); }
  std::span<const int> of_demand(int demand_id) const {
    return by_demand_.at(demand_id);
  }
  // Tunnel ids whose path uses `arc`, ascending.
  std::span<const int> on_arc(int arc) const { return by_arc_.at(arc); }

  int num_demands() const { return static_cast<int>(by_demand_.size()); }
  int total_tunnels() const { return static_cast<int>(tunnels_.size()); }
  const TunnelPolicy& policy() const { return policy_; }
  // Demands with an empty T_f.
  std::vector<int> unroutable_demands() const;

 private:
  TunnelPolicy policy_;
  std::vector<Tunnel> tunnels_;
  std::vector<std::vector<int>> by_demand_;
  std::vector<std::vector<int>> by_arc_;
};

// Computes max-count KSP per demand and keeps the first assigned-count paths.
TunnelSet build_tunnel_sets(const Topology& topo, const TrafficMatrix& tm, const TunnelPolicy& policy);

struct Scenario {
  int id = 0;
  int failed_link = -1;  // -1 for the normal condition
  std::vector<int> dead_arcs;
};

// Scenario 0 is the normal condition.
class ScenarioSet {
 public:
  ScenarioSet() = default;
  ScenarioSet(std::vector<Scenario> scenarios, int num_arcs);

  int size() const { return static_cast<int>(scenarios_.size()); }
  const Scenario& scenario(int q) const { return scenarios_.at(q); }
  bool arc_dead(int q, int arc) const {
    return dead_[q][arc] != 0;
  }

 private:
  std::vector<Scenario> scenarios_;
  std::vector<std::vector<char>> dead_;
};

// Normal condition plus one scenario per undirected link (both arcs dead).
ScenarioSet enumerate_single_link_scenarios(const Topology& topo);

bool tunnel_alive(const Tunnel& tunnel, const ScenarioSet& scen, int q);

// T_f^q for every demand: the tunnels of T_f with no dead arc in scenario q.
std::vector<std::vector<int>> available_tunnels(const TunnelSet& ts, const ScenarioSet& scen, int q);

// Audit dump: [{"demand": [src, dst], "tunnels": [[node ids...]]}].
std::string dump_tunnels(const TunnelSet& ts, const TrafficMatrix& tm, const Topology& topo);

// Rebuilds a TunnelSet from dump_tunnels output. Entries must follow the
// demand order of `tm`.
TunnelSet parse_tunnels(std::string_view text, const Topology& topo, const TrafficMatrix& tm,
                        TunnelPolicy policy);

}  // namespace wante
