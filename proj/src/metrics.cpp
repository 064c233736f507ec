#include "wante/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "wante/errors.hpp"
#include "wante/format.hpp"

namespace wante {

std::vector<double> link_utilization(const TeSolution& sol, const Topology& topo) {
  std::vector<double> util(topo.num_arcs(), 0.0);
  for (const Arc& arc : topo.arcs()) util[arc.id] = sol.arc_load.at(arc.id) / arc.capacity;
  return util;
}

std::vector<double> link_utilization_per_link(std::span<const double> util, const Topology& topo) {
  std::vector<double> out(topo.num_links(), 0.0);
  for (int p = 0; p < topo.num_links(); ++p) {
    const auto [fwd, rev] = topo.link_arcs(p);
    out[p] = std::max(util[fwd], util[rev]);
  }
  return out;
}

std::vector<double> criticality_scores(const TeSolution& sol, const TunnelSet& ts, std::span<const double> util) {
  std::vector<double> scores(util.size(), 0.0);
  const int num_demands = ts.num_demands();
  for (int f = 0; f < num_demands; ++f) {
    if (sol.delivered[f] <= kFlowEpsilon) continue;
    int best = -1;
    for (int t : ts.of_demand(f)) {
      if (sol.allocation[t] <= kFlowEpsilon) continue;
      for (int e : ts.tunnel(t).arcs) {
        if (best < 0 || util[e] > util[best] || (util[e] == util[best] && e < best)) best = e;
      }
    }
    if (best >= 0) scores[best] += sol.delivered[f] / num_demands;
  }
  return scores;
}

double network_criticality(std::span<const double> scores, std::span<const double> util) {
  double r = 0.0;
  for (size_t e = 0; e < scores.size(); ++e) {
    if (scores[e] > 0.0) r += scores[e] / util[e];
  }
  return r;
}

double critical_link_fraction(std::span<const double> scores, const Topology& topo) {
  if (topo.num_arcs() == 0) return 0.0;
  const auto critical = std::count_if(scores.begin(), scores.end(), [](double s) { return s > 0.0; });
  return static_cast<double>(critical) / topo.num_arcs();
}

std::vector<int> utilization_histogram(std::span<const double> util, double width) {
  if (!(width > 0.0 && width <= 1.0)) throw ValidationError("histogram bin width must be in (0, 1]");
  const int bins = static_cast<int>(std::ceil(1.0 / width - 1e-12));
  std::vector<int> counts(bins, 0);
  for (double u : util) {
    int k = static_cast<int>(std::floor(std::max(0.0, u) / width));
    counts[std::min(k, bins - 1)] += 1;
  }
  return counts;
}

MetricsReport compute_metrics(const TeSolution& sol, const TrafficMatrix& tm, const TunnelSet& ts,
                              const Topology& topo) {
  MetricsReport m;
  m.solver_time_s = sol.solve_time_s;
  m.link_utilizations = link_utilization(sol, topo);
  if (!m.link_utilizations.empty()) {
    m.mean_utility = std::accumulate(m.link_utilizations.begin(), m.link_utilizations.end(), 0.0) /
                     m.link_utilizations.size();
  }

  const double total_demand = tm.total_volume();
  const double total_delivered = std::accumulate(sol.delivered.begin(), sol.delivered.end(), 0.0);
  const double total_allocated = std::accumulate(sol.allocation.begin(), sol.allocation.end(), 0.0);
  if (total_demand > 0.0) {
    m.overprovisioning_ratio = std::max(0.0, total_allocated - total_delivered) / total_demand;
    m.unmet_flow_ratio = std::max(0.0, total_demand - total_delivered) / total_demand;
  }
  if (!tm.empty()) {
    int unmet = 0;
    for (const Demand& d : tm.demands()) {
      if (sol.delivered[d.id] < d.volume - 1e-9 * std::max(1.0, d.volume)) ++unmet;
    }
    m.unmet_demands_ratio = static_cast<double>(unmet) / tm.size();
  }
  if (ts.total_tunnels() > 0) {
    const auto used = std::count_if(sol.allocation.begin(), sol.allocation.end(),
                                    [](double a) { return a > kFlowEpsilon; });
    m.used_tunnel_ratio = static_cast<double>(used) / ts.total_tunnels();
  }

  m.criticality_scores = criticality_scores(sol, ts, m.link_utilizations);
  m.critical_link_fraction = critical_link_fraction(m.criticality_scores, topo);
  m.network_criticality = network_criticality(m.criticality_scores, m.link_utilizations);
  return m;
}

std::string metrics_csv_header() {
  return "solver_time_s,mean_utility,overprovisioning_ratio,unmet_flow_ratio,unmet_demands_ratio,"
         "used_tunnel_ratio,critical_link_fraction,network_criticality";
}

std::string metrics_csv_row(const MetricsReport& m) {
  std::string row;
  for (double v : {m.solver_time_s, m.mean_utility, m.overprovisioning_ratio, m.unmet_flow_ratio,
                   m.unmet_demands_ratio, m.used_tunnel_ratio, m.critical_link_fraction, m.network_criticality}) {
    if (!row.empty()) row += ',';
    row += format_double(v);
  }
  return row;
}

std::string metrics_json(const MetricsReport& m) {
  nlohmann::json doc;
  doc["solver_time_s"] = m.solver_time_s;
  doc["mean_utility"] = m.mean_utility;
  doc["overprovisioning_ratio"] = m.overprovisioning_ratio;
  doc["unmet_flow_ratio"] = m.unmet_flow_ratio;
  doc["unmet_demands_ratio"] = m.unmet_demands_ratio;
  doc["used_tunnel_ratio"] = m.used_tunnel_ratio;
  doc["critical_link_fraction"] = m.critical_link_fraction;
  doc["network_criticality"] = m.network_criticality;
  doc["link_utilizations"] = m.link_utilizations;
  doc["criticality_scores"] = m.criticality_scores;
  return doc.dump(1);
}

}  // namespace wante
