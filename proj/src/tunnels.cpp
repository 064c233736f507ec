#include "wante/tunnels.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <queue>
#include <set>

#include <json.hpp>

#include "wante/errors.hpp"

namespace wante {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool cost_equal(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

// Per-call view of the graph with arcs/nodes removable during spur searches.
class SpurSearch {
 public:
  SpurSearch(const Topology& topo, int target) : topo_(topo), target_(target) {
    const auto n = static_cast<size_t>(topo.num_nodes());
    in_arcs_.resize(n);
    sorted_out_.resize(n);
    for (const Arc& a : topo.arcs()) in_arcs_[a.dst].push_back(a.id);
    for (size_t u = 0; u < n; ++u) {
      auto out = topo.out_arcs(static_cast<int>(u));
      sorted_out_[u].assign(out.begin(), out.end());
      std::sort(sorted_out_[u].begin(), sorted_out_[u].end(), [&](int x, int y) {
        const Arc& ax = topo.arc(x);
        const Arc& ay = topo.arc(y);
        return ax.dst != ay.dst ? ax.dst < ay.dst : x < y;
      });
    }
    arc_blocked_.assign(static_cast<size_t>(topo.num_arcs()), 0);
    node_blocked_.assign(n, 0);
  }

  void block_arc(int a) { arc_blocked_[a] = 1; }
  void block_node(int v) { node_blocked_[v] = 1; }
  void reset() {
    std::fill(arc_blocked_.begin(), arc_blocked_.end(), 0);
    std::fill(node_blocked_.begin(), node_blocked_.end(), 0);
  }

  // Lexicographically smallest min-cost path from `source` to the target over
  // unblocked arcs and nodes. Returns false if unreachable.
  bool shortest(int source, std::vector<int>* arcs) {
    distances_to_target();
    if (dist_[source] == kInf) return false;
    visited_.assign(static_cast<size_t>(topo_.num_nodes()), 0);
    arcs->clear();
    return tight_walk(source, arcs);
  }

 private:
  bool usable(const Arc& a) const {
    return !arc_blocked_[a.id] && !node_blocked_[a.src] &&
           !node_blocked_[a.dst];
  }

  void distances_to_target() {
    dist_.assign(static_cast<size_t>(topo_.num_nodes()), kInf);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    if (node_blocked_[target_]) return;
    dist_[target_] = 0.0;
    heap.emplace(0.0, target_);
    while (!heap.empty()) {
      auto [d, v] = heap.top();
      heap.pop();
      if (d > dist_[v]) continue;
      for (int a : in_arcs_[v]) {
        const Arc& arc = topo_.arc(a);
        if (!usable(arc)) continue;
        const double nd = d + arc.weight;
        if (nd < dist_[arc.src]) {
          dist_[arc.src] = nd;
          heap.emplace(nd, arc.src);
        }
      }
    }
  }

  // Depth-first over tight arcs in (next node, arc id) order. With positive
  // weights the first branch always succeeds; zero-weight arcs may need
  // backtracking.
  bool tight_walk(int u, std::vector<int>* arcs) {
    if (u == target_) return true;
    visited_[u] = 1;
    for (int a : sorted_out_[u]) {
      const Arc& arc = topo_.arc(a);
      if (!usable(arc) || visited_[arc.dst]) continue;
      const double dv = dist_[arc.dst];
      if (dv == kInf || !cost_equal(dist_[u], arc.weight + dv)) continue;
      arcs->push_back(a);
      if (tight_walk(arc.dst, arcs)) return true;
      arcs->pop_back();
    }
    visited_[u] = 0;
    return false;
  }

  const Topology& topo_;
  int target_;
  std::vector<std::vector<int>> in_arcs_;
  std::vector<std::vector<int>> sorted_out_;
  std::vector<char> arc_blocked_;
  std::vector<char> node_blocked_;
  std::vector<char> visited_;
  std::vector<double> dist_;
};

Path make_path(const Topology& topo, int s, std::vector<int> arcs) {
  Path p;
  p.nodes.push_back(s);
  for (int a : arcs) p.nodes.push_back(topo.arc(a).dst);
  p.cost = path_cost(topo, arcs);
  p.arcs = std::move(arcs);
  return p;
}

}  // namespace

bool path_less(const Path& a, const Path& b) {
  if (!cost_equal(a.cost, b.cost)) return a.cost < b.cost;
  if (a.nodes != b.nodes) return a.nodes < b.nodes;
  return a.arcs < b.arcs;
}

double path_cost(const Topology& topo, std::span<const int> arcs) {
  double cost = 0.0;
  for (int a : arcs) cost += topo.arc(a).weight;
  return cost;
}

std::vector<Path> k_shortest_paths(const Topology& topo, int s, int t, int k) {
  std::vector<Path> accepted;
  if (s == t || k < 1) return accepted;
  SpurSearch search(topo, t);
  std::vector<int> arcs;
  if (!search.shortest(s, &arcs)) return accepted;
  accepted.push_back(make_path(topo, s, arcs));

  std::set<Path, decltype(&path_less)> candidates(&path_less);
  while (static_cast<int>(accepted.size()) < k) {
    const Path prev = accepted.back();
    for (size_t i = 0; i + 1 < prev.nodes.size(); ++i) {
      search.reset();
      const int spur = prev.nodes[i];
      for (const Path& p : accepted) {
        if (p.arcs.size() > i && std::equal(prev.arcs.begin(), prev.arcs.begin() + static_cast<long>(i),
                                            p.arcs.begin())) {
          search.block_arc(p.arcs[i]);
        }
      }
      for (size_t j = 0; j < i; ++j) search.block_node(prev.nodes[j]);
      if (!search.shortest(spur, &arcs)) continue;
      std::vector<int> full(prev.arcs.begin(), prev.arcs.begin() + static_cast<long>(i));
      full.insert(full.end(), arcs.begin(), arcs.end());
      candidates.insert(make_path(topo, s, std::move(full)));
    }
    if (candidates.empty()) break;
    accepted.push_back(*candidates.begin());
    candidates.erase(candidates.begin());
  }
  return accepted;
}

TunnelPolicy TunnelPolicy::fixed(int k) {
  if (k < 1) throw ValidationError("fixed tunnel count must be >= 1");
  TunnelPolicy p;
  p.adaptive_ = false;
  p.counts_ = {k};
  return p;
}

TunnelPolicy TunnelPolicy::adaptive(std::vector<int> group_counts) {
  if (group_counts.empty()) throw ValidationError("adaptive policy needs at least one group");
  for (size_t g = 0; g < group_counts.size(); ++g) {
    if (group_counts[g] < 2) throw ValidationError("adaptive tunnel counts must be >= 2");
    if (g > 0 && group_counts[g] < group_counts[g - 1]) {
      throw ValidationError("adaptive tunnel counts must be nondecreasing");
    }
  }
  TunnelPolicy p;
  p.adaptive_ = true;
  p.counts_ = std::move(group_counts);
  return p;
}

namespace {

int parse_int(std::string_view text, std::string_view what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ValidationError("bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

TunnelPolicy TunnelPolicy::parse(std::string_view text) {
  if (text.starts_with("fixed:")) return fixed(parse_int(text.substr(6), "tunnel count"));
  if (text == "adaptive") return adaptive();
  if (text.starts_with("adaptive:")) {
    std::vector<int> counts;
    std::string_view rest = text.substr(9);
    while (!rest.empty()) {
      auto comma = rest.find(',');
      counts.push_back(parse_int(rest.substr(0, comma), "tunnel count"));
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    return adaptive(std::move(counts));
  }
  throw ValidationError("unknown tunnel policy '" + std::string(text) +
                        "' (expected fixed:K, adaptive or adaptive:C1,C2,...)");
}

std::string TunnelPolicy::name() const {
  if (!adaptive_) return "fixed:" + std::to_string(counts_.front());
  if (counts_ == std::vector<int>{3, 4, 5}) return "adaptive";
  std::string out = "adaptive:";
  for (size_t g = 0; g < counts_.size(); ++g) {
    if (g) out += ',';
    out += std::to_string(counts_[g]);
  }
  return out;
}

std::vector<int> assign_tunnel_counts(const TrafficMatrix& tm, const TunnelPolicy& policy) {
  const auto counts = policy.group_counts();
  std::vector<int> assigned(static_cast<size_t>(tm.size()), counts.front());
  if (!policy.is_adaptive()) return assigned;

  std::vector<int> ranked;
  for (const Demand& d : tm.demands()) {
    if (d.volume > 0.0) ranked.push_back(d.id);
  }
  std::sort(ranked.begin(), ranked.end(), [&](int x, int y) {
    const Demand& a = tm.demand(x);
    const Demand& b = tm.demand(y);
    if (a.volume != b.volume) return a.volume < b.volume;
    if (a.src != b.src) return a.src < b.src;
    return a.dst < b.dst;
  });

  const size_t groups = counts.size();
  const size_t base = ranked.size() / groups;
  const size_t extra = ranked.size() % groups;
  size_t next = 0;
  for (size_t g = 0; g < groups; ++g) {
    const size_t size = base + (g < extra ? 1 : 0);
    for (size_t i = 0; i < size; ++i) assigned[ranked[next++]] = counts[g];
  }
  return assigned;
}

TunnelSet::TunnelSet(TunnelPolicy policy, const std::vector<std::vector<Path>>& per_demand, int num_arcs)
    : policy_(std::move(policy)) {
  by_demand_.resize(per_demand.size());
  by_arc_.resize(num_arcs);
  for (size_t f = 0; f < per_demand.size(); ++f) {
    for (const Path& p : per_demand[f]) {
      if (p.arcs.empty()) throw ValidationError("tunnel must contain at least one arc");
      Tunnel t;
      t.id = static_cast<int>(tunnels_.size());
      t.demand_id = static_cast<int>(f);
      t.arcs = p.arcs;
      t.nodes = p.nodes;
      t.cost = p.cost;
      by_demand_[f].push_back(t.id);
      for (int a : t.arcs) by_arc_.at(a).push_back(t.id);
      tunnels_.push_back(std::move(t));
    }
  }
}

std::vector<int> TunnelSet::unroutable_demands() const {
  std::vector<int> out;
  for (size_t f = 0; f < by_demand_.size(); ++f) {
    if (by_demand_[f].empty()) out.push_back(static_cast<int>(f));
  }
  return out;
}

TunnelSet build_tunnel_sets(const Topology& topo, const TrafficMatrix& tm, const TunnelPolicy& policy) {
  const std::vector<int> counts = assign_tunnel_counts(tm, policy);
  std::vector<std::vector<Path>> per_demand(static_cast<size_t>(tm.size()));
  for (const Demand& d : tm.demands()) {
    auto paths = k_shortest_paths(topo, d.src, d.dst, policy.max_count());
    const auto keep = std::min(paths.size(), static_cast<size_t>(counts[d.id]));
    paths.resize(keep);
    per_demand[d.id] = std::move(paths);
  }
  return TunnelSet(policy, per_demand, topo.num_arcs());
}

ScenarioSet::ScenarioSet(std::vector<Scenario> scenarios, int num_arcs) : scenarios_(std::move(scenarios)) {
  dead_.assign(scenarios_.size(), std::vector<char>(num_arcs, 0));
  for (size_t q = 0; q < scenarios_.size(); ++q) {
    scenarios_[q].id = static_cast<int>(q);
    for (int a : scenarios_[q].dead_arcs) dead_[q].at(a) = 1;
  }
}

ScenarioSet enumerate_single_link_scenarios(const Topology& topo) {
  std::vector<Scenario> scenarios;
  scenarios.push_back(Scenario{0, -1, {}});
  for (int p = 0; p < topo.num_links(); ++p) {
    auto [fwd, rev] = topo.link_arcs(p);
    scenarios.push_back(Scenario{p + 1, p, {fwd, rev}});
  }
  return ScenarioSet(std::move(scenarios), topo.num_arcs());
}

bool tunnel_alive(const Tunnel& tunnel, const ScenarioSet& scen, int q) {
  return std::none_of(tunnel.arcs.begin(), tunnel.arcs.end(), [&](int a) { return scen.arc_dead(q, a); });
}

std::vector<std::vector<int>> available_tunnels(const TunnelSet& ts, const ScenarioSet& scen, int q) {
  if (q < 0 || q >= scen.size()) throw ValidationError("scenario id out of range");
  std::vector<std::vector<int>> out(static_cast<size_t>(ts.num_demands()));
  for (int f = 0; f < ts.num_demands(); ++f) {
    for (int t : ts.of_demand(f)) {
      if (tunnel_alive(ts.tunnel(t), scen, q)) out[f].push_back(t);
    }
  }
  return out;
}

std::string dump_tunnels(const TunnelSet& ts, const TrafficMatrix& tm, const Topology& topo) {
  json doc = json::array();
  for (const Demand& d : tm.demands()) {
    json paths = json::array();
    for (int t : ts.of_demand(d.id)) {
      json nodes = json::array();
      for (int v : ts.tunnel(t).nodes) nodes.push_back(topo.node(v).id);
      paths.push_back(std::move(nodes));
    }
    doc.push_back({{"demand", {topo.node(d.src).id, topo.node(d.dst).id}}, {"tunnels", std::move(paths)}});
  }
  return doc.dump();
}

TunnelSet parse_tunnels(std::string_view text, const Topology& topo, const TrafficMatrix& tm,
                        TunnelPolicy policy) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("tunnels: ") + e.what());
  }
  if (!doc.is_array() || static_cast<int>(doc.size()) != tm.size()) {
    throw ParseError("tunnels: expected one entry per demand");
  }
  std::vector<std::vector<Path>> per_demand(doc.size());
  try {
    for (size_t f = 0; f < doc.size(); ++f) {
      const Demand& d = tm.demand(static_cast<int>(f));
      const json& entry = doc[f];
      const auto ends = entry.at("demand").get<std::vector<std::string>>();
      if (ends.size() != 2 || topo.node_index(ends[0]) != d.src || topo.node_index(ends[1]) != d.dst) {
        throw ValidationError("tunnels: entry " + std::to_string(f) + " does not match demand order");
      }
      for (const json& nodes_json : entry.at("tunnels")) {
        const auto ids = nodes_json.get<std::vector<std::string>>();
        std::vector<int> arcs;
        for (size_t i = 0; i + 1 < ids.size(); ++i) {
          auto arc = topo.find_arc(topo.node_index(ids[i]), topo.node_index(ids[i + 1]));
          if (!arc) throw ValidationError("tunnels: no arc " + ids[i] + "->" + ids[i + 1]);
          arcs.push_back(*arc);
        }
        if (arcs.empty() || topo.node_index(ids.front()) != d.src || topo.node_index(ids.back()) != d.dst) {
          throw ValidationError("tunnels: path endpoints do not match demand " + std::to_string(f));
        }
        per_demand[f].push_back(make_path(topo, d.src, std::move(arcs)));
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("tunnels: ") + e.what());
  }
  return TunnelSet(std::move(policy), per_demand, topo.num_arcs());
}

}  // namespace wante
