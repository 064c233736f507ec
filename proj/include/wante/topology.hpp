#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wante {

struct Node {
  std::string id;
  int index = 0;

  bool operator==(const Node&) const = default;
};

// One direction of a physical link. Arcs 2p and 2p+1 are the two directions
// of undirected link p.
struct Arc {
  int id = 0;
  int src = 0;
  int dst = 0;
  double capacity = 0.0;
  double weight = 1.0;
  int pair_id = 0;

  bool operator==(const Arc&) const = default;
};

// A bidirectional link as declared in the topology document.
struct LinkSpec {
  std::string src;
  std::string dst;
  double capacity = 0.0;
  double weight = 1.0;
};

// Directed-arc network graph. Immutable once built.
class Topology {
 public:
  Topology() = default;

  // Validates and materializes two arcs per link. Throws ValidationError on
  // duplicate node ids, unknown endpoints, self loops, nonpositive capacity
  // or negative weight.
  static Topology from_links(std::string name, std::vector<std::string> node_ids,
                             const std::vector<LinkSpec>& links);

  const std::string& name() const { return name_; }
  std::span<const Node> nodes() const { return nodes_; }
  std::span<const Arc> arcs() const { return arcs_; }
  const Arc& arc(int id) const { return arcs_.at(id); }
  const Node& node(int index) const { return nodes_.at(index); }

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_arcs() const { return static_cast<int>(arcs_.size()); }
  int num_links() const { return static_cast<int>(arcs_.size() / 2); }

  // Outgoing arc ids of a node, ascending.
  std::span<const int> out_arcs(int node) const { return out_arcs_.at(node); }

  // The two arcs of undirected link `pair_id` (forward first).
  std::pair<int, int> link_arcs(int pair_id) const { return {2 * pair_id, 2 * pair_id + 1}; }
  int reverse_arc(int arc_id) const { return arc_id ^ 1; }

  std::optional<int> find_node(std::string_view id) const;
  // Like find_node, throws ValidationError if absent.
  int node_index(std::string_view id) const;

  // Lowest-id arc from `src` to `dst`, if any.
  std::optional<int> find_arc(int src, int dst) const;

  bool operator==(const Topology& other) const {
    return name_ == other.name_ && nodes_ == other.nodes_ && arcs_ == other.arcs_;
  }

 private:
  friend Topology scale_capacities(const Topology& topo, double factor);

  void index();

  std::string name_;
  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<int>> out_arcs_;
  std::unordered_map<std::string, int> node_by_id_;
};

// Parses the JSON topology document:
//   {"name": str, "nodes": [{"id": str}],
//    "links": [{"src": str, "dst": str, "capacity": num, "weight": num?}]}
// Throws ParseError for malformed documents, ValidationError for bad content.
Topology parse_topology(std::string_view text);
Topology load_topology(const std::filesystem::path& path);

// Inverse of parse_topology.
std::string serialize_topology(const Topology& topo);

// Multiplies every arc capacity by `factor` (> 0).
Topology scale_capacities(const Topology& topo, double factor);

// Reads a whole file; throws FileError naming the path if missing.
std::string read_file(const std::filesystem::path& path);

}  // namespace wante
