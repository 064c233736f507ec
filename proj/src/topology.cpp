#include "wante/topology.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wante/errors.hpp"

namespace wante {

using nlohmann::json;

Topology Topology::from_links(std::string name, std::vector<std::string> node_ids,
                              const std::vector<LinkSpec>& links) {
  Topology topo;
  topo.name_ = std::move(name);
  for (auto& id : node_ids) {
    const int index = static_cast<int>(topo.nodes_.size());
    if (!topo.node_by_id_.emplace(id, index).second) {
      throw ValidationError("duplicate node id '" + id + "'");
    }
    topo.nodes_.push_back(Node{std::move(id), index});
  }

  for (size_t i = 0; i < links.size(); ++i) {
    const LinkSpec& link = links[i];
    const std::string where = "link " + std::to_string(i) + " (" + link.src + "-" + link.dst + ")";
    auto src = topo.find_node(link.src);
    auto dst = topo.find_node(link.dst);
    if (!src) throw ValidationError(where + ": unknown endpoint '" + link.src + "'");
    if (!dst) throw ValidationError(where + ": unknown endpoint '" + link.dst + "'");
    if (*src == *dst) throw ValidationError(where + ": self loop");
    if (!std::isfinite(link.capacity) || link.capacity <= 0.0) {
      throw ValidationError(where + ": capacity must be positive");
    }
    if (!std::isfinite(link.weight) || link.weight < 0.0) {
      throw ValidationError(where + ": weight must be nonnegative");
    }
    const int pair = static_cast<int>(i);
    topo.arcs_.push_back(Arc{2 * pair, *src, *dst, link.capacity, link.weight, pair});
    topo.arcs_.push_back(Arc{2 * pair + 1, *dst, *src, link.capacity, link.weight, pair});
  }
  topo.index();
  return topo;
}

void Topology::index() {
  out_arcs_.assign(nodes_.size(), {});
  for (const Arc& a : arcs_) out_arcs_[a.src].push_back(a.id);
}

std::optional<int> Topology::find_node(std::string_view id) const {
  auto it = node_by_id_.find(std::string(id));
  if (it == node_by_id_.end()) return std::nullopt;
  return it->second;
}

int Topology::node_index(std::string_view id) const {
  auto index = find_node(id);
  if (!index) throw ValidationError("unknown node id '" + std::string(id) + "'");
  return *index;
}

std::optional<int> Topology::find_arc(int src, int dst) const {
  for (int a : out_arcs(src)) {
    if (arcs_[a].dst == dst) return a;
  }
  return std::nullopt;
}

namespace {

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

Topology parse_topology(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("topology: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("topology: document must be an object");

  std::string name = doc.contains("name") ? field<std::string>(doc, "name", "topology") : "";
  const auto& nodes = doc.find("nodes");
  const auto& links = doc.find("links");
  if (nodes == doc.end() || !nodes->is_array()) throw ParseError("topology: 'nodes' must be an array");
  if (links == doc.end() || !links->is_array()) throw ParseError("topology: 'links' must be an array");

  std::vector<std::string> ids;
  for (size_t i = 0; i < nodes->size(); ++i) {
    const json& n = (*nodes)[i];
    const std::string where = "topology node " + std::to_string(i);
    if (!n.is_object()) throw ParseError(where + ": must be an object");
    ids.push_back(field<std::string>(n, "id", where));
  }

  std::vector<LinkSpec> specs;
  for (size_t i = 0; i < links->size(); ++i) {
    const json& l = (*links)[i];
    const std::string where = "topology link " + std::to_string(i);
    if (!l.is_object()) throw ParseError(where + ": must be an object");
    LinkSpec spec;
    spec.src = field<std::string>(l, "src", where);
    spec.dst = field<std::string>(l, "dst", where);
    spec.capacity = field<double>(l, "capacity", where);
    if (l.contains("weight") && !l["weight"].is_null()) spec.weight = field<double>(l, "weight", where);
    specs.push_back(std::move(spec));
  }
  return Topology::from_links(std::move(name), std::move(ids), specs);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Topology load_topology(const std::filesystem::path& path) { return parse_topology(read_file(path)); }

std::string serialize_topology(const Topology& topo) {
  json doc;
  doc["name"] = topo.name();
  doc["nodes"] = json::array();
  for (const Node& n : topo.nodes()) doc["nodes"].push_back({{"id", n.id}});
  doc["links"] = json::array();
  for (int p = 0; p < topo.num_links(); ++p) {
    const Arc& a = topo.arc(topo.link_arcs(p).first);
    doc["links"].push_back({{"src", topo.node(a.src).id},
                            {"dst", topo.node(a.dst).id},
                            {"capacity", a.capacity},
                            {"weight", a.weight}});
  }
  return doc.dump(2);
}

Topology scale_capacities(const Topology& topo, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw ValidationError("capacity scale factor must be positive");
  }
  Topology scaled = topo;
  for (Arc& a : scaled.arcs_) a.capacity *= factor;
  return scaled;
}

}  // namespace wante
