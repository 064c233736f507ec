#include "wante/demands.hpp"

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "wante/errors.hpp"

namespace wante {

using nlohmann::json;

TrafficMatrix::TrafficMatrix(std::vector<Demand> demands, int num_nodes) : demands_(std::move(demands)) {
  std::set<std::pair<int, int>> seen;
  for (size_t i = 0; i < demands_.size(); ++i) {
    Demand& d = demands_[i];
    d.id = static_cast<int>(i);
    const std::string where = "demand " + std::to_string(i);
    if (d.src < 0 || d.src >= num_nodes || d.dst < 0 || d.dst >= num_nodes) {
      throw ValidationError(where + ": node index out of range");
    }
    if (d.src == d.dst) throw ValidationError(where + ": src == dst");
    if (!std::isfinite(d.volume) || d.volume < 0.0) throw ValidationError(where + ": negative volume");
    if (!seen.emplace(d.src, d.dst).second) throw ValidationError(where + ": duplicate (src,dst) pair");
  }
}

double TrafficMatrix::total_volume() const {
  double total = 0.0;
  for (const Demand& d : demands_) total += d.volume;
  return total;
}

namespace {

TrafficMatrix parse_tm_json(std::string_view text, const Topology& topo) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("traffic matrix: ") + e.what());
  }
  auto it = doc.find("demands");
  if (!doc.is_object() || it == doc.end() || !it->is_array()) {
    throw ParseError("traffic matrix: 'demands' must be an array");
  }
  std::vector<Demand> demands;
  for (size_t i = 0; i < it->size(); ++i) {
    const json& row = (*it)[i];
    const std::string where = "traffic matrix row " + std::to_string(i);
    if (!row.is_object() || !row.contains("src") || !row.contains("dst") || !row.contains("volume")) {
      throw ParseError(where + ": expected {src, dst, volume}");
    }
    Demand d;
    try {
      d.src = topo.node_index(row["src"].get<std::string>());
      d.dst = topo.node_index(row["dst"].get<std::string>());
      d.volume = row["volume"].get<double>();
    } catch (const json::exception&) {
      throw ParseError(where + ": wrong field type");
    }
    demands.push_back(d);
  }
  return TrafficMatrix(std::move(demands), topo.num_nodes());
}

std::string trim(std::string s) {
  const char* ws = " \t\r\n";
  s.erase(0, s.find_first_not_of(ws));
  s.erase(s.find_last_not_of(ws) + 1);
  return s;
}

TrafficMatrix parse_tm_csv(std::string_view text, const Topology& topo) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<Demand> demands;
  bool header = true;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(trim(cell));
    if (header) {
      if (cells != std::vector<std::string>{"src", "dst", "volume"}) {
        throw ParseError("traffic matrix CSV: header must be 'src,dst,volume'");
      }
      header = false;
      continue;
    }
    const std::string where = "traffic matrix CSV line " + std::to_string(line_no);
    if (cells.size() != 3) throw ParseError(where + ": expected 3 columns");
    Demand d;
    d.src = topo.node_index(cells[0]);
    d.dst = topo.node_index(cells[1]);
    try {
      size_t used = 0;
      d.volume = std::stod(cells[2], &used);
      if (used != cells[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError(where + ": bad volume '" + cells[2] + "'");
    }
    demands.push_back(d);
  }
  if (header) throw ParseError("traffic matrix CSV: missing header");
  return TrafficMatrix(std::move(demands), topo.num_nodes());
}

}  // namespace

TrafficMatrix parse_tm(std::string_view text, const Topology& topo) {
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') return parse_tm_json(text, topo);
  return parse_tm_csv(text, topo);
}

TrafficMatrix load_tm(const std::filesystem::path& path, const Topology& topo) {
  return parse_tm(read_file(path), topo);
}

std::string serialize_tm(const TrafficMatrix& tm, const Topology& topo, const std::string& comment) {
  json doc;
  if (!comment.empty()) doc["comment"] = comment;
  doc["demands"] = json::array();
  for (const Demand& d : tm.demands()) {
    doc["demands"].push_back(
        {{"src", topo.node(d.src).id}, {"dst", topo.node(d.dst).id}, {"volume", d.volume}});
  }
  return doc.dump(1);
}

LognormalFit fit_lognormal(const TrafficMatrix& tm) {
  std::vector<double> logs;
  for (const Demand& d : tm.demands()) {
    if (d.volume > 0.0) logs.push_back(std::log(d.volume));
  }
  if (logs.size() < 2) throw ValidationError("lognormal fit needs at least two positive volumes");
  const double n = static_cast<double>(logs.size());
  double mean = 0.0;
  for (double v : logs) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : logs) var += (v - mean) * (v - mean);
  var /= n;
  const double sigma = std::sqrt(var);
  if (!(sigma > 1e-12 * std::max(1.0, std::abs(mean)))) {
    throw ValidationError("lognormal fit is degenerate (all volumes equal)");
  }
  return LognormalFit{mean, sigma, static_cast<int>(logs.size())};
}

TrafficMatrix generate_lognormal_tm(const Topology& topo, const LognormalFit& fit, std::uint64_t seed) {
  if (!(fit.sigma > 0.0)) throw ValidationError("lognormal sigma must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(fit.mu, fit.sigma);
  std::vector<Demand> demands;
  const int n = topo.num_nodes();
  demands.reserve(n * static_cast<size_t>(std::max(n - 1, 0)));
  for (int s = 0; s < n; ++s) {
    for (int t = 0; t < n; ++t) {
      if (s == t) continue;
      demands.push_back(Demand{0, s, t, std::exp(normal(rng))});
    }
  }
  return TrafficMatrix(std::move(demands), n);
}

TrafficMatrix scale_tm(const TrafficMatrix& tm, double factor) {
  if (!(factor >= 0.0) || !std::isfinite(factor)) throw ValidationError("demand scale factor must be nonnegative");
  TrafficMatrix out = tm;
  for (Demand& d : out.demands_) d.volume *= factor;
  return out;
}

}  // namespace wante
