#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wante/topology.hpp"

namespace wante {

struct Demand {
  int id = 0;
  int src = 0;
  int dst = 0;
  double volume = 0.0;

  bool operator==(const Demand&) const = default;
};

// Point-to-point demands, at most one per ordered (src, dst) pair. Demand ids
// are dense and equal to the position in demands().
class TrafficMatrix {
 public:
  TrafficMatrix() = default;
  // Renumbers ids by position and validates against `num_nodes`.
  TrafficMatrix(std::vector<Demand> demands, int num_nodes);

  std::span<const Demand> demands() const { return demands_; }
  const Demand& demand(int id) const { return demands_.at(id); }
  int size() const { return static_cast<int>(demands_.size()); }
  bool empty() const { return demands_.empty(); }
  double total_volume() const;

  bool operator==(const TrafficMatrix&) const = default;

 private:
  friend TrafficMatrix scale_tm(const TrafficMatrix& tm, double factor);

  std::vector<Demand> demands_;
};

// Lognormal volume model in log space.
struct LognormalFit {
  double mu = 0.0;
  double sigma = 1.0;
  int n_samples = 0;
};

// Accepts {"demands": [{"src", "dst", "volume"}]} JSON, or CSV with a
// `src,dst,volume` header row.
TrafficMatrix parse_tm(std::string_view text, const Topology& topo);
TrafficMatrix load_tm(const std::filesystem::path& path, const Topology& topo);

// JSON form accepted by parse_tm, with an optional free-text "comment".
std::string serialize_tm(const TrafficMatrix& tm, const Topology& topo,
                         const std::string& comment = {});

// Moment fit of ln(volume) over positive volumes (population std dev).
// Throws ValidationError with fewer than two positive volumes or zero spread.
LognormalFit fit_lognormal(const TrafficMatrix& tm);

// One demand per ordered node pair (row-major over node indices), volumes
// drawn i.i.d. exp(N(mu, sigma)) from a seeded mt19937_64.
TrafficMatrix generate_lognormal_tm(const Topology& topo, const LognormalFit& fit,
                                    std::uint64_t seed);

TrafficMatrix scale_tm(const TrafficMatrix& tm, double factor);

}  // namespace wante
