#include <random>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "wante/errors.hpp"
#include "wante/topology.hpp"

namespace wante {
namespace {

using testing::data_path;

TEST(TopologyTest, B4HasTwelveNodesAndThirtyEightArcs) {
  const Topology topo = load_topology(data_path("b4.json"));
  EXPECT_EQ(topo.num_nodes(), 12);
  EXPECT_EQ(topo.num_links(), 19);
  EXPECT_EQ(topo.num_arcs(), 38);
}

TEST(TopologyTest, SingleLinkMakesTwoArcs) {
  const Topology topo = parse_topology(R"({"name": "p", "nodes": [{"id": "a"}, {"id": "b"}],
      "links": [{"src": "a", "dst": "b", "capacity": 10}]})");
  ASSERT_EQ(topo.num_arcs(), 2);
  EXPECT_EQ(topo.arc(0).src, 0);
  EXPECT_EQ(topo.arc(0).dst, 1);
  EXPECT_EQ(topo.arc(1).src, 1);
  EXPECT_EQ(topo.arc(1).dst, 0);
  for (const Arc& a : topo.arcs()) {
    EXPECT_EQ(a.capacity, 10.0);
    EXPECT_EQ(a.weight, 1.0);
    EXPECT_EQ(a.pair_id, 0);
  }
}

TEST(TopologyTest, RejectsBadDocuments) {
  const std::string head = R"({"name": "p", "nodes": [{"id": "a"}, {"id": "b"}], "links": [)";
  EXPECT_THROW(parse_topology(head + R"({"src": "a", "dst": "b", "capacity": 0}]})"), ValidationError);
  EXPECT_THROW(parse_topology(head + R"({"src": "a", "dst": "b", "capacity": -1}]})"), ValidationError);
  EXPECT_THROW(parse_topology(head + R"({"src": "a", "dst": "c", "capacity": 1}]})"), ValidationError);
  EXPECT_THROW(parse_topology(head + R"({"src": "a", "dst": "a", "capacity": 1}]})"), ValidationError);
  EXPECT_THROW(parse_topology(head + R"({"src": "a", "dst": "b", "capacity": 1, "weight": -2}]})"),
               ValidationError);
  EXPECT_THROW(parse_topology(R"({"name": "p", "nodes": [{"id": "a"}, {"id": "a"}], "links": []})"),
               ValidationError);
  EXPECT_THROW(parse_topology(head + R"({"src": "a", "dst": "b"}]})"), ParseError);
  EXPECT_THROW(parse_topology("{not json"), ParseError);
  EXPECT_THROW(parse_topology(R"({"name": "p", "nodes": "x", "links": []})"), ParseError);
}

TEST(TopologyTest, MissingFileThrowsFileError) {
  EXPECT_THROW(load_topology("/nonexistent/topo.json"), FileError);
}

TEST(TopologyTest, ReverseArcsMatch) {
  const Topology topo = load_topology(data_path("b4.json"));
  for (const Arc& a : topo.arcs()) {
    const Arc& r = topo.arc(topo.reverse_arc(a.id));
    EXPECT_EQ(r.src, a.dst);
    EXPECT_EQ(r.dst, a.src);
    EXPECT_EQ(r.capacity, a.capacity);
    EXPECT_EQ(r.weight, a.weight);
    EXPECT_EQ(r.pair_id, a.pair_id);
  }
}

TEST(TopologyTest, SerializeRoundTrips) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20; ++i) {
    const Topology topo = testing::random_topology(rng, 2 + i % 7, i % 5, i % 2 == 0);
    EXPECT_EQ(parse_topology(serialize_topology(topo)), topo);
  }
  const Topology b4 = load_topology(data_path("b4.json"));
  EXPECT_EQ(parse_topology(serialize_topology(b4)), b4);
}

TEST(TopologyTest, ScaleCapacities) {
  const Topology topo = testing::diamond(10.0);
  EXPECT_EQ(scale_capacities(topo, 1.0), topo);
  const Topology scaled = scale_capacities(topo, 2.5);
  for (const Arc& a : scaled.arcs()) EXPECT_EQ(a.capacity, 25.0);
  EXPECT_EQ(scaled.arc(3).weight, topo.arc(3).weight);
  EXPECT_THROW(scale_capacities(topo, 0.0), ValidationError);
  EXPECT_THROW(scale_capacities(topo, -1.0), ValidationError);
}

TEST(TopologyTest, ScaleComposes) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> f(0.1, 10.0);
  const Topology topo = load_topology(data_path("b4.json"));
  for (int i = 0; i < 50; ++i) {
    const double f1 = f(rng);
    const double f2 = f(rng);
    const Topology once = scale_capacities(topo, f1 * f2);
    const Topology twice = scale_capacities(scale_capacities(topo, f1), f2);
    for (int a = 0; a < topo.num_arcs(); ++a) {
      EXPECT_NEAR(once.arc(a).capacity, twice.arc(a).capacity, 1e-12 * once.arc(a).capacity);
    }
  }
}

TEST(TopologyTest, Lookups) {
  const Topology topo = testing::diamond();
  EXPECT_EQ(topo.node_index("t"), 3);
  EXPECT_FALSE(topo.find_node("x").has_value());
  EXPECT_THROW(topo.node_index("x"), ValidationError);
  EXPECT_EQ(topo.find_arc(0, 1), 0);
  EXPECT_EQ(topo.find_arc(1, 0), 1);
  EXPECT_FALSE(topo.find_arc(0, 3).has_value());
  const auto out = topo.out_arcs(0);
  EXPECT_EQ(std::vector<int>(out.begin(), out.end()), (std::vector<int>{0, 4}));
}

}  // namespace
}  // namespace wante
