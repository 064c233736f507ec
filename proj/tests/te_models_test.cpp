#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "oracles/vertex_lp.hpp"
#include "test_util.hpp"
#include "wante/errors.hpp"
#include "wante/te_models.hpp"

namespace wante {
namespace {

using testing::data_path;

const lp::SimplexBackend kBackend;

TeSolution solve_te(const Topology& topo, const TrafficMatrix& tm, const TunnelSet& ts) {
  const TeModel model = build_te_lp(topo, tm, ts);
  return extract_solution(lp::solve(model.problem, kBackend), model, topo, ts);
}

TeSolution solve_ffc(const Topology& topo, const TrafficMatrix& tm, const TunnelSet& ts,
                     CapacityMode mode = CapacityMode::kAll) {
  const TeModel model = build_ffc_lp(topo, tm, ts, enumerate_single_link_scenarios(topo), mode);
  return extract_solution(lp::solve(model.problem, kBackend), model, topo, ts);
}

TEST(TeModelTest, TwoNodesUnderCapacity) {
  const Topology topo = testing::two_nodes(10.0);
  const TrafficMatrix tm = testing::single_demand(topo, "u", "v", 5.0);
  const TunnelSet ts = build_tunnel_sets(topo, tm, TunnelPolicy::fixed(1));
  const TeModel model = build_te_lp(topo, tm, ts);
  EXPECT_EQ(model.problem.num_variables(), 2);
  EXPECT_EQ(model.problem.num_constraints(), 2);
  const TeSolution sol = solve_te(topo, tm, ts);
  EXPECT_NEAR(sol.objective, 5.0, 1e-9);
  EXPECT_NEAR(sol.delivered[0], 5.0, 1e-9);
  EXPECT_NEAR(sol.allocation[0], 5.0, 1e-9);
}

TEST(TeModelTest, TwoNodesCapacityBound) {
  const Topology topo = testing::two_nodes(10.0);
  const TrafficMatrix tm = testing::single_demand(topo, "u", "v", 15.0);
  const TunnelSet ts = build_tunnel_sets(topo, tm, TunnelPolicy::fixed(1));
  const TeSolution sol = solve_te(topo, tm, ts);
  EXPECT_NEAR(sol.objective, 10.0, 1e-9);
  EXPECT_NEAR(sol.allocation[0], 10.0, 1e-9);
  EXPECT_NEAR(sol.arc_load[0], 10.0, 1e-9);
  EXPECT_EQ(sol.arc_load[1], 0.0);
}

TEST(TeModelTest, MatchesTunnelColumnOracle) {
  std::mt19937_64 rng(5);
  int checked = 0;
  for (int k = 0; k < 40 && checked < 15; ++k) {
    const Topology topo = testing::random_topology(rng, 5, 3, k % 2 == 0);
    const TrafficMatrix tm = testing::random_tm(rng, topo, 3, 2.0, 25.0);
    const TunnelSet ts = build_tunnel_sets(topo, tm, TunnelPolicy::fixed(1 + k % 3));
    const oracle::InequalityLp form = oracle::te_tunnel_form(topo, tm, ts);
    if (oracle::vertex_candidates(form) > 3e5) continue;
    const auto expected = oracle::enumerate_vertices(form);
    ASSERT_TRUE(expected.has_value());
    EXPECT_NEAR(solve_te(topo, tm, ts).objective, *expected, 1e-6 * std::max(1.0, *expected)) << k;
    ++checked;
  }
  EXPECT_GE(checked, 10);
}

TEST(TeModelTest, EmptyTunnelSetFixesDeliveryToZero) {
  const Topology topo = testing::make_topology({"A", "B", "C", "D"}, {{"A", "B", 5, 1}, {"C", "D", 5, 1}});
  const TrafficMatrix tm({{0, 0, 1, 3.0}, {0, 0, 3, 4.0}}, 4);
  const TunnelSet ts = build_tunnel_sets(topo, tm, TunnelPolicy::fixed(2));
  const TeModel model = build_te_lp(topo, tm, ts);
  EXPECT_EQ(model.problem.variable(model.demand_var[1]).upper, 0.0);
  const TeSolution sol = solve_te(topo, tm, ts);
  EXPECT_NEAR(sol.delivered[0], 3.0, 1e-9);
  EXPECT_EQ(sol.delivered[1], 0.0);
}

TEST(FfcModelTest, DiamondDuplicatesDemand) {
  const Topology topo = testing::diamond(10.0);
  const TrafficMatrix tm = testing::single_demand(topo, "s", "t", 10.0);
  const TunnelSet ts = build_tunnel_sets(topo, tm, TunnelPolicy::fixed(2));
  for (CapacityMode mode : {CapacityMode::kAll, CapacityMode::kNormalOnly}) {
    const TeSolution sol = solve_ffc(topo, tm, ts, mode);
    EXPECT_NEAR(sol.objective, 10.0, 1e-9);
    EXPECT_NEAR(sol.allocation[0], 10.0, 1e-9);
    EXPECT_NEAR(sol.allocation[1], 10.0, 1e-9);
    EXPECT_TRUE(verify_congestion_free(sol, topo, ts, enumerate_single_link_scenarios(topo)).congestion_free());
  }
}

TEST(FfcModelTest, RowLayout) {
  const Topology topo = testing::diamond(10.0);
  const TrafficMatrix tm = testing::single_demand(topo, "s", "t", 10.0);
  const TunnelSet ts = build_tunnel_sets(topo, tm, TunnelPolicy::fixed(2));
  const ScenarioSet scen = enumerate_single_link_scenarios(topo);
  const TeModel all = build_ffc_lp(topo, tm, ts, scen, CapacityMode::kAll);
  const TeModel normal = build_ffc_lp(topo, tm, ts, scen, CapacityMode::kNormalOnly);
  // Delivery rows: one per scenario. Capacity rows: 4 used arcs at q = 0,
  // plus the 2 surviving used arcs in each of the 4 failure scenarios.
  EXPECT_EQ(normal.problem.num_constraints(), 5 + 4);
  EXPECT_EQ(all.problem.num_constraints(), 5 + 4 + 4 * 2);
  EXPECT_EQ(all.num_scenarios, 5);
  EXPECT_EQ(all.kind, ModelKind::kFfc);
}

TEST(FfcModelTest, BridgeForcesZeroDelivery) {
  // Diamond plus a pendant node p hanging off t by a single link.
  const Topology topo = testing::make_topology(
      {"s", "a", "b", "t", "p"},
      {{"s", "a", 10, 1}, {"a", "t", 10, 1}, {"s", "b", 10, 1}, {"b", "t", 10, 1}, {"t", "p", 10, 1}});
  const TrafficMatrix tm({{0, 0, 4, 5.0}, {0, 0, 3, 5.0}}, 5);
  const TunnelSet ts = build_tunnel_sets(topo, tm, TunnelPolicy::fixed(3));
  const TeSolution te = solve_te(topo, tm, ts);
  const TeSolution ffc = solve_ffc(topo, tm, ts);
  EXPECT_NEAR(te.delivered[0], 5.0, 1e-9);
  EXPECT_EQ(ffc.delivered[0], 0.0);
  EXPECT_NEAR(ffc.delivered[1], 5.0, 1e-9);
}

TEST(FfcModelTest, CapacityModesAgree) {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 15; ++k) {
    const Topology topo = testing::random_topology(rng, 6, 5, k % 2 == 0);
    const TrafficMatrix tm = testing::random_tm(rng, topo, 8, 1.0, 15.0);
    const TunnelSet ts = build_tunnel_sets(topo, tm, TunnelPolicy::fixed(3));
    const double all = solve_ffc(topo, tm, ts, CapacityMode::kAll).objective;
    const double normal = solve_ffc(topo, tm, ts, CapacityMode::kNormalOnly).objective;
    EXPECT_NEAR(all, normal, 1e-6 * std::max(1.0, all)) << k;
  }
}

TEST(TeModelTest, Invariants) {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 15; ++k) {
    const Topology topo = testing::random_topology(rng, 6, 4, k % 3 == 0);
    const TrafficMatrix tm = testing::random_tm(rng, topo, 10, 1.0, 20.0);
    double previous = 0.0;
    for (int t = 1; t <= 4; ++t) {
      const TunnelSet ts = build_tunnel_sets(topo, tm, TunnelPolicy::fixed(t));
      const TeSolution te = solve_te(topo, tm, ts);
      // Larger tunnel sets never lose delivered flow.
      EXPECT_GE(te.objective, previous - 1e-6 * std::max(1.0, previous));
      previous = te.objective;
      // Resilience never adds delivered flow.
      EXPECT_LE(solve_ffc(topo, tm, ts).objective, te.objective + 1e-6 * std::max(1.0, te.objective));
      // Scaling capacities and demands together scales the optimum.
      const double f = 0.5 + k * 0.3;
      const TeSolution scaled = solve_te(scale_capacities(topo, f), scale_tm(tm, f), ts);
      EXPECT_NEAR(scaled.objective, f * te.objective, 1e-6 * std::max(1.0, f * te.objective));
    }
  }
}

TEST(TeModelTest, SolutionInvariants) {
  const Topology topo = load_topology(data_path("b4.json"));
  const TrafficMatrix tm = load_tm(data_path("b4_tm.json"), topo);
  const TunnelSet ts = build_tunnel_sets(topo, tm, TunnelPolicy::fixed(5));
  for (const TeSolution& sol : {solve_te(topo, tm, ts), solve_ffc(topo, tm, ts)}) {
    for (const Demand& d : tm.demands()) {
      EXPECT_GE(sol.delivered[d.id], 0.0);
      EXPECT_LE(sol.delivered[d.id], d.volume);
      double sum = 0.0;
      for (int t : ts.of_demand(d.id)) sum += sol.allocation[t];
      EXPECT_GE(sum, sol.delivered[d.id] - 1e-6);
    }
    for (double a : sol.allocation) EXPECT_GE(a, 0.0);
    for (const Arc& arc : topo.arcs()) EXPECT_LE(sol.arc_load[arc.id], arc.capacity + 1e-6);
  }
}

TEST(ExtractTest, ZeroTm) {
  const Topology topo = load_topology(data_path("b4.json"));
  const TrafficMatrix tm = scale_tm(load_tm(data_path("b4_tm.json"), topo), 0.0);
  const TunnelSet ts = build_tunnel_sets(topo, tm, TunnelPolicy::fixed(3));
  const TeSolution sol = solve_te(topo, tm, ts);
  EXPECT_EQ(sol.objective, 0.0);
  for (double v : sol.delivered) EXPECT_EQ(v, 0.0);
  for (double v : sol.allocation) EXPECT_EQ(v, 0.0);
  for (double v : sol.arc_load) EXPECT_EQ(v, 0.0);
}

TEST(ExtractTest, LoadEqualsAllocationTimesHops) {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 10; ++k) {
    const Topology topo = testing::random_topology(rng, 7, 6, true);
    const TrafficMatrix tm = testing::random_tm(rng, topo, 12, 1.0, 20.0);
    const TunnelSet ts = build_tunnel_sets(topo, tm, TunnelPolicy::fixed(3));
    const TeSolution sol = solve_te(topo, tm, ts);
    double expected = 0.0;
    for (const Tunnel& t : ts.tunnels()) expected += sol.allocation[t.id] * t.arcs.size();
    const double total = std::accumulate(sol.arc_load.begin(), sol.arc_load.end(), 0.0);
    EXPECT_NEAR(total, expected, 1e-9 * std::max(1.0, expected));
  }
}

TEST(ExtractTest, NonOptimalStatusThrows) {
  const Topology topo = testing::two_nodes(10.0);
  const TrafficMatrix tm = testing::single_demand(topo, "u", "v", 5.0);
  const TunnelSet ts = build_tunnel_sets(topo, tm, TunnelPolicy::fixed(1));
  const TeModel model = build_te_lp(topo, tm, ts);
  lp::LpSolution bad;
  bad.status = lp::SolveStatus::kInfeasible;
  EXPECT_THROW(extract_solution(bad, model, topo, ts), SolveError);
}

TEST(VerifyTest, TeOnOnePathFailsUnderFailure) {
  const Topology topo = testing::diamond(10.0);
  const TrafficMatrix tm = testing::single_demand(topo, "s", "t", 10.0);
  const TunnelSet ts = build_tunnel_sets(topo, tm, TunnelPolicy::fixed(2));
  TeSolution sol;
  sol.delivered = {10.0};
  sol.allocation = {10.0, 0.0};
  sol.arc_load = arc_loads(topo, ts, sol.allocation);
  const VerificationReport report = verify_congestion_free(sol, topo, ts, enumerate_single_link_scenarios(topo));
  EXPECT_EQ(report.scenarios_checked, 5);
  ASSERT_EQ(report.violations.size(), 2u);
  for (int i = 0; i < 2; ++i) {
    EXPECT_EQ(report.violations[i].scenario, i + 1);
    EXPECT_EQ(report.violations[i].kind, Violation::Kind::kDelivery);
    EXPECT_EQ(report.violations[i].index, 0);
    EXPECT_NEAR(report.violations[i].slack, -10.0, 1e-12);
  }
}

TEST(VerifyTest, InjectedOverloadIsReported) {
  const Topology topo = testing::diamond(10.0);
  const TrafficMatrix tm = testing::single_demand(topo, "s", "t", 10.0);
  const TunnelSet ts = build_tunnel_sets(topo, tm, TunnelPolicy::fixed(2));
  TeSolution sol = solve_ffc(topo, tm, ts);
  sol.allocation[0] += 5.0;
  const VerificationReport report = verify_congestion_free(sol, topo, ts, enumerate_single_link_scenarios(topo));
  // Tunnel 0 (arcs 0 and 2) survives in q = 0, 3, 4.
  ASSERT_EQ(report.violations.size(), 6u);
  const int scenarios[] = {0, 0, 3, 3, 4, 4};
  const int arcs[] = {0, 2, 0, 2, 0, 2};
  for (int i = 0; i < 6; ++i) {
    EXPECT_EQ(report.violations[i].scenario, scenarios[i]);
    EXPECT_EQ(report.violations[i].kind, Violation::Kind::kCapacity);
    EXPECT_EQ(report.violations[i].index, arcs[i]);
    EXPECT_NEAR(report.violations[i].slack, -5.0, 1e-9);
  }
}

TEST(VerifyTest, FfcSolutionsAreCongestionFree) {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 15; ++k) {
    const Topology topo = testing::random_topology(rng, 7, 6, k % 2 == 0);
    const TrafficMatrix tm = testing::random_tm(rng, topo, 15, 1.0, 20.0);
    const TunnelSet ts = build_tunnel_sets(topo, tm, k % 2 ? TunnelPolicy::adaptive() : TunnelPolicy::fixed(4));
    const TeSolution sol = solve_ffc(topo, tm, ts, k % 3 ? CapacityMode::kAll : CapacityMode::kNormalOnly);
    EXPECT_TRUE(verify_congestion_free(sol, topo, ts, enumerate_single_link_scenarios(topo)).congestion_free());
  }
}

TEST(SolutionDumpTest, RoundTrips) {
  const Topology topo = load_topology(data_path("b4.json"));
  const TrafficMatrix tm = scale_tm(load_tm(data_path("b4_tm.json"), topo), 0.5);
  const TunnelSet ts = build_tunnel_sets(topo, tm, TunnelPolicy::adaptive());
  const TeSolution sol = solve_ffc(topo, tm, ts);
  const LoadedSolution back = parse_solution(serialize_solution(sol, topo, tm, ts, 0.5, 2.0), topo);
  EXPECT_EQ(back.scale, 0.5);
  EXPECT_EQ(back.capacity_factor, 2.0);
  EXPECT_EQ(back.tm, tm);
  EXPECT_EQ(back.tunnels.total_tunnels(), ts.total_tunnels());
  EXPECT_EQ(back.solution.model, ModelKind::kFfc);
  EXPECT_EQ(back.solution.policy, "adaptive");
  EXPECT_EQ(back.solution.allocation, sol.allocation);
  EXPECT_EQ(back.solution.delivered, sol.delivered);
  EXPECT_NEAR(back.solution.objective, sol.objective, 1e-9 * sol.objective);
  EXPECT_THROW(parse_solution("{}", topo), ParseError);
}

TEST(TeModelTest, ParseNames) {
  EXPECT_EQ(parse_model_kind("te"), ModelKind::kTe);
  EXPECT_EQ(parse_model_kind("ffc"), ModelKind::kFfc);
  EXPECT_THROW(parse_model_kind("x"), ValidationError);
  EXPECT_EQ(parse_capacity_mode("normal-only"), CapacityMode::kNormalOnly);
  EXPECT_EQ(to_string(CapacityMode::kAll), "all");
  EXPECT_THROW(parse_capacity_mode("some"), ValidationError);
}

}  // namespace
}  // namespace wante
