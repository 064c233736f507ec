#include <random>

#include <gtest/gtest.h>

#include "oracles/vertex_lp.hpp"
#include "test_util.hpp"
#include "wante/errors.hpp"
#include "wante/lp.hpp"

namespace wante::lp {
namespace {

LpSolution run(const LpProblem& p, SimplexOptions options = {}) { return solve(p, SimplexBackend(options)); }

TEST(LpTest, SimpleMaximum) {
  LpProblem p;
  const int x = p.add_variable("x", 0, 1, 1);
  const int y = p.add_variable("y", 0, 1, 1);
  p.add_constraint("c", {{x, 1}, {y, 1}}, RowSense::kLessEqual, 1);
  const LpSolution sol = run(p);
  ASSERT_EQ(sol.status, SolveStatus::kOptimal);
  EXPECT_NEAR(sol.objective, 1.0, 1e-12);
  EXPECT_EQ(sol.kind, SolutionKind::kVertex);
}

TEST(LpTest, Infeasible) {
  LpProblem p;
  const int x = p.add_variable("x", -kInfinity, kInfinity, 1);
  p.add_constraint("lo", {{x, 1}}, RowSense::kGreaterEqual, 2);
  p.add_constraint("hi", {{x, 1}}, RowSense::kLessEqual, 1);
  EXPECT_EQ(run(p).status, SolveStatus::kInfeasible);
}

TEST(LpTest, Unbounded) {
  LpProblem p;
  const int x = p.add_variable("x", 0, kInfinity, 1);
  const int y = p.add_variable("y", 0, kInfinity, 0);
  p.add_constraint("c", {{x, 1}, {y, -1}}, RowSense::kLessEqual, 1);
  const LpSolution sol = run(p);
  EXPECT_EQ(sol.status, SolveStatus::kUnbounded);
  EXPECT_FALSE(sol.diagnostics.empty());
}

TEST(LpTest, EqualityFreeAndMinimize) {
  LpProblem p(ObjectiveSense::kMinimize);
  const int x = p.add_variable("x", -kInfinity, kInfinity, 1);
  const int y = p.add_variable("y", -5, 5, 2);
  p.add_constraint("e", {{x, 1}, {y, 1}}, RowSense::kEqual, 3);
  p.add_constraint("g", {{x, 1}, {y, -1}}, RowSense::kGreaterEqual, -4);
  // min x + 2y with x = 3 - y and x - y >= -4  =>  y <= 3.5; minimize 3 + y at y = -5.
  const LpSolution sol = run(p);
  ASSERT_EQ(sol.status, SolveStatus::kOptimal);
  EXPECT_NEAR(sol.values[y], -5.0, 1e-9);
  EXPECT_NEAR(sol.values[x], 8.0, 1e-9);
  EXPECT_NEAR(sol.objective, -2.0, 1e-9);
}

TEST(LpTest, DuplicateTermsMergeAndZerosDrop) {
  LpProblem p;
  const int x = p.add_variable("x", 0, kInfinity, 1);
  const int y = p.add_variable("y", 0, kInfinity, 0);
  p.add_constraint("c", {{x, 1}, {x, 1}, {y, 0}}, RowSense::kLessEqual, 4);
  ASSERT_EQ(p.constraints()[0].terms.size(), 1u);
  EXPECT_EQ(p.constraints()[0].terms[0].coef, 2.0);
  EXPECT_NEAR(run(p).objective, 2.0, 1e-12);
}

TEST(LpTest, ValidateRejectsBadInput) {
  LpProblem p;
  const int x = p.add_variable("x", 0, 1, 1);
  p.add_constraint("c", {{x + 5, 1}}, RowSense::kLessEqual, 1);
  EXPECT_THROW(solve(p, SimplexBackend()), ValidationError);
  LpProblem q;
  q.add_variable("x", 2, 1, 1);
  EXPECT_THROW(q.validate(), ValidationError);
}

TEST(LpTest, DegenerateRedundantRows) {
  // Many copies and scalings of the same facets through a degenerate vertex.
  LpProblem p;
  const int x = p.add_variable("x", 0, kInfinity, 1);
  const int y = p.add_variable("y", 0, kInfinity, 1);
  const int z = p.add_variable("z", 0, kInfinity, 1);
  for (int k = 1; k <= 10; ++k) {
    p.add_constraint("a", {{x, double(k)}, {y, double(k)}}, RowSense::kLessEqual, k);
    p.add_constraint("b", {{y, 1}, {z, 1}}, RowSense::kLessEqual, 1);
    p.add_constraint("c", {{x, 1}, {z, 1}}, RowSense::kLessEqual, 1);
    p.add_constraint("d", {{x, 1}, {y, 1}, {z, 1}}, RowSense::kLessEqual, 1.5);
  }
  for (bool presolve : {true, false}) {
    SimplexOptions options;
    options.presolve = presolve;
    const LpSolution sol = run(p, options);
    ASSERT_EQ(sol.status, SolveStatus::kOptimal);
    EXPECT_NEAR(sol.objective, 1.5, 1e-9);
  }
}

TEST(LpTest, BealeCyclingExample) {
  // Classic instance on which Dantzig's rule without anti-cycling cycles.
  LpProblem p(ObjectiveSense::kMinimize);
  const int x4 = p.add_variable("x4", 0, kInfinity, -0.75);
  const int x5 = p.add_variable("x5", 0, kInfinity, 150);
  const int x6 = p.add_variable("x6", 0, kInfinity, -0.02);
  const int x7 = p.add_variable("x7", 0, kInfinity, 6);
  p.add_constraint("r1", {{x4, 0.25}, {x5, -60}, {x6, -0.04}, {x7, 9}}, RowSense::kLessEqual, 0);
  p.add_constraint("r2", {{x4, 0.5}, {x5, -90}, {x6, -0.02}, {x7, 3}}, RowSense::kLessEqual, 0);
  p.add_constraint("r3", {{x6, 1}}, RowSense::kLessEqual, 1);
  const LpSolution sol = run(p);
  ASSERT_EQ(sol.status, SolveStatus::kOptimal);
  EXPECT_NEAR(sol.objective, -0.05, 1e-9);
}

LpProblem random_lp(std::mt19937_64& rng, int n, int m) {
  std::uniform_real_distribution<double> coef(-3, 6);
  std::uniform_real_distribution<double> pos(0.5, 10);
  std::uniform_int_distribution<int> sense(0, 5);
  LpProblem p(rng() % 2 ? ObjectiveSense::kMaximize : ObjectiveSense::kMinimize);
  for (int j = 0; j < n; ++j) {
    const double lo = rng() % 3 == 0 ? -pos(rng) : 0.0;
    p.add_variable("x" + std::to_string(j), lo, lo + pos(rng), std::round(coef(rng) * 4) / 4);
  }
  for (int i = 0; i < m; ++i) {
    std::vector<Term> terms;
    for (int j = 0; j < n; ++j) {
      if (rng() % 3) terms.push_back({j, std::round(coef(rng) * 2) / 2});
    }
    const int s = sense(rng);
    const RowSense rs = s < 4 ? RowSense::kLessEqual : (s == 4 ? RowSense::kGreaterEqual : RowSense::kEqual);
    p.add_constraint("r" + std::to_string(i), std::move(terms), rs, std::round(coef(rng) * 2) / 2 + 2);
  }
  return p;
}

TEST(LpTest, RandomLpsMatchVertexEnumeration) {
  std::mt19937_64 rng(99);
  int optimal = 0;
  int infeasible = 0;
  for (int k = 0; k < 60; ++k) {
    const LpProblem p = random_lp(rng, 2 + k % 7, 1 + k % 6);
    const auto expected = oracle::enumerate_vertices(oracle::from_problem(p));
    const LpSolution sol = run(p);
    if (!expected) {
      EXPECT_EQ(sol.status, SolveStatus::kInfeasible) << "instance " << k;
      ++infeasible;
      continue;
    }
    ASSERT_EQ(sol.status, SolveStatus::kOptimal) << "instance " << k << ": " << sol.diagnostics;
    const double value = p.sense() == ObjectiveSense::kMaximize ? *expected : -*expected;
    EXPECT_NEAR(sol.objective, value, 1e-6 * std::max(1.0, std::abs(value))) << "instance " << k;
    EXPECT_TRUE(check_feasibility(p, sol.values).ok());
    ++optimal;
  }
  EXPECT_GE(optimal, 20);
  EXPECT_GE(infeasible, 1);
}

TEST(LpTest, Deterministic) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 10; ++k) {
    const LpProblem p = random_lp(rng, 8, 6);
    const LpSolution a = run(p);
    const LpSolution b = run(p);
    EXPECT_EQ(a.status, b.status);
    EXPECT_EQ(a.values, b.values);
  }
}

TEST(LpTest, SolveRejectsInfeasibleClaims) {
  // A backend that lies about optimality is caught by re-verification.
  class LyingBackend : public LpBackend {
   public:
    std::string_view name() const override { return "liar"; }
    LpSolution solve(const LpProblem& p) const override {
      LpSolution s;
      s.status = SolveStatus::kOptimal;
      s.values.assign(p.num_variables(), 5.0);
      return s;
    }
  };
  LpProblem p;
  const int x = p.add_variable("x", 0, 1, 1);
  p.add_constraint("c", {{x, 1}}, RowSense::kLessEqual, 1);
  const LpSolution sol = solve(p, LyingBackend());
  EXPECT_EQ(sol.status, SolveStatus::kNumericalFailure);
  EXPECT_FALSE(sol.diagnostics.empty());
}

TEST(LpTest, CheckFeasibility) {
  LpProblem p;
  const int x = p.add_variable("x", 0, 1, 1);
  const int y = p.add_variable("y", 0, kInfinity, 1);
  p.add_constraint("c", {{x, 2}, {y, 2}}, RowSense::kLessEqual, 2);
  EXPECT_TRUE(check_feasibility(p, std::vector<double>{0.5, 0.5}).ok());
  const FeasibilityReport bad = check_feasibility(p, std::vector<double>{1.0, 1.0});
  EXPECT_FALSE(bad.ok());
  EXPECT_EQ(bad.worst_row, 0);
  EXPECT_NEAR(bad.max_row_violation, 1.0, 1e-12);
  EXPECT_FALSE(check_feasibility(p, std::vector<double>{1.5, 0.0}).ok());
}

TEST(LpTest, DominatedRows) {
  LpProblem p;
  const int a = p.add_variable("a", 0, kInfinity, 1);
  const int b = p.add_variable("b", 0, kInfinity, 1);
  const int c = p.add_variable("c", -kInfinity, kInfinity, 0);
  p.add_constraint("r0", {{a, 1}, {b, 1}}, RowSense::kLessEqual, 5);
  p.add_constraint("r1", {{a, 1}}, RowSense::kLessEqual, 5);           // implied by r0
  p.add_constraint("r2", {{a, 1}, {b, 1}}, RowSense::kLessEqual, 5);   // copy of r0
  p.add_constraint("r3", {{a, 1}}, RowSense::kLessEqual, 4);           // tighter, kept
  p.add_constraint("r4", {{a, 1}, {c, 1}}, RowSense::kLessEqual, 9);   // free c, kept
  p.add_constraint("r5", {{a, 1}, {b, 1}, {c, -1}}, RowSense::kGreaterEqual, 0);
  p.add_constraint("r6", {{a, 1}, {b, 2}, {c, -1}}, RowSense::kGreaterEqual, -1);  // implied by r5
  p.add_constraint("r7", {{a, 1}, {b, 1}}, RowSense::kEqual, 3);
  EXPECT_EQ(dominated_rows(p), (std::vector<int>{1, 2, 6}));
}

TEST(LpTest, PresolveDoesNotChangeOptimum) {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 40; ++k) {
    LpProblem p = random_lp(rng, 3 + k % 5, 3 + k % 4);
    // Append weakened copies of existing rows.
    const auto rows = std::vector<Constraint>(p.constraints().begin(), p.constraints().end());
    for (const Constraint& r : rows) {
      if (r.sense == RowSense::kLessEqual) p.add_constraint(r.name + "_w", r.terms, r.sense, r.rhs + 1);
      if (r.sense == RowSense::kGreaterEqual) p.add_constraint(r.name + "_w", r.terms, r.sense, r.rhs - 1);
    }
    SimplexOptions plain;
    plain.presolve = false;
    const LpSolution a = run(p);
    const LpSolution b = run(p, plain);
    ASSERT_EQ(a.status, b.status) << k;
    if (a.optimal()) EXPECT_NEAR(a.objective, b.objective, 1e-7 * std::max(1.0, std::abs(a.objective)));
  }
}

TEST(LpTest, LpFormatExport) {
  LpProblem p;
  const int x = p.add_variable("x", 0, 4, 1);
  const int y = p.add_variable("y", -kInfinity, kInfinity, 0.1);
  p.add_constraint("c1", {{x, 1}, {y, -2.5}}, RowSense::kLessEqual, 3);
  p.add_constraint("c2", {{y, 1}}, RowSense::kEqual, 0.3);
  const std::string text = to_lp_format(p);
  EXPECT_NE(text.find("Maximize"), std::string::npos);
  EXPECT_NE(text.find("obj: x + 0.1 y"), std::string::npos);
  EXPECT_NE(text.find("c1: x - 2.5 y <= 3"), std::string::npos);
  EXPECT_NE(text.find("c2: y = 0.3"), std::string::npos);
  EXPECT_NE(text.find("y free"), std::string::npos);
  EXPECT_NE(text.find("End"), std::string::npos);
}

TEST(LpTest, BackendRegistry) {
  EXPECT_EQ(make_backend("simplex")->name(), "simplex");
  EXPECT_THROW(make_backend("gurobi"), ValidationError);
  EXPECT_EQ(backend_names(), std::vector<std::string>{"simplex"});
}

}  // namespace
}  // namespace wante::lp
