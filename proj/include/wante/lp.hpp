#pragma once

#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wante::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class RowSense { kLessEqual, kGreaterEqual, kEqual };
enum class ObjectiveSense { kMaximize, kMinimize };

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInfinity;
  double objective = 0.0;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  RowSense sense = RowSense::kLessEqual;
  double rhs = 0.0;
};

// Sparse linear program. Duplicate terms within a row are merged on insert.
class LpProblem {
 public:
  explicit LpProblem(ObjectiveSense sense = ObjectiveSense::kMaximize) : sense_(sense) {}

  int add_variable(std::string name, double lower, double upper, double objective = 0.0);
  int add_constraint(std::string name, std::vector<Term> terms, RowSense sense, double rhs);
  void set_bounds(int var, double lower, double upper);
  void set_objective(int var, double coef);

  ObjectiveSense sense() const { return sense_; }
  std::span<const Variable> variables() const { return vars_; }
  std::span<const Constraint> constraints() const { return rows_; }
  const Variable& variable(int j) const { return vars_.at(j); }
  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }
  size_t num_nonzeros() const;

  // Throws ValidationError if a term references an unknown variable, a bound
  // pair is inverted, or a coefficient/rhs is not finite.
  void validate() const;

  double objective_value(std::span<const double> x) const;

 private:
  ObjectiveSense sense_;
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
};

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kNumericalFailure };
enum class SolutionKind { kVertex, kInterior };

std::string_view to_string(SolveStatus status);
std::string_view to_string(SolutionKind kind);

struct LpSolution {
  SolveStatus status = SolveStatus::kNumericalFailure;
  double objective = 0.0;
  std::vector<double> values;
  double solve_time_s = 0.0;
  SolutionKind kind = SolutionKind::kVertex;
  long iterations = 0;
  std::string diagnostics;

  bool optimal() const { return status == SolveStatus::kOptimal; }
};

// Solver backend contract. Implementations must be safe to call concurrently
// on distinct problems.
class LpBackend {
 public:
  virtual ~LpBackend() = default;
  virtual std::string_view name() const = 0;
  virtual LpSolution solve(const LpProblem& problem) const = 0;
};

struct SimplexOptions {
  double primal_tolerance = 1e-9;
  double dual_tolerance = 1e-9;
  double pivot_tolerance = 1e-9;
  // Basis refactorization period (number of eta updates).
  int refactor_interval = 100;
  // Consecutive degenerate pivots before switching to Bland's rule.
  int degenerate_limit = 50;
  // 0 selects 50 * (rows + columns) + 10000.
  long iteration_limit = 0;
  // Drop rows implied by another row before solving (see dominated_rows).
  bool presolve = true;
};

// Bounded-variable primal revised simplex with a two-phase (sum of
// infeasibilities) start, Dantzig pricing, Harris ratio test and Bland
// fallback on stalling. Always returns vertex solutions.
class SimplexBackend final : public LpBackend {
 public:
  explicit SimplexBackend(SimplexOptions options = {}) : options_(options) {}
  std::string_view name() const override { return "simplex"; }
  LpSolution solve(const LpProblem& problem) const override;

 private:
  SimplexOptions options_;
};

// Backend registry: "simplex" is the bundled backend. Throws
// ValidationError for unknown names.
std::unique_ptr<LpBackend> make_backend(std::string_view name);
std::vector<std::string> backend_names();

struct FeasibilityReport {
  double max_row_violation = 0.0;    // on rows scaled by their largest |coef|
  double max_bound_violation = 0.0;
  int worst_row = -1;
  int worst_var = -1;

  bool ok(double row_tol = 1e-6, double bound_tol = 1e-9) const {
    return max_row_violation <= row_tol && max_bound_violation <= bound_tol;
  }
};

// Rows implied by a single other row of the same sense through coefficient
// and bound comparison: for <= rows, a_1 x <= a_2 x <= b_2 <= b_1 holds when
// every coefficient difference is signed to match its variable's bound sign.
// Identical rows keep the lowest index. Removing every returned row leaves
// the feasible set unchanged. Ascending.
std::vector<int> dominated_rows(const LpProblem& problem);

// Direct substitution check, independent of any solver state.
FeasibilityReport check_feasibility(const LpProblem& problem, std::span<const double> x);

// Validates, times the backend call alone, and re-verifies feasibility of an
// optimal answer. An optimal answer that fails the check is downgraded to
// kNumericalFailure with diagnostics.
LpSolution solve(const LpProblem& problem, const LpBackend& backend);

// CPLEX-style LP file text with shortest round-trip numbers.
std::string to_lp_format(const LpProblem& problem);

}  // namespace wante::lp
