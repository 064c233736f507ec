#include <algorithm>
#include <chrono>
#include <charconv>
#include <cmath>
#include <sstream>

#include "wante/errors.hpp"
#include "wante/format.hpp"
#include "wante/lp.hpp"

namespace wante::lp {

int LpProblem::add_variable(std::string name, double lower, double upper, double objective) {
  vars_.push_back(Variable{std::move(name), lower, upper, objective});
  return static_cast<int>(vars_.size()) - 1;
}

int LpProblem::add_constraint(std::string name, std::vector<Term> terms, RowSense sense, double rhs) {
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> merged;
  for (const Term& t : terms) {
    if (!merged.empty() && merged.back().var == t.var) {
      merged.back().coef += t.coef;
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
  rows_.push_back(Constraint{std::move(name), std::move(merged), sense, rhs});
  return static_cast<int>(rows_.size()) - 1;
}

void LpProblem::set_bounds(int var, double lower, double upper) {
  Variable& v = vars_.at(var);
  v.lower = lower;
  v.upper = upper;
}

void LpProblem::set_objective(int var, double coef) { vars_.at(var).objective = coef; }

size_t LpProblem::num_nonzeros() const {
  size_t nnz = 0;
  for (const Constraint& r : rows_) nnz += r.terms.size();
  return nnz;
}

void LpProblem::validate() const {
  for (size_t j = 0; j < vars_.size(); ++j) {
    const Variable& v = vars_[j];
    if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper || v.lower == kInfinity ||
        v.upper == -kInfinity) {
      throw ValidationError("variable '" + v.name + "' has invalid bounds");
    }
    if (!std::isfinite(v.objective)) throw ValidationError("variable '" + v.name + "' has a non-finite cost");
  }
  for (const Constraint& r : rows_) {
    if (!std::isfinite(r.rhs)) throw ValidationError("constraint '" + r.name + "' has a non-finite rhs");
    for (const Term& t : r.terms) {
      if (t.var < 0 || t.var >= num_variables()) {
        throw ValidationError("constraint '" + r.name + "' references an undeclared variable");
      }
      if (!std::isfinite(t.coef)) throw ValidationError("constraint '" + r.name + "' has a non-finite coefficient");
    }
  }
}

double LpProblem::objective_value(std::span<const double> x) const {
  double total = 0.0;
  for (size_t j = 0; j < vars_.size(); ++j) total += vars_[j].objective * x[j];
  return total;
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kNumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

std::string_view to_string(SolutionKind kind) {
  return kind == SolutionKind::kVertex ? "vertex" : "interior";
}

FeasibilityReport check_feasibility(const LpProblem& problem, std::span<const double> x) {
  FeasibilityReport report;
  for (int j = 0; j < problem.num_variables(); ++j) {
    const Variable& v = problem.variable(j);
    const double xj = x[j];
    const double viol = std::max({v.lower - xj, xj - v.upper, 0.0});
    if (viol > report.max_bound_violation || std::isnan(xj)) {
      report.max_bound_violation = std::isnan(xj) ? kInfinity : viol;
      report.worst_var = j;
    }
  }
  const auto rows = problem.constraints();
  for (size_t i = 0; i < rows.size(); ++i) {
    const Constraint& r = rows[i];
    double activity = 0.0;
    double scale = 1.0;
    for (const Term& t : r.terms) {
      activity += t.coef * x[t.var];
      scale = std::max(scale, std::abs(t.coef));
    }
    double viol = 0.0;
    switch (r.sense) {
      case RowSense::kLessEqual: viol = activity - r.rhs; break;
      case RowSense::kGreaterEqual: viol = r.rhs - activity; break;
      case RowSense::kEqual: viol = std::abs(activity - r.rhs); break;
    }
    viol = std::max(viol, 0.0) / scale;
    if (viol > report.max_row_violation || std::isnan(activity)) {
      report.max_row_violation = std::isnan(activity) ? kInfinity : viol;
      report.worst_row = static_cast<int>(i);
    }
  }
  return report;
}

LpSolution solve(const LpProblem& problem, const LpBackend& backend) {
  problem.validate();
  const auto start = std::chrono::steady_clock::now();
  LpSolution sol = backend.solve(problem);
  sol.solve_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (sol.optimal()) {
    const FeasibilityReport check = check_feasibility(problem, sol.values);
    if (!check.ok()) {
      std::ostringstream msg;
      msg << "backend '" << backend.name() << "' returned an infeasible optimum: row violation "
          << check.max_row_violation << " (row " << check.worst_row << "), bound violation "
          << check.max_bound_violation << " (var " << check.worst_var << ")";
      sol.status = SolveStatus::kNumericalFailure;
      sol.diagnostics = msg.str();
    }
  }
  return sol;
}

std::unique_ptr<LpBackend> make_backend(std::string_view name) {
  if (name == "simplex") return std::make_unique<SimplexBackend>();
  throw ValidationError("unknown LP backend '" + std::string(name) + "'");
}

std::vector<std::string> backend_names() { return {"simplex"}; }

namespace {

std::string num(double v) { return format_double(v); }

void write_terms(std::ostream& out, const LpProblem& problem, std::span<const Term> terms) {
  bool first = true;
  for (const Term& t : terms) {
    const double mag = std::abs(t.coef);
    out << (t.coef < 0 ? (first ? "-" : " -") : (first ? "" : " +"));
    out << (first && t.coef >= 0 ? "" : " ");
    if (mag != 1.0) out << num(mag) << " ";
    out << problem.variable(t.var).name;
    first = false;
  }
  if (first) out << "0 " << (problem.num_variables() > 0 ? problem.variable(0).name : "x");
}

}  // namespace

std::string to_lp_format(const LpProblem& problem) {
  std::ostringstream out;
  out << (problem.sense() == ObjectiveSense::kMaximize ? "Maximize\n" : "Minimize\n");
  std::vector<Term> obj;
  for (int j = 0; j < problem.num_variables(); ++j) {
    if (problem.variable(j).objective != 0.0) obj.push_back(Term{j, problem.variable(j).objective});
  }
  out << " obj: ";
  write_terms(out, problem, obj);
  out << "\nSubject To\n";
  for (const Constraint& r : problem.constraints()) {
    out << " " << r.name << ": ";
    write_terms(out, problem, r.terms);
    out << (r.sense == RowSense::kLessEqual ? " <= " : r.sense == RowSense::kGreaterEqual ? " >= " : " = ")
        << num(r.rhs) << "\n";
  }
  out << "Bounds\n";
  for (const Variable& v : problem.variables()) {
    if (v.lower == -kInfinity && v.upper == kInfinity) {
      out << " " << v.name << " free\n";
    } else if (v.lower == v.upper) {
      out << " " << v.name << " = " << num(v.lower) << "\n";
    } else {
      out << " " << num(v.lower) << " <= " << v.name << " <= " << num(v.upper) << "\n";
    }
  }
  out << "End\n";
  return out.str();
}

}  // namespace wante::lp
