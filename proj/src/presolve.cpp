#include <algorithm>

#include "wante/lp.hpp"

namespace wante::lp {

namespace {

// Can a coefficient `from` be replaced by `to` while only moving the row
// activity up? (sum from*x <= sum to*x for every x within bounds)
bool no_larger(double from, double to, const Variable& v) {
  if (from == to) return true;
  if (from < to) return v.lower >= 0.0;
  return v.upper <= 0.0;
}

// True when row r's activity is bounded by row s's activity for every x in
// the variable box, in the direction that makes s imply r.
bool implied_by(const Constraint& r, const Constraint& s, const LpProblem& problem) {
  const bool le = r.sense == RowSense::kLessEqual;
  if (le ? r.rhs < s.rhs : r.rhs > s.rhs) return false;
  size_t i = 0;
  size_t k = 0;
  while (i < r.terms.size() || k < s.terms.size()) {
    int var;
    double cr = 0.0;
    double cs = 0.0;
    if (k == s.terms.size() || (i < r.terms.size() && r.terms[i].var < s.terms[k].var)) {
      var = r.terms[i].var;
      cr = r.terms[i++].coef;
    } else if (i == r.terms.size() || s.terms[k].var < r.terms[i].var) {
      var = s.terms[k].var;
      cs = s.terms[k++].coef;
    } else {
      var = r.terms[i].var;
      cr = r.terms[i++].coef;
      cs = s.terms[k++].coef;
    }
    const Variable& v = problem.variable(var);
    if (le ? !no_larger(cr, cs, v) : !no_larger(cs, cr, v)) return false;
  }
  return true;
}

bool identical(const Constraint& a, const Constraint& b) {
  if (a.rhs != b.rhs || a.terms.size() != b.terms.size()) return false;
  for (size_t i = 0; i < a.terms.size(); ++i) {
    if (a.terms[i].var != b.terms[i].var || a.terms[i].coef != b.terms[i].coef) return false;
  }
  return true;
}

}  // namespace

std::vector<int> dominated_rows(const LpProblem& problem) {
  const auto rows = problem.constraints();
  const int m = problem.num_constraints();
  std::vector<Constraint> sorted(rows.begin(), rows.end());
  for (auto& r : sorted) {
    std::sort(r.terms.begin(), r.terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
  }
  std::vector<std::vector<int>> by_var(problem.num_variables());
  for (int i = 0; i < m; ++i) {
    for (const Term& t : sorted[i].terms) by_var[t.var].push_back(i);
  }

  std::vector<int> out;
  for (int i = 0; i < m; ++i) {
    const Constraint& r = sorted[i];
    if (r.sense == RowSense::kEqual) continue;
    // Any dominating row must contain a variable whose coefficient cannot
    // drop to zero; scan the shortest such column.
    int pivot = -1;
    for (const Term& t : r.terms) {
      const Variable& v = problem.variable(t.var);
      const bool needs_entry = r.sense == RowSense::kLessEqual ? !no_larger(t.coef, 0.0, v)
                                                               : !no_larger(0.0, t.coef, v);
      if (needs_entry && (pivot < 0 || by_var[t.var].size() < by_var[pivot].size())) pivot = t.var;
    }
    if (pivot < 0) continue;
    for (int k : by_var[pivot]) {
      if (k == i || sorted[k].sense != r.sense) continue;
      if (!implied_by(r, sorted[k], problem)) continue;
      if (identical(r, sorted[k]) && k > i) continue;
      out.push_back(i);
      break;
    }
  }
  return out;
}

}  // namespace wante::lp
