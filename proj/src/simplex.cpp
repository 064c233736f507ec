// Bounded-variable primal revised simplex.
//
// Every row i gets a logical (slack) column: a_i x + s_i = rhs_i, with
// s_i >= 0 for <=, s_i <= 0 for >=, s_i = 0 for =. The starting basis is all
// logicals. The basis matrix is factored through its structural kernel: with
// R the rows whose logical is nonbasic and S the basic structural columns,
// B is nonsingular iff A[R, S] is, and solves with B reduce to a dense LU of
// that |S| x |S| block. Between refactorizations the inverse is carried in
// product form (one eta column per pivot).

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>

#include <Eigen/Dense>

#include "wante/lp.hpp"

namespace wante::lp {
namespace {

class Simplex {
 public:
  // Only the listed constraint rows take part in the solve.
  Simplex(const LpProblem& problem, std::span<const int> rows, const SimplexOptions& options);
  LpSolution run();

 private:
  struct Eta {
    int pos = 0;
    double pivot = 0.0;
    std::vector<int> index;
    std::vector<double> value;
  };

  bool is_basic(int j) const { return position_[j] >= 0; }
  double nonbasic_value(int j) const;
  double tolerance(double bound) const { return options_.primal_tolerance * std::max(1.0, std::abs(bound)); }

  // Column j of [A | I] scattered into a dense row-space vector.
  void load_column(int j, std::vector<double>& v) const;
  double column_dot(int j, const std::vector<double>& y) const;

  bool refactor();
  void compute_primal();
  void ftran(std::vector<double>& v);
  void btran(std::vector<double>& c, std::vector<double>& y);

  // Bounds a basic variable may move within this iteration. In phase 1 an
  // infeasible variable is only bounded on its feasible side.
  std::pair<double, double> working_bounds(int var) const;

  LpSolution finish(SolveStatus status, std::string diagnostics = {});

  const LpProblem& problem_;
  SimplexOptions options_;
  int m_ = 0;
  int n_ = 0;
  int total_ = 0;

  std::vector<int> col_start_;
  std::vector<int> col_row_;
  std::vector<double> col_val_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<double> cost_;
  std::vector<double> rhs_;

  std::vector<double> x_;
  std::vector<int> basis_;
  std::vector<int> position_;
  std::vector<char> at_upper_;
  bool phase_one_ = false;

  std::vector<int> kernel_rows_;
  std::vector<int> row_kernel_;
  std::vector<int> kernel_vars_;
  std::vector<int> kernel_pos_;
  std::vector<int> pos_kernel_col_;
  std::vector<int> pos_slack_row_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  std::vector<Eta> etas_;

  long iterations_ = 0;
};

Simplex::Simplex(const LpProblem& problem, std::span<const int> active, const SimplexOptions& options)
    : problem_(problem), options_(options) {
  m_ = static_cast<int>(active.size());
  n_ = problem.num_variables();
  total_ = n_ + m_;

  const auto all_rows = problem.constraints();
  std::vector<const Constraint*> rows(m_);
  for (int i = 0; i < m_; ++i) rows[i] = &all_rows[active[i]];

  std::vector<int> counts(n_ + 1, 0);
  for (const Constraint* r : rows) {
    for (const Term& t : r->terms) ++counts[t.var + 1];
  }
  col_start_.assign(n_ + 1, 0);
  for (int j = 0; j < n_; ++j) col_start_[j + 1] = col_start_[j] + counts[j + 1];
  col_row_.resize(static_cast<size_t>(col_start_.back()));
  col_val_.resize(col_row_.size());
  std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
  for (int i = 0; i < m_; ++i) {
    for (const Term& t : rows[i]->terms) {
      const auto k = static_cast<size_t>(fill[t.var]++);
      col_row_[k] = i;
      col_val_[k] = t.coef;
    }
  }

  lower_.resize(total_);
  upper_.resize(total_);
  cost_.assign(total_, 0.0);
  const double sign = problem.sense() == ObjectiveSense::kMaximize ? -1.0 : 1.0;
  for (int j = 0; j < n_; ++j) {
    const Variable& v = problem.variable(j);
    lower_[j] = v.lower;
    upper_[j] = v.upper;
    cost_[j] = sign * v.objective;
  }
  rhs_.resize(m_);
  for (int i = 0; i < m_; ++i) {
    const Constraint& r = *rows[i];
    rhs_[i] = r.rhs;
    const auto s = n_ + i;
    switch (r.sense) {
      case RowSense::kLessEqual: lower_[s] = 0.0; upper_[s] = kInfinity; break;
      case RowSense::kGreaterEqual: lower_[s] = -kInfinity; upper_[s] = 0.0; break;
      case RowSense::kEqual: lower_[s] = 0.0; upper_[s] = 0.0; break;
    }
  }

  at_upper_.assign(total_, 0);
  for (int j = 0; j < total_; ++j) {
    const auto sj = j;
    at_upper_[sj] = lower_[sj] == -kInfinity && upper_[sj] < kInfinity;
  }
  basis_.resize(m_);
  position_.assign(total_, -1);
  for (int i = 0; i < m_; ++i) {
    basis_[i] = n_ + i;
    position_[n_ + i] = i;
  }
  x_.assign(total_, 0.0);
  for (int j = 0; j < total_; ++j) {
    if (!is_basic(j)) x_[j] = nonbasic_value(j);
  }
}

double Simplex::nonbasic_value(int j) const {
  const auto sj = j;
  if (at_upper_[sj]) return upper_[sj];
  if (lower_[sj] > -kInfinity) return lower_[sj];
  return 0.0;
}

void Simplex::load_column(int j, std::vector<double>& v) const {
  std::fill(v.begin(), v.end(), 0.0);
  if (j >= n_) {
    v[j - n_] = 1.0;
    return;
  }
  for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
    v[static_cast<size_t>(col_row_[k])] = col_val_[k];
  }
}

double Simplex::column_dot(int j, const std::vector<double>& y) const {
  if (j >= n_) return y[j - n_];
  double sum = 0.0;
  for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
    sum += col_val_[k] * y[static_cast<size_t>(col_row_[k])];
  }
  return sum;
}

bool Simplex::refactor() {
  etas_.clear();
  kernel_rows_.clear();
  kernel_vars_.clear();
  kernel_pos_.clear();
  row_kernel_.assign(m_, -1);
  pos_kernel_col_.assign(m_, -1);
  pos_slack_row_.assign(m_, -1);

  for (int i = 0; i < m_; ++i) {
    if (!is_basic(n_ + i)) {
      row_kernel_[i] = static_cast<int>(kernel_rows_.size());
      kernel_rows_.push_back(i);
    }
  }
  for (int p = 0; p < m_; ++p) {
    const int var = basis_[p];
    if (var < n_) {
      pos_kernel_col_[p] = static_cast<int>(kernel_vars_.size());
      kernel_vars_.push_back(var);
      kernel_pos_.push_back(p);
    } else {
      pos_slack_row_[p] = var - n_;
    }
  }
  const auto k = static_cast<Eigen::Index>(kernel_vars_.size());
  if (k != static_cast<Eigen::Index>(kernel_rows_.size())) return false;
  if (k == 0) return true;

  Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const int j = kernel_vars_[c];
    for (int e = col_start_[j]; e < col_start_[j + 1]; ++e) {
      const int r = row_kernel_[static_cast<size_t>(col_row_[e])];
      if (r >= 0) kernel(r, c) = col_val_[e];
    }
  }
  lu_.compute(kernel);
  return lu_.rcond() > 1e-13;
}

void Simplex::ftran(std::vector<double>& v) {
  const auto k = static_cast<Eigen::Index>(kernel_vars_.size());
  Eigen::VectorXd z;
  if (k > 0) {
    Eigen::VectorXd r(k);
    for (Eigen::Index c = 0; c < k; ++c) r(c) = v[static_cast<size_t>(kernel_rows_[c])];
    z = lu_.solve(r);
    for (Eigen::Index c = 0; c < k; ++c) {
      const double zc = z(c);
      if (zc == 0.0) continue;
      const int j = kernel_vars_[c];
      for (int e = col_start_[j]; e < col_start_[j + 1]; ++e) {
        v[static_cast<size_t>(col_row_[e])] -= col_val_[e] * zc;
      }
    }
  }
  std::vector<double> out(m_);
  for (int p = 0; p < m_; ++p) {
    const int c = pos_kernel_col_[p];
    out[p] = c >= 0 ? z(c) : v[static_cast<size_t>(pos_slack_row_[p])];
  }
  for (const Eta& eta : etas_) {
    const double t = out[eta.pos] / eta.pivot;
    if (t != 0.0) {
      for (size_t e = 0; e < eta.index.size(); ++e) out[eta.index[e]] -= eta.value[e] * t;
    }
    out[eta.pos] = t;
  }
  v.swap(out);
}

void Simplex::btran(std::vector<double>& c, std::vector<double>& y) {
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double sum = c[it->pos];
    for (size_t e = 0; e < it->index.size(); ++e) sum -= c[it->index[e]] * it->value[e];
    c[it->pos] = sum / it->pivot;
  }
  std::fill(y.begin(), y.end(), 0.0);
  for (int p = 0; p < m_; ++p) {
    const int row = pos_slack_row_[p];
    if (row >= 0) y[row] = c[p];
  }
  const auto k = static_cast<Eigen::Index>(kernel_vars_.size());
  if (k == 0) return;
  Eigen::VectorXd rhs(k);
  for (Eigen::Index col = 0; col < k; ++col) {
    const int j = kernel_vars_[col];
    double v = c[static_cast<size_t>(kernel_pos_[col])];
    for (int e = col_start_[j]; e < col_start_[j + 1]; ++e) {
      const int row = col_row_[e];
      if (row_kernel_[row] < 0) v -= col_val_[e] * y[row];
    }
    rhs(col) = v;
  }
  const Eigen::VectorXd w = lu_.transpose().solve(rhs);
  for (Eigen::Index r = 0; r < k; ++r) y[static_cast<size_t>(kernel_rows_[r])] = w(r);
}

void Simplex::compute_primal() {
  std::vector<double> r(rhs_);
  for (int j = 0; j < total_; ++j) {
    if (is_basic(j)) continue;
    const double xj = x_[j];
    if (xj == 0.0) continue;
    if (j >= n_) {
      r[j - n_] -= xj;
      continue;
    }
    for (int e = col_start_[j]; e < col_start_[j + 1]; ++e) {
      r[static_cast<size_t>(col_row_[e])] -= col_val_[e] * xj;
    }
  }
  ftran(r);
  for (int p = 0; p < m_; ++p) x_[static_cast<size_t>(basis_[p])] = r[p];
}

std::pair<double, double> Simplex::working_bounds(int var) const {
  const auto s = var;
  const double x = x_[s];
  if (phase_one_) {
    if (x < lower_[s] - tolerance(lower_[s])) return {-kInfinity, lower_[s]};
    if (x > upper_[s] + tolerance(upper_[s])) return {upper_[s], kInfinity};
  }
  return {lower_[s], upper_[s]};
}

LpSolution Simplex::finish(SolveStatus status, std::string diagnostics) {
  LpSolution sol;
  sol.status = status;
  sol.kind = SolutionKind::kVertex;
  sol.iterations = iterations_;
  sol.diagnostics = std::move(diagnostics);
  sol.values.assign(x_.begin(), x_.begin() + n_);
  if (status == SolveStatus::kOptimal) {
    for (int j = 0; j < n_; ++j) {
      auto& v = sol.values[j];
      v = std::clamp(v, lower_[j], upper_[j]);
    }
  }
  sol.objective = problem_.objective_value(sol.values);
  return sol;
}

LpSolution Simplex::run() {
  const long limit = options_.iteration_limit > 0 ? options_.iteration_limit
                                                  : 50L * (static_cast<long>(m_) + n_) + 10000;
  if (!refactor()) return finish(SolveStatus::kNumericalFailure, "singular initial basis");
  compute_primal();

  std::vector<double> basic_cost(m_);
  std::vector<double> y(m_);
  std::vector<double> alpha(m_);
  int degenerate_run = 0;

  while (true) {
    if (iterations_ >= limit) {
      return finish(SolveStatus::kNumericalFailure,
                    "iteration limit " + std::to_string(limit) + " reached (possible cycling)");
    }
    if (static_cast<int>(etas_.size()) >= options_.refactor_interval) {
      if (!refactor()) return finish(SolveStatus::kNumericalFailure, "basis became singular");
      compute_primal();
    }

    double infeasibility = 0.0;
    for (int p = 0; p < m_; ++p) {
      const auto var = static_cast<size_t>(basis_[p]);
      const double x = x_[var];
      double c = 0.0;
      if (x < lower_[var] - tolerance(lower_[var])) {
        infeasibility += lower_[var] - x;
        c = -1.0;
      } else if (x > upper_[var] + tolerance(upper_[var])) {
        infeasibility += x - upper_[var];
        c = 1.0;
      }
      basic_cost[p] = c;
    }
    phase_one_ = infeasibility > 0.0;
    if (!phase_one_) {
      for (int p = 0; p < m_; ++p) basic_cost[p] = cost_[static_cast<size_t>(basis_[p])];
    }
    btran(basic_cost, y);

    const bool bland = degenerate_run > options_.degenerate_limit;
    int entering = -1;
    int direction = 0;
    double best = 0.0;
    for (int j = 0; j < total_; ++j) {
      const auto sj = j;
      if (is_basic(j) || lower_[sj] == upper_[sj]) continue;
      const double d = (phase_one_ ? 0.0 : cost_[sj]) - column_dot(j, y);
      int dir = 0;
      if (d < -options_.dual_tolerance && (!at_upper_[sj] && x_[sj] < upper_[sj])) dir = 1;
      if (d > options_.dual_tolerance && (at_upper_[sj] || lower_[sj] == -kInfinity)) dir = -1;
      if (dir == 0) continue;
      if (bland) {
        entering = j;
        direction = dir;
        break;
      }
      if (std::abs(d) > best) {
        best = std::abs(d);
        entering = j;
        direction = dir;
      }
    }
    if (entering < 0) {
      if (phase_one_) {
        std::ostringstream msg;
        msg << "phase 1 ended with infeasibility " << infeasibility;
        return finish(SolveStatus::kInfeasible, msg.str());
      }
      return finish(SolveStatus::kOptimal);
    }

    load_column(entering, alpha);
    ftran(alpha);

    // The basic variable at position p moves by delta_p = -direction * alpha_p
    // per unit step of the entering variable.
    int leave = -1;
    double step = kInfinity;
    if (!bland) {
      double bound = kInfinity;
      for (int p = 0; p < m_; ++p) {
        const double a = alpha[p];
        if (std::abs(a) <= options_.pivot_tolerance) continue;
        const double delta = -direction * a;
        const int var = basis_[p];
        const auto [lb, ub] = working_bounds(var);
        const double x = x_[var];
        if (delta < 0 && lb > -kInfinity) bound = std::min(bound, (x - lb + tolerance(lb)) / -delta);
        if (delta > 0 && ub < kInfinity) bound = std::min(bound, (ub - x + tolerance(ub)) / delta);
      }
      double best_pivot = 0.0;
      for (int p = 0; p < m_; ++p) {
        const double a = alpha[p];
        if (std::abs(a) <= options_.pivot_tolerance) continue;
        const double delta = -direction * a;
        const int var = basis_[p];
        const auto [lb, ub] = working_bounds(var);
        const double x = x_[var];
        double ratio = kInfinity;
        if (delta < 0 && lb > -kInfinity) ratio = (x - lb) / -delta;
        if (delta > 0 && ub < kInfinity) ratio = (ub - x) / delta;
        if (ratio == kInfinity) continue;
        if (ratio <= bound && std::abs(a) > best_pivot) {
          best_pivot = std::abs(a);
          leave = p;
          step = std::max(ratio, 0.0);
        }
      }
    } else {
      for (int p = 0; p < m_; ++p) {
        const double a = alpha[p];
        if (std::abs(a) <= options_.pivot_tolerance) continue;
        const double delta = -direction * a;
        const int var = basis_[p];
        const auto [lb, ub] = working_bounds(var);
        const double x = x_[var];
        double ratio = kInfinity;
        if (delta < 0 && lb > -kInfinity) ratio = std::max((x - lb) / -delta, 0.0);
        if (delta > 0 && ub < kInfinity) ratio = std::max((ub - x) / delta, 0.0);
        if (ratio == kInfinity) continue;
        const bool tie = leave >= 0 && std::abs(ratio - step) <= 1e-12 * std::max(1.0, step);
        if (leave < 0 || (ratio < step && !tie) || (tie && var < basis_[leave])) {
          leave = p;
          step = ratio;
        }
      }
    }

    const auto se = entering;
    const double range = upper_[se] - lower_[se];
    const bool flip = range < kInfinity && (leave < 0 || range <= step);
    if (leave < 0 && !flip) {
      if (phase_one_) return finish(SolveStatus::kNumericalFailure, "unbounded ray during phase 1");
      const std::string column =
          entering < n_ ? problem_.variable(entering).name : "slack of row " + std::to_string(entering - n_);
      return finish(SolveStatus::kUnbounded, column + " has an unbounded ray");
    }
    if (flip) step = range;

    std::pair<double, double> leaving_bounds{0.0, 0.0};
    if (!flip) leaving_bounds = working_bounds(basis_[leave]);

    for (int p = 0; p < m_; ++p) {
      const double a = alpha[p];
      if (a != 0.0) x_[static_cast<size_t>(basis_[p])] -= direction * a * step;
    }
    ++iterations_;
    degenerate_run = step <= 1e-12 ? degenerate_run + 1 : 0;

    if (flip) {
      at_upper_[se] = direction > 0;
      x_[se] = direction > 0 ? upper_[se] : lower_[se];
      continue;
    }

    x_[se] += direction * step;
    const int leaving = basis_[leave];
    const auto sl = leaving;
    const double delta = -direction * alpha[leave];
    const double target = delta > 0 ? leaving_bounds.second : leaving_bounds.first;
    at_upper_[sl] = target == upper_[sl] && upper_[sl] < kInfinity && lower_[sl] != upper_[sl];
    x_[sl] = target;
    position_[sl] = -1;
    basis_[leave] = entering;
    position_[se] = leave;

    Eta eta;
    eta.pos = leave;
    eta.pivot = alpha[leave];
    for (int p = 0; p < m_; ++p) {
      const double a = alpha[p];
      if (p != leave && a != 0.0) {
        eta.index.push_back(p);
        eta.value.push_back(a);
      }
    }
    etas_.push_back(std::move(eta));
  }
}

}  // namespace

LpSolution SimplexBackend::solve(const LpProblem& problem) const {
  std::vector<int> active;
  std::vector<int> dropped;
  if (options_.presolve) dropped = dominated_rows(problem);
  active.reserve(problem.num_constraints() - dropped.size());
  for (int i = 0, d = 0; i < problem.num_constraints(); ++i) {
    if (d < static_cast<int>(dropped.size()) && dropped[d] == i) {
      ++d;
    } else {
      active.push_back(i);
    }
  }
  Simplex simplex(problem, active, options_);
  return simplex.run();
}

}  // namespace wante::lp
