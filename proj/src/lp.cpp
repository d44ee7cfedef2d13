#include "merit/lp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "merit/error.hpp"

namespace merit::lp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kRefreshInterval = 100;
constexpr double kDegenerateStep = 1e-12;

}  // namespace

const char* to_string(Status status) {
  switch (status) {
    case Status::kOptimal: return "optimal";
    case Status::kInfeasible: return "infeasible";
    case Status::kUnbounded: return "unbounded";
    case Status::kIterationLimit: return "iteration_limit";
  }
  return "unknown";
}

void LinearProgram::validate() const {
  const std::size_t n = objective.size();
  if (bounds.size() != n) throw InvalidInput("bounds and objective differ in length");
  for (const Bounds& b : bounds) {
    if (!std::isfinite(b.lower) || !std::isfinite(b.upper) || b.lower > b.upper) {
      throw InvalidInput("variable bounds must be finite with lower <= upper");
    }
  }
  for (const Constraint& c : constraints) {
    if (c.coefficients.size() != n) throw InvalidInput("constraint has the wrong dimension");
    if (!std::isfinite(c.rhs)) throw InvalidInput("constraint right-hand side is not finite");
  }
}

Simplex::Simplex(const LinearProgram& lp, SimplexOptions options) : options_(options) {
  lp.validate();
  n_ = lp.num_variables();
  cost_ = lp.objective;
  for (const Bounds& b : lp.bounds) {
    lower_.push_back(b.lower);
    upper_.push_back(b.upper);
    value_.push_back(b.lower);
  }
  at_upper_.assign(n_, 0);
  shift_.assign(n_, 0.0);
  basic_row_.assign(n_, -1);
  nonbasic_col_.resize(n_);
  nonbasic_.resize(n_);
  for (std::size_t j = 0; j < n_; ++j) {
    nonbasic_col_[j] = static_cast<long>(j);
    nonbasic_[j] = j;
  }
  reduced_ = cost_;
  for (const Constraint& c : lp.constraints) add_constraint(c);
}

void Simplex::add_constraint(const Constraint& constraint) {
  if (constraint.coefficients.size() != n_) throw InvalidInput("constraint has the wrong dimension");
  SparseRow sparse;
  for (std::size_t j = 0; j < n_; ++j) {
    if (constraint.coefficients[j] != 0.0) sparse.terms.emplace_back(j, constraint.coefficients[j]);
  }
  append_row(sparse, constraint.relation, constraint.rhs);
}

void Simplex::add_constraint(std::span<const std::pair<std::size_t, double>> terms,
                             Relation relation, double rhs) {
  SparseRow sparse;
  for (const auto& [j, a] : terms) {
    if (j >= n_) throw InvalidInput("constraint references an unknown variable");
    if (a != 0.0) sparse.terms.emplace_back(j, a);
  }
  append_row(sparse, relation, rhs);
}

void Simplex::append_row(const SparseRow& sparse, Relation relation, double rhs) {
  const std::size_t m = basis_.size();
  tableau_.resize((m + 1) * n_, 0.0);
  double* out = row(m);
  double activity = 0.0;
  for (const auto& [j, a] : sparse.terms) {
    activity += a * value_[j];
    if (nonbasic_col_[j] >= 0) {
      out[nonbasic_col_[j]] += a;
    } else {
      const double* src = row(static_cast<std::size_t>(basic_row_[j]));
      for (std::size_t c = 0; c < n_; ++c) out[c] += a * src[c];
    }
  }
  const std::size_t var = n_ + m;
  lower_.push_back(relation == Relation::kLessEqual ? -kInf : rhs);
  upper_.push_back(relation == Relation::kGreaterEqual ? kInf : rhs);
  value_.push_back(activity);
  at_upper_.push_back(0);
  shift_.push_back(0.0);
  basic_row_.push_back(static_cast<long>(m));
  nonbasic_col_.push_back(-1);
  basis_.push_back(var);
  rows_.push_back(sparse);
}

void Simplex::set_bounds(std::size_t var, Bounds bounds) {
  if (var >= n_) throw InvalidInput("set_bounds applies to structural variables only");
  if (!std::isfinite(bounds.lower) || !std::isfinite(bounds.upper) || bounds.lower > bounds.upper) {
    throw InvalidInput("variable bounds must be finite with lower <= upper");
  }
  lower_[var] = bounds.lower;
  upper_[var] = bounds.upper;
  if (nonbasic_col_[var] >= 0) {
    move_nonbasic(static_cast<std::size_t>(nonbasic_col_[var]),
                  at_upper_[var] ? bounds.upper : bounds.lower);
  }
}

void Simplex::move_nonbasic(std::size_t c, double new_value) {
  const std::size_t e = nonbasic_[c];
  const double delta = new_value - value_[e];
  value_[e] = new_value;
  if (delta == 0.0) return;
  for (std::size_t r = 0; r < basis_.size(); ++r) value_[basis_[r]] += delta * row(r)[c];
}

void Simplex::pivot(std::size_t r, std::size_t c) {
  double* pr = row(r);
  const double inv = 1.0 / pr[c];
  for (std::size_t j = 0; j < n_; ++j) pr[j] *= -inv;
  pr[c] = inv;
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    if (i == r) continue;
    double* pi = row(i);
    const double f = pi[c];
    if (f == 0.0) continue;
    pi[c] = 0.0;
    for (std::size_t j = 0; j < n_; ++j) pi[j] += f * pr[j];
  }
  const double f = reduced_[c];
  reduced_[c] = 0.0;
  for (std::size_t j = 0; j < n_; ++j) reduced_[j] += f * pr[j];

  const std::size_t entering = nonbasic_[c];
  const std::size_t leaving = basis_[r];
  basis_[r] = entering;
  nonbasic_[c] = leaving;
  basic_row_[entering] = static_cast<long>(r);
  nonbasic_col_[entering] = -1;
  basic_row_[leaving] = -1;
  nonbasic_col_[leaving] = static_cast<long>(c);
  ++pivots_;
}

void Simplex::recompute_basic_values() {
  for (std::size_t r = 0; r < basis_.size(); ++r) {
    const double* pr = row(r);
    double sum = 0.0;
    for (std::size_t c = 0; c < n_; ++c) sum += pr[c] * value_[nonbasic_[c]];
    value_[basis_[r]] = sum;
  }
}

void Simplex::recompute_reduced_costs() {
  for (std::size_t c = 0; c < n_; ++c) reduced_[c] = cost(nonbasic_[c]);
  for (std::size_t r = 0; r < basis_.size(); ++r) {
    const double w = cost(basis_[r]);
    if (w == 0.0) continue;
    const double* pr = row(r);
    for (std::size_t c = 0; c < n_; ++c) reduced_[c] += w * pr[c];
  }
}

// Pushes every nonbasic reduced cost away from zero on its dual-feasible side so that dual
// ratio tests have no ties. The shifts are tiny and removed before the primal cleanup.
void Simplex::perturb_costs() {
  std::uint64_t state = 0x9e3779b97f4a7c15ULL ^ basis_.size();
  for (std::size_t c = 0; c < n_; ++c) {
    const std::size_t e = nonbasic_[c];
    if (lower_[e] == upper_[e]) continue;
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    const double delta = 1e-7 * (1.0 + static_cast<double>(z >> 11) * 0x1.0p-53);
    const double shift = at_upper_[e] ? delta : -delta;
    shift_[e] += shift;
    reduced_[c] += shift;
  }
}

void Simplex::clear_perturbation() {
  std::fill(shift_.begin(), shift_.end(), 0.0);
  recompute_reduced_costs();
}

bool Simplex::is_binding(std::size_t i, double tol) const {
  const std::size_t var = n_ + i;
  if (basic_row_[var] < 0) return true;
  return value_[var] >= upper_[var] - tol || value_[var] <= lower_[var] + tol;
}

std::vector<long> Simplex::remove_constraints(std::span<const std::size_t> rows) {
  const std::size_t m = rows_.size();
  std::vector<char> drop(m, 0);
  for (std::size_t i : rows) {
    if (i < m && basic_row_[n_ + i] >= 0) drop[i] = 1;
  }
  std::vector<long> renumber(m, -1);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!drop[i]) renumber[i] = static_cast<long>(kept++);
  }
  if (kept == m) return renumber;
  auto rename = [&](std::size_t var) {
    return var < n_ ? var : n_ + static_cast<std::size_t>(renumber[var - n_]);
  };

  std::vector<double> tableau;
  tableau.reserve(kept * n_);
  std::vector<std::size_t> basis;
  for (std::size_t r = 0; r < basis_.size(); ++r) {
    const std::size_t b = basis_[r];
    if (b >= n_ && drop[b - n_]) continue;
    tableau.insert(tableau.end(), row(r), row(r) + n_);
    basis.push_back(rename(b));
  }
  const std::size_t total = n_ + kept;
  std::vector<double> lower(total), upper(total), value(total), shift(total);
  std::vector<char> at_upper(total);
  for (std::size_t var = 0; var < n_ + m; ++var) {
    if (var >= n_ && drop[var - n_]) continue;
    const std::size_t to = rename(var);
    lower[to] = lower_[var];
    upper[to] = upper_[var];
    value[to] = value_[var];
    shift[to] = shift_[var];
    at_upper[to] = at_upper_[var];
  }
  std::vector<SparseRow> kept_rows;
  for (std::size_t i = 0; i < m; ++i) {
    if (!drop[i]) kept_rows.push_back(std::move(rows_[i]));
  }
  for (std::size_t& e : nonbasic_) e = rename(e);
  basic_row_.assign(total, -1);
  nonbasic_col_.assign(total, -1);
  for (std::size_t r = 0; r < basis.size(); ++r) basic_row_[basis[r]] = static_cast<long>(r);
  for (std::size_t c = 0; c < n_; ++c) nonbasic_col_[nonbasic_[c]] = static_cast<long>(c);

  tableau_ = std::move(tableau);
  basis_ = std::move(basis);
  lower_ = std::move(lower);
  upper_ = std::move(upper);
  value_ = std::move(value);
  shift_ = std::move(shift);
  at_upper_ = std::move(at_upper);
  rows_ = std::move(kept_rows);
  return renumber;
}

bool Simplex::dual_feasible() const {
  for (std::size_t c = 0; c < n_; ++c) {
    const std::size_t e = nonbasic_[c];
    if (lower_[e] == upper_[e]) continue;
    if (!at_upper_[e] && reduced_[c] > options_.optimality_tolerance) return false;
    if (at_upper_[e] && reduced_[c] < -options_.optimality_tolerance) return false;
  }
  return true;
}

bool Simplex::basis_feasible() const {
  const double tol = options_.feasibility_tolerance;
  for (std::size_t b : basis_) {
    if (value_[b] < lower_[b] - tol || value_[b] > upper_[b] + tol) return false;
  }
  return true;
}

double Simplex::max_residual() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    double activity = 0.0, scale = 1.0;
    for (const auto& [j, a] : rows_[i].terms) {
      activity += a * value_[j];
      scale += std::fabs(a * value_[j]);
    }
    worst = std::max(worst, std::fabs(activity - value_[n_ + i]) / scale);
  }
  return worst;
}

// Rebuilds the tableau from the original rows for the current basis.
void Simplex::refactor() {
  std::vector<long> basic_pos(n_, -1);
  std::vector<std::size_t> basic_structural;
  for (std::size_t j = 0; j < n_; ++j) {
    if (basic_row_[j] >= 0) {
      basic_pos[j] = static_cast<long>(basic_structural.size());
      basic_structural.push_back(j);
    }
  }
  std::vector<std::size_t> tight_rows;  // rows whose activity variable is nonbasic
  std::vector<long> tight_pos(rows_.size(), -1);
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (nonbasic_col_[n_ + i] >= 0) {
      tight_pos[i] = static_cast<long>(tight_rows.size());
      tight_rows.push_back(i);
    }
  }
  const std::size_t q = basic_structural.size();
  if (tight_rows.size() != q) throw SolverFailure("simplex basis is inconsistent");

  Eigen::MatrixXd tight(q, q);
  Eigen::MatrixXd rhs(q, n_);
  tight.setZero();
  rhs.setZero();
  for (std::size_t a = 0; a < q; ++a) {
    const std::size_t i = tight_rows[a];
    rhs(a, nonbasic_col_[n_ + i]) = 1.0;
    for (const auto& [j, coef] : rows_[i].terms) {
      if (basic_pos[j] >= 0) {
        tight(a, basic_pos[j]) = coef;
      } else {
        rhs(a, nonbasic_col_[j]) -= coef;
      }
    }
  }
  Eigen::MatrixXd solved;
  if (q > 0) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(tight);
    solved = lu.solve(rhs);
    if (!solved.allFinite() || (tight * solved - rhs).cwiseAbs().maxCoeff() > 1e-7) {
      throw SolverFailure("simplex basis became numerically singular");
    }
  }
  for (std::size_t t = 0; t < q; ++t) {
    double* out = row(static_cast<std::size_t>(basic_row_[basic_structural[t]]));
    for (std::size_t c = 0; c < n_; ++c) out[c] = solved(t, c);
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (basic_row_[n_ + i] < 0) continue;
    double* out = row(static_cast<std::size_t>(basic_row_[n_ + i]));
    std::fill(out, out + n_, 0.0);
    for (const auto& [j, coef] : rows_[i].terms) {
      if (basic_pos[j] >= 0) {
        const long t = basic_pos[j];
        for (std::size_t c = 0; c < n_; ++c) out[c] += coef * solved(t, c);
      } else {
        out[nonbasic_col_[j]] += coef;
      }
    }
  }
  recompute_basic_values();
  recompute_reduced_costs();
}

Simplex::Outcome Simplex::run_primal() {
  const double ftol = options_.feasibility_tolerance;
  const double otol = options_.optimality_tolerance;
  const double ptol = options_.pivot_tolerance;
  std::size_t stalled = 0;
  bool bland = false;
  std::vector<double> phase_one(n_);
  struct Candidate {
    std::size_t row;
    double limit;
    double magnitude;
    bool to_upper;
  };
  std::vector<Candidate> candidates;

  for (std::size_t since_refresh = 0;; ++since_refresh) {
    if (pivots_ >= options_.max_pivots) return Outcome::kLimit;
    if (since_refresh == kRefreshInterval) {
      recompute_basic_values();
      recompute_reduced_costs();
      since_refresh = 0;
    }

    bool infeasible = false;
    std::fill(phase_one.begin(), phase_one.end(), 0.0);
    for (std::size_t r = 0; r < basis_.size(); ++r) {
      const std::size_t b = basis_[r];
      double g = 0.0;
      if (value_[b] < lower_[b] - ftol) g = 1.0;
      if (value_[b] > upper_[b] + ftol) g = -1.0;
      if (g == 0.0) continue;
      infeasible = true;
      const double* pr = row(r);
      for (std::size_t c = 0; c < n_; ++c) phase_one[c] += g * pr[c];
    }
    const std::vector<double>& d = infeasible ? phase_one : reduced_;

    long enter = -1;
    int direction = 0;
    double best = 0.0;
    for (std::size_t c = 0; c < n_; ++c) {
      const std::size_t e = nonbasic_[c];
      if (lower_[e] == upper_[e]) continue;
      int dir = 0;
      if (!at_upper_[e] && d[c] > otol) dir = 1;
      if (at_upper_[e] && d[c] < -otol) dir = -1;
      if (dir == 0) continue;
      if (bland) {
        if (enter < 0 || e < nonbasic_[enter]) {
          enter = static_cast<long>(c);
          direction = dir;
        }
      } else if (std::fabs(d[c]) > best) {
        best = std::fabs(d[c]);
        enter = static_cast<long>(c);
        direction = dir;
      }
    }
    if (enter < 0) return infeasible ? Outcome::kInfeasible : Outcome::kOptimal;
    const std::size_t c = static_cast<std::size_t>(enter);
    const std::size_t e = nonbasic_[c];

    candidates.clear();
    double min_limit = upper_[e] - lower_[e];
    for (std::size_t r = 0; r < basis_.size(); ++r) {
      const double t = direction * row(r)[c];
      if (std::fabs(t) <= ptol) continue;
      const std::size_t b = basis_[r];
      const double x = value_[b];
      Candidate cand{r, kInf, std::fabs(t), false};
      if (t > 0) {
        if (x < lower_[b] - ftol) {
          cand.limit = (lower_[b] - x) / t;
        } else if (x > upper_[b] + ftol) {
          continue;
        } else if (std::isfinite(upper_[b])) {
          cand.limit = std::max(0.0, upper_[b] - x) / t;
          cand.to_upper = true;
        }
      } else {
        if (x > upper_[b] + ftol) {
          cand.limit = (x - upper_[b]) / -t;
          cand.to_upper = true;
        } else if (x < lower_[b] - ftol) {
          continue;
        } else if (std::isfinite(lower_[b])) {
          cand.limit = std::max(0.0, x - lower_[b]) / -t;
        }
      }
      if (!std::isfinite(cand.limit)) continue;
      candidates.push_back(cand);
      min_limit = std::min(min_limit, cand.limit);
    }
    if (!std::isfinite(min_limit)) return Outcome::kUnbounded;

    const Candidate* chosen = nullptr;
    const double slack = min_limit + 1e-12;
    for (const Candidate& cand : candidates) {
      if (cand.limit > slack) continue;
      if (!chosen) {
        chosen = &cand;
      } else if (bland ? basis_[cand.row] < basis_[chosen->row]
                       : cand.magnitude > chosen->magnitude) {
        chosen = &cand;
      }
    }
    const bool flip = upper_[e] - lower_[e] <= min_limit && (!chosen || upper_[e] - lower_[e] <= chosen->limit);
    const double step = flip ? upper_[e] - lower_[e] : chosen->limit;
    if (step != 0.0) move_nonbasic(c, value_[e] + direction * step);
    if (flip) {
      at_upper_[e] = direction > 0;
      value_[e] = at_upper_[e] ? upper_[e] : lower_[e];
      ++pivots_;
    } else {
      const std::size_t leaving = basis_[chosen->row];
      pivot(chosen->row, c);
      at_upper_[leaving] = chosen->to_upper;
      value_[leaving] = chosen->to_upper ? upper_[leaving] : lower_[leaving];
    }

    if (step <= kDegenerateStep) {
      if (++stalled >= options_.stall_limit) bland = true;
    } else {
      stalled = 0;
      bland = false;
    }
  }
}

Simplex::Outcome Simplex::run_dual() {
  if (!dual_feasible()) return Outcome::kFallback;
  perturb_costs();
  const Outcome outcome = run_dual_loop();
  clear_perturbation();
  return outcome;
}

Simplex::Outcome Simplex::run_dual_loop() {
  const double ftol = options_.feasibility_tolerance;
  const double ptol = options_.pivot_tolerance;
  // The dual has no anti-cycling rule of its own; after stall_limit pivots without a drop in
  // the objective the composite primal (which does) takes over from the current basis.
  double last_objective = kInf;
  std::size_t stalled = 0;
  for (std::size_t since_refresh = 0;; ++since_refresh) {
    if (pivots_ >= options_.max_pivots) return Outcome::kLimit;
    if (since_refresh == kRefreshInterval) {
      recompute_basic_values();
      recompute_reduced_costs();
      since_refresh = 0;
      if (!dual_feasible()) return Outcome::kFallback;
    }
    double objective = 0.0;
    for (std::size_t j = 0; j < value_.size(); ++j) objective += cost(j) * value_[j];
    if (objective < last_objective - 1e-12 * (1.0 + std::fabs(objective))) {
      last_objective = objective;
      stalled = 0;
    } else if (++stalled >= options_.stall_limit) {
      return Outcome::kFallback;
    }

    long leave = -1;
    double worst = 0.0;
    for (std::size_t r = 0; r < basis_.size(); ++r) {
      const std::size_t b = basis_[r];
      const double violation = std::max(lower_[b] - value_[b], value_[b] - upper_[b]);
      if (violation > ftol && violation > worst) {
        worst = violation;
        leave = static_cast<long>(r);
      }
    }
    if (leave < 0) return Outcome::kOptimal;
    const std::size_t r = static_cast<std::size_t>(leave);
    const std::size_t b = basis_[r];
    const bool raise = value_[b] < lower_[b];
    const double target = raise ? lower_[b] : upper_[b];

    const double* pr = row(r);
    long enter = -1;
    double best_ratio = kInf, best_magnitude = 0.0;
    for (std::size_t c = 0; c < n_; ++c) {
      const std::size_t e = nonbasic_[c];
      if (lower_[e] == upper_[e]) continue;
      const double t = pr[c];
      if (std::fabs(t) <= ptol) continue;
      const bool increases = !at_upper_[e];
      if (raise != (increases == (t > 0))) continue;
      const double dual = std::max(0.0, increases ? -reduced_[c] : reduced_[c]);
      const double ratio = dual / std::fabs(t);
      if (ratio < best_ratio - 1e-12 ||
          (ratio <= best_ratio + 1e-12 && std::fabs(t) > best_magnitude)) {
        best_ratio = ratio;
        best_magnitude = std::fabs(t);
        enter = static_cast<long>(c);
      }
    }
    if (enter < 0) return Outcome::kInfeasible;
    const std::size_t c = static_cast<std::size_t>(enter);
    const std::size_t e = nonbasic_[c];
    move_nonbasic(c, value_[e] + (target - value_[b]) / pr[c]);
    pivot(r, c);
    at_upper_[b] = !raise;
    value_[b] = target;
  }
}

LpSolution Simplex::finish(Status status) const {
  LpSolution solution;
  solution.status = status;
  solution.values.assign(value_.begin(), value_.begin() + static_cast<std::ptrdiff_t>(n_));
  for (std::size_t j = 0; j < n_; ++j) solution.objective_value += cost_[j] * value_[j];
  solution.pivots = pivots_;
  return solution;
}

LpSolution Simplex::solve() {
  constexpr int kMaxRefactors = 3;
  for (int attempt = 0;; ++attempt) {
    recompute_basic_values();
    recompute_reduced_costs();
    Outcome outcome = basis_feasible() ? Outcome::kFallback : run_dual();
    if (outcome == Outcome::kFallback || outcome == Outcome::kOptimal) outcome = run_primal();
    switch (outcome) {
      case Outcome::kInfeasible: return finish(Status::kInfeasible);
      case Outcome::kUnbounded: return finish(Status::kUnbounded);
      case Outcome::kLimit: return finish(Status::kIterationLimit);
      default: break;
    }
    recompute_basic_values();
    if (max_residual() <= 1e-10 && basis_feasible()) return finish(Status::kOptimal);
    if (attempt == kMaxRefactors) return finish(Status::kIterationLimit);
    refactor();
  }
}

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options) {
  Simplex simplex(lp, options);
  return simplex.solve();
}

namespace {

struct Node {
  Simplex relaxation;
  std::vector<char> tied_to_shared;  // per tied variable: already constrained to equal c
};

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

}  // namespace

MipSolution solve_mip_three_valued(const LinearProgram& lp, std::span<const std::size_t> tied_vars,
                                   std::size_t shared_value_var,
                                   std::span<const std::pair<std::size_t, std::size_t>> one_or_zero,
                                   const MipOptions& options) {
  lp.validate();
  const std::size_t n = lp.num_variables();
  if (shared_value_var >= n) throw InvalidInput("shared value variable is out of range");
  for (std::size_t v : tied_vars) {
    if (v >= n || v == shared_value_var) throw InvalidInput("invalid tied variable");
  }
  for (const auto& [a, b] : one_or_zero) {
    if (a >= n || b >= n) throw InvalidInput("invalid disjunction variable");
  }
  const double tol = options.integrality_tolerance;

  MipSolution best;
  best.status = Status::kInfeasible;
  double incumbent = -kInf;
  std::size_t pivots = 0;

  std::vector<Node> stack;
  stack.push_back(Node{Simplex(lp, options.simplex), std::vector<char>(tied_vars.size(), 0)});
  std::size_t nodes = 0;
  while (!stack.empty()) {
    Node node = std::move(stack.back());
    stack.pop_back();
    if (++nodes > options.max_nodes) {
      best.status = Status::kIterationLimit;
      break;
    }
    LpSolution relaxed = node.relaxation.solve();
    pivots += relaxed.pivots;
    if (relaxed.status == Status::kInfeasible) continue;
    if (relaxed.status != Status::kOptimal) {
      best.status = relaxed.status;
      break;
    }
    if (relaxed.objective_value <= incumbent + tol) continue;
    const std::vector<double>& x = relaxed.values;
    const double c = x[shared_value_var];

    bool branched = false;
    for (const auto& [a, b] : one_or_zero) {
      if (x[a] < 1.0 - tol && x[b] > tol) {
        Node fix_zero{node.relaxation, node.tied_to_shared};
        fix_zero.relaxation.set_bounds(b, {0.0, 0.0});
        node.relaxation.set_bounds(a, {1.0, 1.0});
        stack.push_back(std::move(fix_zero));
        stack.push_back(std::move(node));
        branched = true;
        break;
      }
    }
    if (branched) continue;

    for (std::size_t t = 0; t < tied_vars.size(); ++t) {
      const std::size_t v = tied_vars[t];
      if (node.tied_to_shared[t] || near(x[v], 0.0, tol) || near(x[v], 1.0, tol) ||
          near(x[v], c, tol)) {
        continue;
      }
      Node zero{node.relaxation, node.tied_to_shared};
      zero.relaxation.set_bounds(v, {0.0, 0.0});
      Node one{node.relaxation, node.tied_to_shared};
      one.relaxation.set_bounds(v, {1.0, 1.0});
      node.tied_to_shared[t] = 1;
      const std::pair<std::size_t, double> link[] = {{v, 1.0}, {shared_value_var, -1.0}};
      node.relaxation.add_constraint(link, Relation::kEqual, 0.0);
      stack.push_back(std::move(zero));
      stack.push_back(std::move(one));
      stack.push_back(std::move(node));
      branched = true;
      break;
    }
    if (branched) continue;

    incumbent = relaxed.objective_value;
    static_cast<LpSolution&>(best) = relaxed;
  }
  best.nodes = nodes;
  best.pivots = pivots;
  return best;
}

}  // namespace merit::lp
