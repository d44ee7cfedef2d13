#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace merit::lp {

enum class Relation { kLessEqual, kEqual, kGreaterEqual };
enum class Status { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

const char* to_string(Status status);

struct Bounds {
  double lower = 0.0;
  double upper = 0.0;
};

struct Constraint {
  std::vector<double> coefficients;  // dense, one entry per variable
  Relation relation = Relation::kLessEqual;
  double rhs = 0.0;
};

// maximize objective . x  subject to constraints and lower <= x <= upper.
struct LinearProgram {
  std::vector<double> objective;
  std::vector<Bounds> bounds;
  std::vector<Constraint> constraints;

  std::size_t num_variables() const { return objective.size(); }
  // Throws InvalidInput on mismatched dimensions, lo > hi or non-finite variable bounds.
  void validate() const;
};

struct LpSolution {
  Status status = Status::kIterationLimit;
  std::vector<double> values;
  double objective_value = 0.0;
  std::size_t pivots = 0;
};

struct SimplexOptions {
  std::size_t max_pivots = 1'000'000;
  std::size_t stall_limit = 200;  // degenerate pivots before switching to Bland's rule
  double feasibility_tolerance = 1e-8;
  double optimality_tolerance = 1e-9;
  double pivot_tolerance = 1e-9;
};

// Bounded-variable simplex on a condensed tableau that keeps its basis between calls.
// Every row i gets an activity variable s_i = a_i . x whose bounds encode the relation,
// so rows can be appended after a solve and the next solve() starts from the old basis:
// dual simplex when the basis is still dual feasible, composite primal otherwise.
class Simplex {
 public:
  explicit Simplex(const LinearProgram& lp, SimplexOptions options = {});

  std::size_t num_variables() const { return n_; }
  std::size_t num_constraints() const { return basis_.size(); }

  void add_constraint(const Constraint& row);
  // Sparse form: (variable, coefficient) pairs.
  void add_constraint(std::span<const std::pair<std::size_t, double>> terms, Relation relation,
                      double rhs);
  void set_bounds(std::size_t var, Bounds bounds);
  // True when row i holds with equality at the current point (its activity is nonbasic or
  // sits at a bound).
  bool is_binding(std::size_t i, double tol = 1e-9) const;
  // Drops the listed rows whose activity variable is basic; other listed rows stay.
  // Returns the new index of every old row, -1 for dropped ones. Remaining rows keep
  // their relative order and the basis stays valid.
  std::vector<long> remove_constraints(std::span<const std::size_t> rows);

  LpSolution solve();

 private:
  struct SparseRow {
    std::vector<std::pair<std::size_t, double>> terms;
  };

  double* row(std::size_t r) { return tableau_.data() + r * n_; }
  const double* row(std::size_t r) const { return tableau_.data() + r * n_; }

  void append_row(const SparseRow& sparse, Relation relation, double rhs);
  void pivot(std::size_t r, std::size_t c);
  void move_nonbasic(std::size_t c, double new_value);
  void recompute_basic_values();
  void recompute_reduced_costs();
  bool dual_feasible() const;
  bool basis_feasible() const;
  double max_residual() const;
  void refactor();
  double cost(std::size_t var) const { return (var < n_ ? cost_[var] : 0.0) + shift_[var]; }
  void perturb_costs();
  void clear_perturbation();

  enum class Outcome { kOptimal, kInfeasible, kUnbounded, kLimit, kFallback };
  Outcome run_primal();
  Outcome run_dual();
  Outcome run_dual_loop();
  LpSolution finish(Status status) const;

  SimplexOptions options_;
  std::size_t n_ = 0;             // structural variables (= tableau columns)
  std::vector<double> cost_;      // structural objective
  std::vector<double> shift_;     // per variable cost perturbation, nonzero only inside run_dual
  std::vector<double> lower_;     // per variable: structural then activity
  std::vector<double> upper_;
  std::vector<double> value_;
  std::vector<char> at_upper_;    // nonbasic resting bound
  std::vector<long> basic_row_;   // -1 if nonbasic
  std::vector<long> nonbasic_col_;  // -1 if basic
  std::vector<std::size_t> basis_;     // var per row
  std::vector<std::size_t> nonbasic_;  // var per column
  std::vector<double> tableau_;   // rows x n_: x_basis[r] = sum_c T[r][c] x_nonbasic[c]
  std::vector<double> reduced_;   // objective = sum_c reduced_[c] x_nonbasic[c] + const
  std::vector<SparseRow> rows_;   // original constraint rows
  std::size_t pivots_ = 0;
};

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options = {});

struct MipOptions {
  std::size_t max_nodes = 1'000'000;
  double integrality_tolerance = 1e-9;
  SimplexOptions simplex;
};

struct MipSolution : LpSolution {
  std::size_t nodes = 0;
};

// Maximizes `lp` with every variable in `tied_vars` restricted to {0, 1, c}, where c is the
// value of `shared_value_var`. Each pair (a, b) in `one_or_zero` additionally requires
// x_a = 1 or x_b = 0. Exact depth-first branch and bound on LP relaxations.
MipSolution solve_mip_three_valued(const LinearProgram& lp, std::span<const std::size_t> tied_vars,
                                   std::size_t shared_value_var,
                                   std::span<const std::pair<std::size_t, std::size_t>> one_or_zero = {},
                                   const MipOptions& options = {});

}  // namespace merit::lp
