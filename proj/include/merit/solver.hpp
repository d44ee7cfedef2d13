#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "merit/lp.hpp"
#include "merit/model.hpp"
#include "merit/oracle.hpp"

namespace merit {

// Cover of points by chains that are monotone in the (A, B) product order:
// along a chain A never decreases and B never increases.
struct ChainPartition {
  std::vector<IndexSet> chains;
  std::size_t width() const { return chains.size(); }
};

// Greedy minimum chain cover in O(n log n).
ChainPartition chain_cover(const OrderCounts& counts);

// Covering pairs (hi, lo) of the (A, B) product order: A(hi) <= A(lo), B(hi) >= B(lo), and
// nothing lies strictly between. Points with equal counts cover each other. O(n^2).
std::vector<std::pair<std::size_t, std::size_t>> dominance_cover(const OrderCounts& counts);

struct PruneResult {
  IndexSet accepted;   // in every feasible top-k set
  IndexSet rejected;   // in none
  IndexSet remaining;  // positions of the reduced instance, in original order
  std::size_t reduced_budget = 0;
};

// Fixes candidates that are always or never in the top k, repeating on the reduced
// instance until nothing changes.
PruneResult prune(const Instance& instance);

// Candidates with identical (A, B) counts, ordered by increasing A then decreasing B.
std::vector<IndexSet> symmetry_groups(const Instance& instance);

struct SolveOptions {
  std::size_t max_iters = 500;
  double tolerance = kViolationTolerance;
  bool prune = true;
  bool group_symmetric = true;
  // p_hi >= p_lo for every covering pair of the (A, B) order among groups. Some optimum
  // satisfies all of them at once, and they cut the iteration count sharply compared with
  // links along a chain cover alone. Skipped when nonzero floors are present.
  bool monotone_rows = true;
  // Besides the LP point, also separate at points between it and the best point found so
  // far, and stop once that point's exact worst case is within tolerance of the LP bound.
  bool stabilize = true;
  lp::SimplexOptions simplex;
  lp::MipOptions mip;
};

struct SolveReport {
  Marginals p;
  double value = 0.0;     // worst_case_utility(p)
  double bound = 0.0;     // final LP objective (an upper bound on the optimum)
  std::size_t iterations = 0;
  std::size_t cuts_added = 0;
  std::size_t lp_rows = 0;
  std::size_t chain_width = 0;
  IndexSet pruned_accept;
  IndexSet pruned_reject;
  std::vector<IndexSet> symmetry_groups;
};

// Maximin-optimal marginals by the cutting-plane method. Throws SolverFailure when
// max_iters is exhausted or the LP backend fails.
SolveReport solve_ex_ante(const Instance& instance, const SolveOptions& options = {});

// p^(1), ..., p^(k): each solved with p^(i) >= p^(i-1) and then made ex-post valid.
std::vector<Marginals> solve_monotone_sequence(const Instance& instance,
                                               const SolveOptions& options = {});

struct UniformReport : SolveReport {
  IndexSet accept;
  IndexSet lottery;
  IndexSet reject;
  std::optional<double> lottery_probability;
  std::size_t nodes = 0;
};

// Best worst-case value among ex-post valid rules whose marginals take only the values
// 0, 1 and one shared c. Branch and bound over every candidate; meant for small n.
UniformReport solve_uniform(const Instance& instance, const SolveOptions& options = {});

}  // namespace merit
