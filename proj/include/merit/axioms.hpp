#pragma once

#include <span>
#include <utility>
#include <vector>

#include "merit/rules.hpp"

namespace merit {

constexpr double kAxiomTolerance = 1e-9;

struct MonotonicityViolation {
  std::size_t candidate = 0;
  std::size_t budget = 0;  // p at budget + 1 is below p at budget
  double drop = 0.0;
};

// Runs the rule at budgets 1..k_max.
std::vector<MonotonicityViolation> check_budget_monotonicity(const Rule& rule, const Instance& instance,
                                                             std::size_t k_max);
// by_budget[i] holds the marginals for budget i + 1.
std::vector<MonotonicityViolation> check_budget_monotonicity(std::span<const Marginals> by_budget);

// Maps every interval (l, e, u) on [0, 1] to (1 - u, 1 - e, 1 - l).
Instance reversed(const Instance& instance);

struct ReversalReport {
  bool pass = false;
  Marginals original;
  Marginals flipped;
};

// n = 2, k = 1 only.
ReversalReport check_reversal_symmetry(const Rule& rule, const Instance& pair);

bool is_uniform(std::span<const double> p, std::size_t k, double tol = kAxiomTolerance);
bool is_deterministic(std::span<const double> p, double tol = kAxiomTolerance);
bool all_pairs_overlap(const Instance& instance);
// Exactly one candidate fails to overlap some other candidate; all other pairs overlap.
bool single_outlier(const Instance& instance);

// Candidates 1..k on [0, 2] with estimate 1, the rest on [0, 1 - eps]; the perturbed copy
// moves candidate k to [0, 2 - 2 eps] with estimate 1 - eps.
std::pair<Instance, Instance> instability_fixture(std::size_t n, std::size_t k, double eps);

struct InstabilityReport {
  Marginals original;
  Marginals perturbed;
  bool flip = false;  // uniform on one input and deterministic on the other
  // Uniform output exactly when all pairs overlap, and never deterministic with a single
  // outlier, checked on both inputs.
  bool guards_hold = false;
};

InstabilityReport check_not_maximally_unstable(const Rule& rule, std::size_t n, std::size_t k,
                                               double eps);

// Guard check on an arbitrary instance with 2 <= k <= n - 2.
bool structural_guards_hold(std::span<const double> p, const Instance& instance);

}  // namespace merit
