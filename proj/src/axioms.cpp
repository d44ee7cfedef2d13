#include "merit/axioms.hpp"

#include <cmath>
#include <string>

#include "merit/error.hpp"

namespace merit {

std::vector<MonotonicityViolation> check_budget_monotonicity(std::span<const Marginals> by_budget) {
  std::vector<MonotonicityViolation> found;
  for (std::size_t b = 0; b + 1 < by_budget.size(); ++b) {
    const Marginals& now = by_budget[b];
    const Marginals& next = by_budget[b + 1];
    for (std::size_t i = 0; i < now.size(); ++i) {
      if (next[i] < now[i] - kAxiomTolerance) found.push_back({i, b + 1, now[i] - next[i]});
    }
  }
  return found;
}

std::vector<MonotonicityViolation> check_budget_monotonicity(const Rule& rule, const Instance& instance,
                                                             std::size_t k_max) {
  std::vector<Marginals> by_budget;
  for (std::size_t k = 1; k <= k_max; ++k) by_budget.push_back(rule(instance.with_budget(k)));
  return check_budget_monotonicity(by_budget);
}

Instance reversed(const Instance& instance) {
  std::vector<Interval> flipped;
  for (const Interval& iv : instance.intervals()) {
    Interval r{iv.id, 1.0 - iv.upper, 1.0 - iv.lower, std::nullopt};
    if (iv.estimate) r.estimate = 1.0 - *iv.estimate;
    flipped.push_back(std::move(r));
  }
  return Instance(std::move(flipped), instance.budget(), instance.epsilon());
}

ReversalReport check_reversal_symmetry(const Rule& rule, const Instance& pair) {
  if (pair.size() != 2 || pair.budget() != 1) {
    throw PreconditionError("reversal symmetry is defined for two candidates and k = 1");
  }
  ReversalReport report;
  report.original = rule(pair);
  report.flipped = rule(reversed(pair));
  report.pass = std::fabs(report.original[0] - report.flipped[1]) <= kAxiomTolerance &&
                std::fabs(report.original[1] - report.flipped[0]) <= kAxiomTolerance;
  return report;
}

bool is_uniform(std::span<const double> p, std::size_t k, double tol) {
  const double share = p.empty() ? 0.0 : static_cast<double>(k) / static_cast<double>(p.size());
  for (double x : p) {
    if (std::fabs(x - share) > tol) return false;
  }
  return true;
}

bool is_deterministic(std::span<const double> p, double tol) {
  for (double x : p) {
    if (x > tol && x < 1.0 - tol) return false;
  }
  return true;
}

bool all_pairs_overlap(const Instance& instance) {
  for (std::size_t a = 0; a < instance.size(); ++a) {
    for (std::size_t b = 0; b < instance.size(); ++b) {
      if (instance.dominates(a, b)) return false;
    }
  }
  return true;
}

bool single_outlier(const Instance& instance) {
  const std::size_t n = instance.size();
  std::vector<std::size_t> comparable(n, 0);
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (instance.dominates(a, b)) {
        ++comparable[a];
        ++comparable[b];
        ++pairs;
      }
    }
  }
  if (pairs == 0) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (comparable[i] == pairs) return true;
  }
  return false;
}

std::pair<Instance, Instance> instability_fixture(std::size_t n, std::size_t k, double eps) {
  if (k < 2 || k + 2 > n || !(eps > 0.0) || eps >= 1.0) {
    throw PreconditionError("instability fixture needs 2 <= k <= n - 2 and 0 < eps < 1");
  }
  std::vector<Interval> base;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = std::to_string(i + 1);
    if (i < k) {
      base.push_back({id, 0.0, 2.0, 1.0});
    } else {
      base.push_back({id, 0.0, 1.0 - eps, (1.0 - eps) / 2.0});
    }
  }
  std::vector<Interval> shifted = base;
  shifted[k - 1] = {std::to_string(k), 0.0, 2.0 - 2.0 * eps, 1.0 - eps};
  return {Instance(std::move(base), k), Instance(std::move(shifted), k)};
}

bool structural_guards_hold(std::span<const double> p, const Instance& instance) {
  const std::size_t k = instance.budget();
  if (is_uniform(p, k) != all_pairs_overlap(instance)) return false;
  if (k >= 2 && k + 2 <= instance.size() && single_outlier(instance) && is_deterministic(p)) {
    return false;
  }
  return true;
}

InstabilityReport check_not_maximally_unstable(const Rule& rule, std::size_t n, std::size_t k,
                                               double eps) {
  const auto [base, shifted] = instability_fixture(n, k, eps);
  InstabilityReport report;
  report.original = rule(base);
  report.perturbed = rule(shifted);
  report.flip = (is_uniform(report.original, k) && is_deterministic(report.perturbed)) ||
                (is_deterministic(report.original) && is_uniform(report.perturbed, k));
  report.guards_hold = structural_guards_hold(report.original, base) &&
                       structural_guards_hold(report.perturbed, shifted);
  return report;
}

}  // namespace merit
