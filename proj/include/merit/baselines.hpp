#pragma once

#include <optional>
#include <string>

#include "merit/model.hpp"

namespace merit {

struct SelectionRuleOutput {
  Marginals p;
  IndexSet accept;
  IndexSet lottery;
  IndexSet reject;
  std::optional<double> lottery_probability;
  bool under_budget = false;  // threshold rule kept fewer than k candidates
};

// Splits p into accept (p = 1), reject (p = 0) and lottery tiers.
SelectionRuleOutput tiers_from_marginals(Marginals p, double tol = 1e-9);

// The k largest estimates; ties go to the smaller position.
SelectionRuleOutput deterministic_topk(const Instance& instance);

struct ThresholdPolicy {
  enum class Kind { kFixed, kKthEstimate, kKthLowerBound };
  Kind kind = Kind::kKthEstimate;
  double value = 0.0;  // used by kFixed

  static ThresholdPolicy fixed(double threshold) { return {Kind::kFixed, threshold}; }
  static ThresholdPolicy kth_estimate() { return {Kind::kKthEstimate, 0.0}; }
  static ThresholdPolicy kth_lower_bound() { return {Kind::kKthLowerBound, 0.0}; }
};

// Rejects intervals entirely below the threshold and lotteries uniformly over the rest.
// Keeps all survivors and sets under_budget when fewer than k survive.
SelectionRuleOutput randomize_above_threshold(const Instance& instance,
                                              ThresholdPolicy policy = ThresholdPolicy::kth_estimate());

// Funding line at the k-th largest estimate: accept intervals entirely above it, reject those
// entirely below it, and lottery the remaining budget over intervals containing it.
SelectionRuleOutput swiss_nsf(const Instance& instance);

}  // namespace merit
