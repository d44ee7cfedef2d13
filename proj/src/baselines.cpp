#include "merit/baselines.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "merit/error.hpp"

namespace merit {
namespace {

void require_estimates(const Instance& instance, const char* rule) {
  if (!instance.has_estimates()) {
    throw PreconditionError(std::string(rule) + " needs a point estimate for every candidate");
  }
}

// k-th largest of values (k >= 1).
double kth_largest(std::vector<double> values, std::size_t k) {
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k - 1), values.end(),
                   std::greater<>());
  return values[k - 1];
}

std::vector<double> estimates(const Instance& instance) {
  std::vector<double> out;
  for (const Interval& iv : instance.intervals()) out.push_back(*iv.estimate);
  return out;
}

}  // namespace

SelectionRuleOutput tiers_from_marginals(Marginals p, double tol) {
  SelectionRuleOutput out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] >= 1.0 - tol) {
      out.accept.push_back(i);
    } else if (p[i] <= tol) {
      out.reject.push_back(i);
    } else {
      out.lottery.push_back(i);
    }
  }
  if (!out.lottery.empty()) {
    const double first = p[out.lottery.front()];
    const bool uniform = std::all_of(out.lottery.begin(), out.lottery.end(),
                                     [&](std::size_t i) { return std::abs(p[i] - first) <= tol; });
    if (uniform) out.lottery_probability = first;
  }
  out.p = std::move(p);
  return out;
}

SelectionRuleOutput deterministic_topk(const Instance& instance) {
  require_estimates(instance, "deterministic top-k");
  std::vector<std::size_t> order(instance.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return *instance[a].estimate > *instance[b].estimate;
  });
  Marginals p(instance.size(), 0.0);
  for (std::size_t t = 0; t < instance.budget(); ++t) p[order[t]] = 1.0;
  return tiers_from_marginals(std::move(p));
}

SelectionRuleOutput randomize_above_threshold(const Instance& instance, ThresholdPolicy policy) {
  const std::size_t n = instance.size();
  const std::size_t k = instance.budget();
  double threshold = policy.value;
  if (policy.kind == ThresholdPolicy::Kind::kKthEstimate) {
    require_estimates(instance, "randomize-above-threshold with the k-th estimate");
    if (k == 0) return tiers_from_marginals(Marginals(n, 0.0));
    threshold = kth_largest(estimates(instance), k);
  } else if (policy.kind == ThresholdPolicy::Kind::kKthLowerBound) {
    if (k == 0) return tiers_from_marginals(Marginals(n, 0.0));
    std::vector<double> lowers;
    for (const Interval& iv : instance.intervals()) lowers.push_back(iv.lower);
    threshold = kth_largest(std::move(lowers), k);
  }

  IndexSet survivors;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(instance.upper(i) < threshold)) survivors.push_back(i);
  }
  Marginals p(n, 0.0);
  const bool under_budget = survivors.size() < k;
  const double share =
      under_budget ? 1.0 : static_cast<double>(k) / static_cast<double>(survivors.size());
  for (std::size_t i : survivors) p[i] = share;
  SelectionRuleOutput out = tiers_from_marginals(std::move(p));
  out.under_budget = under_budget;
  return out;
}

SelectionRuleOutput swiss_nsf(const Instance& instance) {
  require_estimates(instance, "the Swiss NSF rule");
  const std::size_t n = instance.size();
  const std::size_t k = instance.budget();
  if (k == 0) return tiers_from_marginals(Marginals(n, 0.0));
  const double line = kth_largest(estimates(instance), k);
  IndexSet above, straddle;
  for (std::size_t i = 0; i < n; ++i) {
    if (instance.lower(i) > line) {
      above.push_back(i);
    } else if (!(instance.upper(i) < line)) {
      straddle.push_back(i);
    }
  }
  if (above.size() > k || k - above.size() > straddle.size()) {
    throw PreconditionError("estimates are inconsistent with their intervals around the funding line");
  }
  Marginals p(n, 0.0);
  for (std::size_t i : above) p[i] = 1.0;
  // A lottery share of 1 or 0 lands the straddling proposals in the accept or reject tier.
  if (!straddle.empty()) {
    const double share = static_cast<double>(k - above.size()) / static_cast<double>(straddle.size());
    for (std::size_t i : straddle) p[i] = share;
  }
  return tiers_from_marginals(std::move(p));
}

}  // namespace merit
