#include "merit/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_set>

#include "merit/error.hpp"
#include "merit/oracle.hpp"

namespace merit {

Instance::Instance(std::vector<Interval> intervals, std::size_t budget, double epsilon)
    : intervals_(std::move(intervals)), budget_(budget), epsilon_(epsilon) {
  if (!(epsilon_ >= 0.0) || !std::isfinite(epsilon_)) {
    throw InvalidInput("epsilon must be a finite non-negative number");
  }
  if (budget_ > intervals_.size()) {
    throw InvalidInput("budget " + std::to_string(budget_) + " exceeds the number of candidates " +
                       std::to_string(intervals_.size()));
  }
  std::unordered_set<std::string> seen;
  for (const Interval& iv : intervals_) {
    if (!std::isfinite(iv.lower) || !std::isfinite(iv.upper) || iv.lower > iv.upper) {
      throw InvalidInput("candidate '" + iv.id + "' has an invalid interval");
    }
    if (iv.estimate && (!std::isfinite(*iv.estimate) || *iv.estimate < iv.lower ||
                        *iv.estimate > iv.upper)) {
      throw InvalidInput("candidate '" + iv.id + "' has an estimate outside its interval");
    }
    if (!seen.insert(iv.id).second) throw InvalidInput("duplicate candidate id '" + iv.id + "'");
  }
}

bool Instance::has_estimates() const {
  return std::all_of(intervals_.begin(), intervals_.end(),
                     [](const Interval& iv) { return iv.estimate.has_value(); });
}

Instance Instance::with_budget(std::size_t budget) const {
  Instance copy = *this;
  if (budget > size()) throw InvalidInput("budget exceeds the number of candidates");
  copy.budget_ = budget;
  return copy;
}

Instance Instance::subset(std::span<const std::size_t> indices, std::size_t budget) const {
  std::vector<Interval> picked;
  picked.reserve(indices.size());
  for (std::size_t i : indices) picked.push_back(intervals_.at(i));
  return Instance(std::move(picked), budget, epsilon_);
}

OrderCounts order_counts(const Instance& instance) {
  const std::size_t n = instance.size();
  std::vector<double> lowers(n), shifted_uppers(n);
  for (std::size_t i = 0; i < n; ++i) {
    lowers[i] = instance.lower(i);
    shifted_uppers[i] = instance.upper(i) + instance.epsilon();
  }
  std::sort(lowers.begin(), lowers.end());
  std::sort(shifted_uppers.begin(), shifted_uppers.end());

  OrderCounts counts{std::vector<std::size_t>(n), std::vector<std::size_t>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const double threshold = instance.upper(i) + instance.epsilon();
    counts.above[i] =
        n - static_cast<std::size_t>(std::upper_bound(lowers.begin(), lowers.end(), threshold) -
                                     lowers.begin());
    counts.below[i] = static_cast<std::size_t>(
        std::lower_bound(shifted_uppers.begin(), shifted_uppers.end(), instance.lower(i)) -
        shifted_uppers.begin());
  }
  return counts;
}

std::vector<IndexSet> enumerate_feasible_topk(const Instance& instance) {
  const std::size_t n = instance.size();
  const std::size_t k = instance.budget();
  if (n > 20) throw InvalidInput("feasible-set enumeration is limited to 20 candidates");

  // dominators[j]: bitmask of candidates strictly above j.
  std::vector<std::uint32_t> dominators(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t r = 0; r < n; ++r) {
      if (instance.dominates(r, j)) dominators[j] |= 1u << r;
    }
  }

  std::vector<IndexSet> result;
  std::vector<char> chosen(n, 0);
  std::fill(chosen.begin(), chosen.begin() + static_cast<std::ptrdiff_t>(k), 1);
  // prev_permutation over a sorted-descending mask walks subsets in lexicographic order.
  do {
    std::uint32_t mask = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (chosen[i]) mask |= 1u << i;
    }
    bool closed = true;
    for (std::size_t j = 0; j < n && closed; ++j) {
      if (chosen[j] && (dominators[j] & ~mask) != 0) closed = false;
    }
    if (closed) {
      IndexSet members;
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i]) members.push_back(i);
      }
      result.push_back(std::move(members));
    }
  } while (std::prev_permutation(chosen.begin(), chosen.end()));
  return result;
}

double worst_case_utility(std::span<const double> p, const Instance& instance) {
  return min_feasible_value(p, instance).value;
}

double normalized_worst_case_utility(std::span<const double> p, const Instance& instance) {
  if (instance.budget() == 0) return 0.0;
  return worst_case_utility(p, instance) / static_cast<double>(instance.budget());
}

void check_marginals(std::span<const double> p, std::size_t k) {
  long double total = 0.0L;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= -kMarginalTolerance && p[i] <= 1.0 + kMarginalTolerance)) {
      throw InvalidInput("marginal " + std::to_string(i) + " is outside [0, 1]");
    }
    total += p[i];
  }
  if (std::fabs(static_cast<double>(total) - static_cast<double>(k)) > kMarginalTolerance) {
    throw InvalidInput("marginals sum to " + std::to_string(static_cast<double>(total)) +
                       " instead of " + std::to_string(k));
  }
}

void repair_marginals(std::vector<double>& p, std::span<const double> lo, std::span<const double> hi,
                      double k) {
  long double total = 0.0L;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::clamp(p[i], lo[i], hi[i]);
    total += p[i];
  }
  const double gap = static_cast<double>(static_cast<long double>(k) - total);
  if (gap == 0.0) return;
  long double room = 0.0L;
  for (std::size_t i = 0; i < p.size(); ++i) room += gap > 0 ? hi[i] - p[i] : p[i] - lo[i];
  if (room <= 0.0L) return;
  const double share = static_cast<double>(static_cast<long double>(gap) / room);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double slack = gap > 0 ? hi[i] - p[i] : p[i] - lo[i];
    p[i] = std::clamp(p[i] + share * slack, lo[i], hi[i]);
  }
}

}  // namespace merit
