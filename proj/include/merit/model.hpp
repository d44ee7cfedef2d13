#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace merit {

struct Interval {
  std::string id;
  double lower = 0.0;
  double upper = 0.0;
  std::optional<double> estimate;
};

// Selection probabilities indexed by candidate position.
using Marginals = std::vector<double>;
using IndexSet = std::vector<std::size_t>;

// n intervals plus a budget k. `epsilon` widens the overlap relation: a is strictly
// above b iff lower(a) > upper(b) + epsilon, so touching intervals overlap.
class Instance {
 public:
  Instance() = default;
  Instance(std::vector<Interval> intervals, std::size_t budget, double epsilon = 0.0);

  std::size_t size() const { return intervals_.size(); }
  std::size_t budget() const { return budget_; }
  double epsilon() const { return epsilon_; }
  const Interval& operator[](std::size_t i) const { return intervals_[i]; }
  const std::vector<Interval>& intervals() const { return intervals_; }

  double lower(std::size_t i) const { return intervals_[i].lower; }
  double upper(std::size_t i) const { return intervals_[i].upper; }
  bool dominates(std::size_t a, std::size_t b) const {
    return intervals_[a].lower > intervals_[b].upper + epsilon_;
  }
  bool has_estimates() const;

  Instance with_budget(std::size_t budget) const;
  // Sub-instance over `indices` (in that order) with a new budget.
  Instance subset(std::span<const std::size_t> indices, std::size_t budget) const;

 private:
  std::vector<Interval> intervals_;
  std::size_t budget_ = 0;
  double epsilon_ = 0.0;
};

struct OrderCounts {
  std::vector<std::size_t> above;  // A(i): intervals strictly above i
  std::vector<std::size_t> below;  // B(i): intervals strictly below i
};

// O(n log n) via sorted endpoint arrays.
OrderCounts order_counts(const Instance& instance);

// Every size-k set closed under "is strictly above". Exponential; n <= 20.
std::vector<IndexSet> enumerate_feasible_topk(const Instance& instance);

// Minimum over feasible top-k sets T of sum_{j in T} p_j.
double worst_case_utility(std::span<const double> p, const Instance& instance);
// Same, divided by k (0 when k = 0).
double normalized_worst_case_utility(std::span<const double> p, const Instance& instance);

constexpr double kMarginalTolerance = 1e-9;

// Throws InvalidInput unless 0 <= p_i <= 1 and sum p = k within kMarginalTolerance.
void check_marginals(std::span<const double> p, std::size_t k);

// Clamps p into [lo_i, hi_i] and spreads any resulting deficit or excess over entries
// with room so that sum p = k. Used to remove LP round-off.
void repair_marginals(std::vector<double>& p, std::span<const double> lo, std::span<const double> hi,
                      double k);

}  // namespace merit
