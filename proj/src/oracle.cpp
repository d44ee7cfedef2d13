#include "merit/oracle.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "merit/error.hpp"

namespace merit {
namespace {

// Visits, for each possible first-excluded position i in [0, k] of the descending-lower
// order, the cheapest feasible top-k set whose first i members are that order's prefix.
// `visit(value, members_builder)` receives the set's value and a callable producing it.
template <typename Visit>
void scan_families(std::span<const double> p, const Instance& instance, Visit&& visit) {
  const std::size_t n = instance.size();
  const std::size_t k = instance.budget();
  if (p.size() != n) throw InvalidInput("marginal vector length does not match the instance");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (instance.lower(a) != instance.lower(b)) return instance.lower(a) > instance.lower(b);
    if (instance.upper(a) != instance.upper(b)) return instance.upper(a) > instance.upper(b);
    return a < b;
  });
  // Positions in `order`, sorted once by increasing p.
  std::vector<std::size_t> by_p(n);
  std::iota(by_p.begin(), by_p.end(), std::size_t{0});
  std::sort(by_p.begin(), by_p.end(), [&](std::size_t a, std::size_t b) {
    const double pa = p[order[a]], pb = p[order[b]];
    return pa != pb ? pa < pb : a < b;
  });

  double prefix = 0.0;
  std::vector<std::size_t> picked;
  for (std::size_t i = 0; i <= k; ++i) {
    if (i > 0) prefix += p[order[i - 1]];
    const std::size_t need = k - i;
    picked.clear();
    double tail = 0.0;
    if (need > 0) {
      const std::size_t pivot = order[i];
      for (std::size_t q : by_p) {
        if (q <= i || instance.dominates(pivot, order[q])) continue;
        picked.push_back(order[q]);
        tail += p[order[q]];
        if (picked.size() == need) break;
      }
      if (picked.size() < need) continue;
    }
    auto members = [&, i] {
      IndexSet set(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(i));
      set.insert(set.end(), picked.begin(), picked.end());
      std::sort(set.begin(), set.end());
      return set;
    };
    visit(prefix + tail, members);
  }
}

}  // namespace

std::vector<Cut> separate(std::span<const double> p, double v, const Instance& instance,
                          double tolerance) {
  std::vector<Cut> cuts;
  scan_families(p, instance, [&](double value, auto&& members) {
    if (v > value + tolerance) cuts.push_back(Cut{members(), value});
  });
  return cuts;
}

Cut min_feasible_value(std::span<const double> p, const Instance& instance) {
  Cut best{{}, std::numeric_limits<double>::infinity()};
  scan_families(p, instance, [&](double value, auto&& members) {
    if (value < best.value) best = Cut{members(), value};
  });
  return best;
}

}  // namespace merit
