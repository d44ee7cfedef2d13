#include "merit/expost.hpp"

#include <algorithm>
#include <numeric>

#include "merit/error.hpp"

namespace merit {

Marginals enforce(std::span<const double> p_in, const Instance& instance) {
  const std::size_t n = instance.size();
  if (p_in.size() != n) throw InvalidInput("marginal vector length does not match the instance");
  Marginals p(p_in.begin(), p_in.end());

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (instance.upper(a) != instance.upper(b)) return instance.upper(a) < instance.upper(b);
    if (instance.lower(a) != instance.lower(b)) return instance.lower(a) > instance.lower(b);
    return a < b;
  });

  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t b = order[t];
    for (std::size_t s = n; s-- > t + 1 && p[b] > 0.0;) {
      const std::size_t a = order[s];
      if (!instance.dominates(a, b) || p[a] >= 1.0) continue;
      const double room = 1.0 - p[a];
      if (p[b] <= room) {
        p[a] += p[b];
        p[b] = 0.0;
      } else {
        p[b] -= room;
        p[a] = 1.0;
      }
    }
  }
  return p;
}

std::vector<std::pair<std::size_t, std::size_t>> expost_violations(std::span<const double> p,
                                                                   const Instance& instance,
                                                                   double tol) {
  std::vector<std::pair<std::size_t, std::size_t>> found;
  for (std::size_t a = 0; a < instance.size(); ++a) {
    if (p[a] >= 1.0 - tol) continue;
    for (std::size_t b = 0; b < instance.size(); ++b) {
      if (p[b] > tol && instance.dominates(a, b)) found.emplace_back(a, b);
    }
  }
  return found;
}

}  // namespace merit
