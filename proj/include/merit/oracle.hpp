#pragma once

#include <span>
#include <vector>

#include "merit/model.hpp"

namespace merit {

// The worst-case constraint v <= sum_{j in members} p_j for one feasible top-k set.
struct Cut {
  IndexSet members;  // sorted candidate positions, |members| = k
  double value = 0.0;
};

constexpr double kViolationTolerance = 1e-7;

// Returns every constraint from the k+1 candidate families that (p, v) violates by more
// than `tolerance`. Empty means v <= min feasible value + tolerance.
std::vector<Cut> separate(std::span<const double> p, double v, const Instance& instance,
                          double tolerance = kViolationTolerance);

// Exact minimum over all feasible top-k sets, with one minimizing set.
Cut min_feasible_value(std::span<const double> p, const Instance& instance);

}  // namespace merit
