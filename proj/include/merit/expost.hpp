#pragma once

#include <span>

#include "merit/model.hpp"

namespace merit {

// Moves probability from dominated candidates to their dominators until every strictly
// ordered pair (a, b) has p_a = 1 or p_b = 0. Keeps sum p and never lowers the
// worst-case value.
Marginals enforce(std::span<const double> p, const Instance& instance);

// Pairs (a, b) with a strictly above b but p_a < 1 - tol and p_b > tol.
std::vector<std::pair<std::size_t, std::size_t>> expost_violations(std::span<const double> p,
                                                                   const Instance& instance,
                                                                   double tol = 1e-9);

}  // namespace merit
