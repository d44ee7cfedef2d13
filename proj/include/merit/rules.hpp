#pragma once

#include <functional>
#include <string>
#include <string_view>

#include "merit/baselines.hpp"
#include "merit/solver.hpp"

namespace merit {

enum class Method { kMerit, kMeritUniform, kMeritMonotone, kSwissNsf, kRat, kDeterministic };

// Accepts merit, merit-uniform, merit-monotone, swissnsf, rat, det. Throws InvalidInput.
Method parse_method(std::string_view name);
std::string method_name(Method method);

struct RuleOptions {
  SolveOptions solve;
  ThresholdPolicy threshold = ThresholdPolicy::kth_estimate();
};

// merit is the optimal marginals followed by ex-post enforcement; merit-monotone returns
// the last element of the monotone sequence.
SelectionRuleOutput run_rule(Method method, const Instance& instance, const RuleOptions& options = {});

using Rule = std::function<Marginals(const Instance&)>;
Rule make_rule(Method method, RuleOptions options = {});

}  // namespace merit
