#include "merit/rules.hpp"

#include "merit/error.hpp"
#include "merit/expost.hpp"

namespace merit {

Method parse_method(std::string_view name) {
  if (name == "merit") return Method::kMerit;
  if (name == "merit-uniform") return Method::kMeritUniform;
  if (name == "merit-monotone") return Method::kMeritMonotone;
  if (name == "swissnsf") return Method::kSwissNsf;
  if (name == "rat") return Method::kRat;
  if (name == "det") return Method::kDeterministic;
  throw InvalidInput("unknown method '" + std::string(name) + "'");
}

std::string method_name(Method method) {
  switch (method) {
    case Method::kMerit: return "merit";
    case Method::kMeritUniform: return "merit-uniform";
    case Method::kMeritMonotone: return "merit-monotone";
    case Method::kSwissNsf: return "swissnsf";
    case Method::kRat: return "rat";
    case Method::kDeterministic: return "det";
  }
  return "unknown";
}

SelectionRuleOutput run_rule(Method method, const Instance& instance, const RuleOptions& options) {
  switch (method) {
    case Method::kMerit: {
      const SolveReport report = solve_ex_ante(instance, options.solve);
      return tiers_from_marginals(enforce(report.p, instance));
    }
    case Method::kMeritUniform: {
      UniformReport report = solve_uniform(instance, options.solve);
      SelectionRuleOutput out;
      out.p = std::move(report.p);
      out.accept = std::move(report.accept);
      out.lottery = std::move(report.lottery);
      out.reject = std::move(report.reject);
      out.lottery_probability = report.lottery_probability;
      return out;
    }
    case Method::kMeritMonotone: {
      if (instance.budget() == 0) return tiers_from_marginals(Marginals(instance.size(), 0.0));
      return tiers_from_marginals(solve_monotone_sequence(instance, options.solve).back());
    }
    case Method::kSwissNsf: return swiss_nsf(instance);
    case Method::kRat: return randomize_above_threshold(instance, options.threshold);
    case Method::kDeterministic: return deterministic_topk(instance);
  }
  throw InvalidInput("unknown method");
}

Rule make_rule(Method method, RuleOptions options) {
  return [method, options](const Instance& instance) { return run_rule(method, instance, options).p; };
}

}  // namespace merit
