// merit: randomized top-k selection from quality intervals.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_map>

#include "CLI11.hpp"
#include "json.hpp"
#include "merit/axioms.hpp"
#include "merit/datagen.hpp"
#include "merit/error.hpp"
#include "merit/expost.hpp"
#include "merit/io.hpp"
#include "merit/rules.hpp"
#include "merit/sampling.hpp"

namespace {

using merit::Instance;
using nlohmann::ordered_json;

enum Exit { kOk = 0, kOther = 1, kBadInput = 2, kSolver = 3, kPrecondition = 4 };

struct Common {
  std::string input;
  std::string out;
  std::string format = "json";
  double epsilon = 0.0;
  std::size_t max_iters = 500;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--input", c.input, "Interval file: CSV id,lower,upper[,estimate] or JSON")
      ->required()
      ->envname("MERIT_INPUT");
  cmd->add_option("--out", c.out, "Write the result here instead of stdout")->envname("MERIT_OUT");
  cmd->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->envname("MERIT_FORMAT")
      ->capture_default_str();
  cmd->add_option("--epsilon", c.epsilon, "Overlap slack: a beats b only if lower(a) > upper(b) + epsilon")
      ->check(CLI::NonNegativeNumber)
      ->envname("MERIT_EPSILON")
      ->capture_default_str();
  cmd->add_option("--max-iters", c.max_iters, "Cutting-plane iteration cap")
      ->check(CLI::PositiveNumber)
      ->envname("MERIT_MAX_ITERS")
      ->capture_default_str();
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
  } else {
    merit::write_text_file(path, text);
  }
}

merit::RuleOptions rule_options(const Common& c) {
  merit::RuleOptions options;
  options.solve.max_iters = c.max_iters;
  return options;
}

struct SelectArgs {
  Common common;
  std::size_t k = 0;
  std::string method = "merit";
  std::uint64_t seed = 0;
  bool draw = false;
};

int cmd_select(const SelectArgs& a) {
  const Instance instance(merit::load_intervals(a.common.input), a.k, a.common.epsilon);
  const merit::Method method = merit::parse_method(a.method);
  const merit::SelectionRuleOutput output = merit::run_rule(method, instance, rule_options(a.common));
  std::cerr << merit::format_tier_line(a.method, merit::summarize_tiers(output, instance.size())) << "\n";

  merit::IndexSet selection;
  if (a.draw) selection = merit::systematic_sample(output.p, a.seed);

  if (a.common.format == "csv") {
    std::string text = merit::marginals_csv(instance, output.p);
    if (a.draw) {
      std::vector<char> chosen(instance.size(), 0);
      for (std::size_t i : selection) chosen[i] = 1;
      std::istringstream lines(text);
      std::string line, joined;
      std::getline(lines, line);
      joined = line + ",selected\n";
      for (std::size_t i = 0; std::getline(lines, line); ++i) joined += line + (chosen[i] ? ",1\n" : ",0\n");
      text = joined;
    }
    emit(a.common.out, text);
    return kOk;
  }
  ordered_json doc = merit::selection_json(a.method, instance, output);
  if (a.draw) {
    doc["seed"] = a.seed;
    ordered_json ids = ordered_json::array();
    for (std::size_t i : selection) ids.push_back(instance[i].id);
    doc["selection"] = std::move(ids);
    doc["audit"] = ordered_json::parse(merit::audit_record(output.p, a.seed, selection).dump());
  }
  emit(a.common.out, doc.dump(2) + "\n");
  return kOk;
}

struct EvaluateArgs {
  Common common;
  std::string marginals;
  std::string true_ranking;
  std::optional<std::size_t> k;
};

std::vector<std::string> read_ranking(const std::string& path) {
  std::istringstream in(merit::read_text_file(path));
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    std::string id = line.substr(first, last - first + 1);
    if (ids.empty() && id == "id") continue;
    ids.push_back(id);
  }
  return ids;
}

int cmd_evaluate(const EvaluateArgs& a) {
  const merit::MarginalsFile file = merit::load_marginals(a.marginals);
  double total = 0.0;
  for (double x : file.p) total += x;
  const std::size_t k = a.k ? *a.k : static_cast<std::size_t>(std::llround(total));
  const Instance instance(merit::load_intervals(a.common.input), k, a.common.epsilon);
  const merit::Marginals p = merit::align_marginals(file, instance);
  merit::check_marginals(p, k);

  ordered_json doc;
  doc["k"] = k;
  doc["worst_case_utility"] = merit::worst_case_utility(p, instance);
  doc["normalized_worst_case_utility"] = merit::normalized_worst_case_utility(p, instance);
  if (!a.true_ranking.empty()) {
    const std::vector<std::string> ranking = read_ranking(a.true_ranking);
    std::unordered_map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < instance.size(); ++i) position.emplace(instance[i].id, i);
    if (ranking.size() < k) throw merit::InvalidInput("true ranking lists fewer than k ids");
    merit::IndexSet top;
    for (std::size_t r = 0; r < k; ++r) {
      auto it = position.find(ranking[r]);
      if (it == position.end()) throw merit::InvalidInput("unknown id '" + ranking[r] + "' in true ranking");
      top.push_back(it->second);
    }
    doc["expected_utility"] = merit::expected_utility(p, top);
  }
  if (a.common.format == "csv") {
    std::string text = "metric,value\n";
    for (const auto& [key, value] : doc.items()) text += key + "," + value.dump() + "\n";
    emit(a.common.out, text);
  } else {
    emit(a.common.out, doc.dump(2) + "\n");
  }
  return kOk;
}

struct AxiomArgs {
  std::string input;
  std::string out;
  double epsilon = 0.0;
  std::size_t max_iters = 500;
  std::vector<std::string> methods = {"merit", "merit-monotone", "swissnsf", "rat"};
  std::optional<std::size_t> k_max;
  std::size_t fixture_n = 6;
  std::size_t fixture_k = 2;
  std::vector<double> fixture_eps = {1e-1, 1e-3, 1e-6};
};

ordered_json indices_json(const std::vector<merit::MonotonicityViolation>& found, const Instance& instance) {
  ordered_json list = ordered_json::array();
  for (const auto& v : found) {
    ordered_json item;
    item["id"] = instance[v.candidate].id;
    item["from_k"] = v.budget;
    item["to_k"] = v.budget + 1;
    item["drop"] = v.drop;
    list.push_back(std::move(item));
  }
  return list;
}

int cmd_axioms(const AxiomArgs& a) {
  merit::RuleOptions options;
  options.solve.max_iters = a.max_iters;
  ordered_json doc;
  std::optional<Instance> instance;
  if (!a.input.empty()) instance.emplace(merit::load_intervals(a.input), 0, a.epsilon);

  for (const std::string& name : a.methods) {
    const merit::Method method = merit::parse_method(name);
    const merit::Rule rule = merit::make_rule(method, options);
    ordered_json entry;
    if (instance) {
      const std::size_t k_max = a.k_max.value_or(instance->size() > 0 ? instance->size() - 1 : 0);
      try {
        const auto found = merit::check_budget_monotonicity(rule, *instance, k_max);
        entry["budget_monotonicity"] = {{"k_max", k_max}, {"violations", indices_json(found, *instance)}};
      } catch (const merit::PreconditionError& e) {
        entry["budget_monotonicity"] = {{"skipped", e.what()}};
      }
      if (instance->size() == 2) {
        try {
          const auto report = merit::check_reversal_symmetry(rule, instance->with_budget(1));
          entry["reversal_symmetry"] = {{"pass", report.pass}, {"original", report.original},
                                        {"reversed", report.flipped}};
        } catch (const merit::PreconditionError& e) {
          entry["reversal_symmetry"] = {{"skipped", e.what()}};
        }
      }
    }
    ordered_json stability = ordered_json::array();
    for (double eps : a.fixture_eps) {
      const auto report = merit::check_not_maximally_unstable(rule, a.fixture_n, a.fixture_k, eps);
      stability.push_back({{"epsilon", eps}, {"flip", report.flip}, {"guards_hold", report.guards_hold}});
    }
    entry["instability_fixture"] = {{"n", a.fixture_n}, {"k", a.fixture_k}, {"checks", std::move(stability)}};
    doc[name] = std::move(entry);
  }
  emit(a.out, doc.dump(2) + "\n");
  return kOk;
}

struct SimulateArgs {
  merit::ComparisonConfig config;
  std::string intervals = "loo";
  std::string out;
  std::string summary;
};

int cmd_simulate(SimulateArgs a) {
  a.config.intervals = merit::parse_interval_method(a.intervals);
  for (const std::string& rule : a.config.rules) {
    if (rule != "det-mean") merit::parse_method(rule);
  }
  const merit::ComparisonResult result = merit::run_comparison(a.config);
  if (!a.out.empty()) merit::write_text_file(a.out, merit::records_csv(result));
  emit(a.summary, merit::summary_csv(result));
  return kOk;
}

struct IntervalArgs {
  std::string reviews;
  std::string method = "loo";
  double score_min = 1.0;
  double score_max = 10.0;
  std::string out;
};

int cmd_intervals(const IntervalArgs& a) {
  std::istringstream in(merit::read_text_file(a.reviews));
  const merit::ReviewTable table = merit::parse_reviews_csv(in, a.score_min, a.score_max);
  merit::IntervalSet set;
  switch (merit::parse_interval_method(a.method)) {
    case merit::IntervalMethod::kLoo: set = merit::loo_intervals(table.matrix); break;
    case merit::IntervalMethod::kManskiMean: set = merit::manski_intervals(table.matrix); break;
    case merit::IntervalMethod::kManskiMedian:
      set = merit::manski_intervals(table.matrix, merit::Aggregator::kMedian);
      break;
    case merit::IntervalMethod::kLooOffset: set = merit::offset_corrected_loo_intervals(table.matrix); break;
  }
  for (std::size_t i = 0; i < set.intervals.size(); ++i) set.intervals[i].id = table.proposal_ids[i];
  for (std::size_t i : set.flagged) {
    std::cerr << "warning: proposal '" << table.proposal_ids[i] << "' has fewer than two scores\n";
  }
  emit(a.out, merit::intervals_csv(set.intervals));
  return kOk;
}

struct BenchArgs {
  std::vector<std::size_t> sizes = {1000, 2000};
  std::vector<double> rates = {1.0 / 3.0};
  std::uint64_t seed = 1;
  std::size_t max_iters = 500;
  std::string out;
};

int cmd_bench(const BenchArgs& a) {
  merit::SolveOptions options;
  options.max_iters = a.max_iters;
  std::string text = "n,rate,k,seconds,iterations,cuts,lp_rows,chain_width,pruned_accept,pruned_reject,value,bound\n";
  for (std::size_t n : a.sizes) {
    for (double rate : a.rates) {
      const Instance instance = merit::conference_instance(n, rate, a.seed);
      const auto start = std::chrono::steady_clock::now();
      const merit::SolveReport report = merit::solve_ex_ante(instance, options);
      const merit::Marginals p = merit::enforce(report.p, instance);
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      char row[256];
      std::snprintf(row, sizeof row, "%zu,%.6g,%zu,%.3f,%zu,%zu,%zu,%zu,%zu,%zu,%.10g,%.10g\n", n, rate,
                    instance.budget(), seconds, report.iterations, report.cuts_added, report.lp_rows,
                    report.chain_width, report.pruned_accept.size(), report.pruned_reject.size(),
                    merit::worst_case_utility(p, instance), report.bound);
      text += row;
      std::cerr << row;
    }
  }
  emit(a.out, text);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximin-optimal randomized top-k selection from quality intervals"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  app.footer(
      "Exit codes: 0 ok, 2 invalid input, 3 solver failure, 4 rule precondition.\n"
      "Every option with an environment variable listed reads it when the flag is absent.");

  SelectArgs select;
  CLI::App* sel = app.add_subcommand("select", "Compute selection probabilities and optionally draw a lottery");
  add_common(sel, select.common);
  sel->add_option("--k", select.k, "Number of candidates to select")->required()->envname("MERIT_K");
  sel->add_option("--method", select.method, "merit, merit-uniform, merit-monotone, swissnsf, rat or det")
      ->envname("MERIT_METHOD")
      ->capture_default_str();
  sel->add_option("--seed", select.seed, "Lottery seed")->envname("MERIT_SEED")->capture_default_str();
  sel->add_flag("--draw", select.draw, "Draw exactly k candidates and attach a replayable audit record");

  EvaluateArgs evaluate;
  CLI::App* ev = app.add_subcommand("evaluate", "Worst-case (and optionally expected) utility of given marginals");
  add_common(ev, evaluate.common);
  ev->add_option("--marginals", evaluate.marginals, "Selection JSON or CSV id,p")->required();
  ev->add_option("--k", evaluate.k, "Budget; defaults to the rounded sum of the marginals")->envname("MERIT_K");
  ev->add_option("--true-ranking", evaluate.true_ranking, "File with ids best first, one per line");

  AxiomArgs axioms;
  CLI::App* ax = app.add_subcommand("axioms", "Check budget monotonicity, reversal symmetry and stability");
  ax->add_option("--input", axioms.input, "Interval file for the monotonicity and reversal checks")
      ->envname("MERIT_INPUT");
  ax->add_option("--out", axioms.out, "Write the report here instead of stdout");
  ax->add_option("--epsilon", axioms.epsilon, "Overlap slack")->envname("MERIT_EPSILON");
  ax->add_option("--max-iters", axioms.max_iters, "Cutting-plane iteration cap")->envname("MERIT_MAX_ITERS");
  ax->add_option("--methods", axioms.methods, "Rules to check")->delimiter(',')->capture_default_str();
  ax->add_option("--k-max", axioms.k_max, "Largest budget for the monotonicity sweep (default n - 1)");
  ax->add_option("--fixture-n", axioms.fixture_n, "Candidates in the instability fixture")->capture_default_str();
  ax->add_option("--fixture-k", axioms.fixture_k, "Budget in the instability fixture")->capture_default_str();
  ax->add_option("--fixture-eps", axioms.fixture_eps, "Perturbation sizes")->delimiter(',');

  SimulateArgs simulate;
  merit::ComparisonConfig& cfg = simulate.config;
  CLI::App* sim = app.add_subcommand("simulate", "Synthetic reviewer-miscalibration comparison of rules");
  sim->add_option("--trials", cfg.trials, "Number of trials")->capture_default_str();
  sim->add_option("--seed", cfg.seed, "Master seed")->envname("MERIT_SEED")->capture_default_str();
  sim->add_option("--intervals", simulate.intervals, "loo, manski-mean, manski-median or loo-offset")
      ->capture_default_str();
  sim->add_option("--rules", cfg.rules, "Rules to compare; det-mean ranks by raw mean score")
      ->delimiter(',')
      ->capture_default_str();
  sim->add_option("--proposals", cfg.params.n_proposals)->capture_default_str();
  sim->add_option("--reviewers", cfg.params.n_reviewers)->capture_default_str();
  sim->add_option("--per-reviewer", cfg.params.reviews_per_reviewer, "Scores per reviewer")->capture_default_str();
  sim->add_option("--sigma-theta", cfg.params.sigma_theta)->capture_default_str();
  sim->add_option("--sigma-b", cfg.params.sigma_b, "Reviewer offset spread")->capture_default_str();
  sim->add_option("--sigma-eps", cfg.params.sigma_eps, "Score noise")->capture_default_str();
  sim->add_option("--sigma-a", cfg.params.sigma_a, "Reviewer scale spread (0 disables)")->capture_default_str();
  sim->add_option("--k-fraction", cfg.k_fraction, "Budget as a fraction of proposals")->capture_default_str();
  sim->add_option("--sparsity", cfg.sparsity, "Fraction of scores to drop")->capture_default_str();
  sim->add_option("--bootstrap", cfg.bootstrap_resamples, "Bootstrap resamples for the CIs")->capture_default_str();
  sim->add_option("--out", simulate.out, "Per-trial records CSV");
  sim->add_option("--summary", simulate.summary, "Summary CSV (default stdout)");

  IntervalArgs intervals;
  CLI::App* iv = app.add_subcommand("intervals", "Build intervals from long-format review scores");
  iv->add_option("--reviews", intervals.reviews, "CSV proposal,reviewer,score")->required();
  iv->add_option("--method", intervals.method, "loo, manski-mean, manski-median or loo-offset")
      ->capture_default_str();
  iv->add_option("--score-min", intervals.score_min)->capture_default_str();
  iv->add_option("--score-max", intervals.score_max)->capture_default_str();
  iv->add_option("--out", intervals.out, "Write intervals CSV here instead of stdout");

  BenchArgs bench;
  CLI::App* be = app.add_subcommand("bench", "Time the solver on synthetic conference-style instances");
  be->add_option("--sizes", bench.sizes, "Numbers of candidates")->delimiter(',')->capture_default_str();
  be->add_option("--rates", bench.rates, "Acceptance rates")->delimiter(',')->capture_default_str();
  be->add_option("--seed", bench.seed)->envname("MERIT_SEED")->capture_default_str();
  be->add_option("--max-iters", bench.max_iters)->envname("MERIT_MAX_ITERS")->capture_default_str();
  be->add_option("--out", bench.out, "CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadInput;
  }

  try {
    if (*sel) return cmd_select(select);
    if (*ev) return cmd_evaluate(evaluate);
    if (*ax) return cmd_axioms(axioms);
    if (*sim) return cmd_simulate(simulate);
    if (*iv) return cmd_intervals(intervals);
    if (*be) return cmd_bench(bench);
  } catch (const merit::InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const merit::SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolver;
  } catch (const merit::PreconditionError& e) {
    std::cerr << "precondition: " << e.what() << "\n";
    return kPrecondition;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
  return kOther;
}
