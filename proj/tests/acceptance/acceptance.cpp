// One line per acceptance criterion; exit status is nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "../support/brute.hpp"
#include "merit/axioms.hpp"
#include "merit/baselines.hpp"
#include "merit/datagen.hpp"
#include "merit/expost.hpp"
#include "merit/oracle.hpp"
#include "merit/rules.hpp"
#include "merit/sampling.hpp"
#include "merit/solver.hpp"

namespace merit {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

bool near_all(const Marginals& p, const std::vector<double>& want, double tol) {
  if (p.size() != want.size()) return false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (std::abs(p[i] - want[i]) > tol) return false;
  }
  return true;
}

// Random marginals summing to k: start flat and push mass around in random pairs.
Marginals random_marginals(std::mt19937_64& rng, std::size_t n, std::size_t k) {
  Marginals p(n, static_cast<double>(k) / static_cast<double>(n));
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t step = 0; step < 4 * n; ++step) {
    const std::size_t a = pick(rng), b = pick(rng);
    if (a == b) continue;
    const double amount = unit(rng) * std::min(1.0 - p[a], p[b]);
    p[a] += amount;
    p[b] -= amount;
  }
  return p;
}

// Multiples of 2^-30 sum exactly, so tied sets compare equal whatever the summation order.
Marginals dyadic(Marginals p) {
  for (double& x : p) x = std::ldexp(std::round(std::ldexp(x, 30)), -30);
  return p;
}

// Instances for the property criteria: n <= 10, k <= 5, endpoints uniform on [0, 1].
std::vector<Instance> random_corpus(std::uint64_t seed, std::size_t count) {
  std::mt19937_64 rng(seed);
  std::vector<Instance> out;
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t n = 2 + t % 9;
    const std::size_t k = 1 + (t / 9) % std::min<std::size_t>(5, n);
    out.push_back(testing::random_instance(rng, n, k));
  }
  return out;
}

Outcome four_candidate_reproduction() {
  Outcome o;
  const auto start = Clock::now();
  const std::vector<double> one{0.5, 0.5, 0, 0}, two{1, 1.0 / 3, 1.0 / 3, 1.0 / 3};
  for (Method m : {Method::kMerit, Method::kSwissNsf}) {
    o.require(near_all(run_rule(m, testing::four_candidates(1)).p, one, 1e-9), method_name(m) + " at k=1");
    o.require(near_all(run_rule(m, testing::four_candidates(2)).p, two, 1e-9), method_name(m) + " at k=2");
  }
  const double elapsed = seconds_since(start);
  o.require(elapsed < 1.0, "runtime");
  o.detail << "runtime " << elapsed << " s";
  return o;
}

Outcome brute_force_optimality() {
  Outcome o;
  const auto start = Clock::now();
  std::mt19937_64 rng(2024);
  double worst_gap = 0.0;
  std::size_t oracle_checks = 0;
  for (const Instance& inst : random_corpus(11, 1000)) {
    const SolveReport r = solve_ex_ante(inst);
    const double full = testing::full_lp_optimum(inst);
    worst_gap = std::max(worst_gap, std::abs(r.value - full));
    o.require(std::abs(r.value - full) <= 1e-7, "solver vs full program");

    const auto sets = testing::topk_by_mask(inst);
    const std::set<IndexSet> feasible(sets.begin(), sets.end());
    for (const Marginals& p : {dyadic(r.p), dyadic(random_marginals(rng, inst.size(), inst.budget()))}) {
      const Cut cut = min_feasible_value(p, inst);
      o.require(feasible.count(cut.members) == 1, "oracle set is feasible");
      o.require(testing::set_value(p, cut.members) == testing::brute_min(p, inst), "oracle minimum");
      ++oracle_checks;
    }
  }
  const double elapsed = seconds_since(start);
  o.require(elapsed < 120.0, "runtime");
  o.detail << "max |solver - full LP| " << worst_gap << ", " << oracle_checks << " oracle checks, " << elapsed
           << " s";
  return o;
}

Outcome expost_validity() {
  Outcome o;
  std::mt19937_64 rng(7);
  double largest_drop = 0.0;
  std::size_t checked = 0;
  for (const Instance& inst : random_corpus(31, 1000)) {
    for (const Marginals& p : {solve_ex_ante(inst).p, random_marginals(rng, inst.size(), inst.budget())}) {
      const Marginals q = enforce(p, inst);
      o.require(expost_violations(q, inst).empty(), "dominating pair left");
      const double drop = worst_case_utility(p, inst) - worst_case_utility(q, inst);
      largest_drop = std::max(largest_drop, drop);
      o.require(drop <= 1e-9, "objective decreased");
      ++checked;
    }
  }
  o.detail << checked << " marginal vectors, largest drop " << largest_drop;
  return o;
}

Outcome sampling_correctness() {
  Outcome o;
  constexpr int kDraws = 100000;
  std::mt19937_64 rng(5);
  std::vector<Marginals> cases{run_rule(Method::kMerit, testing::four_candidates(2)).p,
                               run_rule(Method::kMerit, testing::four_candidates(1)).p,
                               {0.9, 0.05, 0.35, 0.7, 0, 1, 0.2, 0.8},
                               random_marginals(rng, 12, 5)};
  double worst_ratio = 0.0;
  for (const Marginals& p : cases) {
    double total = 0.0;
    for (double x : p) total += x;
    const auto k = static_cast<std::size_t>(std::llround(total));
    std::vector<int> hits(p.size(), 0);
    bool exact_k = true;
    for (int seed = 0; seed < kDraws; ++seed) {
      const IndexSet s = systematic_sample(p, static_cast<std::uint64_t>(seed));
      exact_k = exact_k && s.size() == k && std::set<std::size_t>(s.begin(), s.end()).size() == k;
      for (std::size_t i : s) ++hits[i];
    }
    o.require(exact_k, "sample size");
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double freq = static_cast<double>(hits[i]) / kDraws;
      const double allowed = 3.0 * std::sqrt(p[i] * (1.0 - p[i]) / kDraws) + 0.002;
      worst_ratio = std::max(worst_ratio, std::abs(freq - p[i]) / allowed);
      o.require(std::abs(freq - p[i]) <= allowed, "frequency");
    }
  }
  o.detail << cases.size() << " marginal vectors x " << kDraws << " draws, worst |freq - p| / bound "
           << worst_ratio;
  return o;
}

Outcome axiom_suite() {
  Outcome o;
  for (double eps : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
    for (Method m : {Method::kSwissNsf, Method::kRat}) {
      o.require(check_not_maximally_unstable(make_rule(m), 10, 3, eps).flip, method_name(m) + " flips");
    }
    const InstabilityReport r = check_not_maximally_unstable(make_rule(Method::kMerit), 10, 3, eps);
    o.require(!r.flip && r.guards_hold, "merit stays stable");
  }

  const Instance pair({{"1", 0.0, 1.0, 0.5}, {"2", 0.1, 0.2, 0.15}}, 1);
  o.require(!check_reversal_symmetry(make_rule(Method::kSwissNsf), pair).pass, "swissnsf fails reversal");
  std::mt19937_64 rng(99);
  const Rule merit = make_rule(Method::kMerit);
  int reversal_passes = 0;
  for (int t = 0; t < 1000; ++t) reversal_passes += check_reversal_symmetry(merit, testing::random_instance(rng, 2, 1)).pass;
  o.require(reversal_passes == 1000, "merit reversal");

  for (Method m : {Method::kMerit, Method::kSwissNsf}) {
    const auto found = check_budget_monotonicity(make_rule(m), testing::four_candidates(2), 2);
    o.require(found.size() == 1 && found[0].candidate == 1 && found[0].budget == 1,
              method_name(m) + " shows the four-candidate violation");
  }
  std::size_t monotone_violations =
      check_budget_monotonicity(make_rule(Method::kMeritMonotone), testing::four_candidates(2), 2).size();
  std::mt19937_64 grid_rng(3);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 3 + t % 6;
    monotone_violations += check_budget_monotonicity(make_rule(Method::kMeritMonotone),
                                                     testing::random_grid_instance(grid_rng, n, n - 1, 5), n - 1)
                               .size();
  }
  o.require(monotone_violations == 0, "merit-monotone violations");
  o.detail << "merit reversal " << reversal_passes << "/1000, merit-monotone violations " << monotone_violations;
  return o;
}

Outcome maximin_dominance() {
  Outcome o;
  const auto score = [](Method m, const Instance& inst) {
    return normalized_worst_case_utility(run_rule(m, inst).p, inst);
  };
  double smallest_margin = 1.0;
  const auto check = [&](const Instance& inst) {
    const double merit = score(Method::kMerit, inst);
    for (Method other : {Method::kSwissNsf, Method::kDeterministic}) {
      const double margin = merit - score(other, inst);
      smallest_margin = std::min(smallest_margin, margin);
      o.require(margin >= -1e-9, "merit below " + method_name(other));
    }
  };
  for (const Instance& inst : random_corpus(41, 300)) check(inst);
  for (std::size_t k = 1; k <= 3; ++k) {
    check(testing::four_candidates(k));
    check(testing::identical(5, k));
    check(testing::disjoint(5, k));
  }

  // Wide intervals: sparse reviews with missing scores imputed at the range ends.
  MiscalParams params;
  params.n_proposals = 60;
  params.n_reviewers = 6;
  params.reviews_per_reviewer = 30;
  double best_gap = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const DropResult sparse = drop_scores(generate_reviews(params, seed), 0.3, seed);
    const Instance inst(manski_intervals(sparse.matrix).intervals, 18);
    check(inst);
    const double merit = score(Method::kMerit, inst);
    best_gap = std::max({best_gap, merit - score(Method::kSwissNsf, inst), merit - score(Method::kDeterministic, inst)});
  }
  o.require(best_gap > 1e-6, "strict gap on the wide regime");
  o.detail << "smallest margin " << smallest_margin << ", largest gap on the wide regime " << best_gap;
  return o;
}

Outcome uniform_variant() {
  Outcome o;
  std::mt19937_64 rng(17);
  double worst = 0.0;
  std::size_t count = 0;
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 2 + t % 7;
    const std::size_t k = 1 + (t / 7) % n;
    const Instance inst = t % 2 ? testing::random_instance(rng, n, k) : testing::random_grid_instance(rng, n, k, 5);
    const UniformReport u = solve_uniform(inst);
    worst = std::max(worst, std::abs(u.value - testing::brute_uniform(inst)));
    o.require(std::abs(u.value - testing::brute_uniform(inst)) <= 1e-7, "uniform vs enumeration");
    o.require(u.value <= solve_ex_ante(inst).value + 1e-9, "uniform above the unconstrained optimum");
    ++count;
  }
  o.detail << count << " instances, max |uniform - enumeration| " << worst;
  return o;
}

Outcome scaling() {
  Outcome o;
  const auto start = Clock::now();
  const Instance inst = conference_instance(10000, 1.0 / 3, 1);
  const SolveReport r = solve_ex_ante(inst);
  const Marginals p = enforce(r.p, inst);
  const double elapsed = seconds_since(start);
  o.require(expost_violations(p, inst).empty(), "ex-post");
  o.require(r.iterations <= 30, "iterations");
  o.require(elapsed < 300.0, "runtime");
  o.detail << "n " << inst.size() << ", k " << inst.budget() << ", " << r.iterations << " iterations, " << elapsed
           << " s";
  return o;
}

Outcome utility_parity() {
  Outcome o;
  std::map<double, std::map<std::string, double>> means;
  for (double sigma_b : {0.5, 1.0, 2.0, 3.0}) {
    ComparisonConfig config;
    config.params = MiscalParams::swiss_regime();
    config.params.sigma_b = sigma_b;
    config.intervals = IntervalMethod::kLooOffset;
    config.trials = 20;
    config.bootstrap_resamples = 200;
    for (const SummaryRow& row : run_comparison(config).summary) {
      if (row.metric == "expected_utility") means[sigma_b][row.rule] = row.mean;
    }
  }
  const auto at = [&](double s, const char* rule) { return means[s][rule]; };
  o.require(std::abs(at(1.0, "merit") - at(1.0, "swissnsf")) <= 0.02, "parity at sigma_b 1");
  for (double s : {2.0, 3.0}) {
    o.require(at(s, "det-mean") < at(s, "merit") && at(s, "det-mean") < at(s, "swissnsf"), "det-mean trails");
  }
  o.require(at(0.5, "det-mean") - at(3.0, "det-mean") > at(0.5, "merit") - at(3.0, "merit"),
            "det-mean degrades faster");
  for (const auto& [s, row] : means) {
    o.detail << "sigma_b " << s << ":";
    for (const auto& [rule, mean] : row) o.detail << " " << rule << " " << mean;
    o.detail << "; ";
  }
  return o;
}

}  // namespace
}  // namespace merit

int main() {
  using merit::Outcome;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"four-candidate reproduction", merit::four_candidate_reproduction},
      {"brute-force optimality", merit::brute_force_optimality},
      {"ex-post validity", merit::expost_validity},
      {"sampling correctness", merit::sampling_correctness},
      {"axiom suite", merit::axiom_suite},
      {"maximin dominance", merit::maximin_dominance},
      {"uniform-lottery variant", merit::uniform_variant},
      {"scaling", merit::scaling},
      {"expected-utility parity", merit::utility_parity},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string line;
    bool pass = false;
    try {
      const Outcome o = criteria[i].second();
      pass = o.pass;
      line = o.detail.str();
    } catch (const std::exception& e) {
      line = std::string("threw: ") + e.what();
    }
    failures += !pass;
    std::printf("criterion %zu %-28s %s  %s\n", i + 1, criteria[i].first, pass ? "PASS" : "FAIL", line.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
