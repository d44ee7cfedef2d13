#include "merit/solver.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <tuple>

#include "merit/error.hpp"
#include "merit/expost.hpp"

namespace merit {
namespace {

// Step sizes toward the LP point used for the extra separation points.
constexpr double kStabilizationSteps[] = {0.5, 0.25, 0.1};

PruneResult prune_with_floor(const Instance& instance, std::span<const double> floor) {
  PruneResult result;
  result.remaining.resize(instance.size());
  std::iota(result.remaining.begin(), result.remaining.end(), std::size_t{0});
  result.reduced_budget = instance.budget();
  while (!result.remaining.empty()) {
    const Instance sub = instance.subset(result.remaining, result.reduced_budget);
    const OrderCounts counts = order_counts(sub);
    const std::size_t n = result.remaining.size();
    const std::size_t k = result.reduced_budget;
    IndexSet keep;
    std::size_t newly_accepted = 0;
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t i = result.remaining[t];
      const bool floor_free = floor.empty() || floor[i] == 0.0;
      if (counts.above[t] >= k && floor_free) {
        result.rejected.push_back(i);
      } else if (counts.below[t] >= n - k) {
        result.accepted.push_back(i);
        ++newly_accepted;
      } else {
        keep.push_back(i);
      }
    }
    if (keep.size() == n) break;
    result.remaining = std::move(keep);
    result.reduced_budget -= newly_accepted;
  }
  std::sort(result.accepted.begin(), result.accepted.end());
  std::sort(result.rejected.begin(), result.rejected.end());
  return result;
}

// Groups positions of `instance` by identical (A, B, floor).
std::vector<IndexSet> group_candidates(const Instance& instance, std::span<const double> floor,
                                       bool merge) {
  const OrderCounts counts = order_counts(instance);
  const std::size_t n = instance.size();
  std::vector<IndexSet> groups;
  if (!merge) {
    for (std::size_t i = 0; i < n; ++i) groups.push_back({i});
  } else {
    using Key = std::tuple<std::size_t, long, double>;
    std::map<Key, IndexSet> by_key;
    for (std::size_t i = 0; i < n; ++i) {
      by_key[Key{counts.above[i], -static_cast<long>(counts.below[i]),
                 floor.empty() ? 0.0 : floor[i]}]
          .push_back(i);
    }
    for (auto& [key, members] : by_key) groups.push_back(std::move(members));
  }
  return groups;
}

IndexSet seed_members(const Instance& instance) {
  std::vector<std::size_t> order(instance.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (instance.lower(a) != instance.lower(b)) return instance.lower(a) > instance.lower(b);
    if (instance.upper(a) != instance.upper(b)) return instance.upper(a) > instance.upper(b);
    return a < b;
  });
  order.resize(instance.budget());
  return order;
}

// LP over one variable per group plus v (last variable). Row v - sum_g count_g x_g <= 0
// for every cut, keyed by its count vector so duplicates in group space are skipped.
class CutMaster {
 public:
  CutMaster(const Instance& reduced, std::vector<IndexSet> groups, std::span<const double> floor,
            bool monotone_rows, const lp::SimplexOptions& options)
      : instance_(reduced), groups_(std::move(groups)), group_of_(reduced.size()) {
    const std::size_t g = groups_.size();
    for (std::size_t gi = 0; gi < g; ++gi) {
      for (std::size_t i : groups_[gi]) group_of_[i] = gi;
    }
    lp::LinearProgram program;
    program.objective.assign(g + 1, 0.0);
    program.objective[g] = 1.0;
    for (std::size_t gi = 0; gi < g; ++gi) {
      const double lo = floor.empty() ? 0.0 : floor[groups_[gi].front()];
      program.bounds.push_back({lo, 1.0});
    }
    program.bounds.push_back({0.0, static_cast<double>(reduced.budget())});
    lp::Constraint total{std::vector<double>(g + 1, 0.0), lp::Relation::kEqual,
                         static_cast<double>(reduced.budget())};
    for (std::size_t gi = 0; gi < g; ++gi) total.coefficients[gi] = groups_[gi].size();
    program.constraints.push_back(total);

    if (monotone_rows) {
      const OrderCounts counts = order_counts(reduced);
      OrderCounts reps;
      for (const IndexSet& members : groups_) {
        reps.above.push_back(counts.above[members.front()]);
        reps.below.push_back(counts.below[members.front()]);
      }
      chain_width_ = chain_cover(reps).width();
      for (const auto& [hi, lo] : dominance_cover(reps)) {
        lp::Constraint link{std::vector<double>(g + 1, 0.0), lp::Relation::kGreaterEqual, 0.0};
        link.coefficients[hi] = 1.0;
        link.coefficients[lo] = -1.0;
        program.constraints.push_back(std::move(link));
      }
    }
    simplex_.emplace(program, options);
    base_rows_ = program.constraints.size();
    add_cut(seed_members(reduced));
  }

  std::size_t num_groups() const { return groups_.size(); }
  std::size_t chain_width() const { return chain_width_; }
  std::size_t rows() const { return simplex_->num_constraints(); }
  const std::vector<IndexSet>& groups() const { return groups_; }

  bool add_cut(const IndexSet& members) {
    std::map<std::size_t, double> count;
    for (std::size_t i : members) count[group_of_[i]] += 1.0;
    CutKey key(count.begin(), count.end());
    if (!seen_.insert(key).second) return false;
    std::vector<std::pair<std::size_t, double>> terms;
    for (const auto& [gi, c] : key) terms.emplace_back(gi, -c);
    terms.emplace_back(groups_.size(), 1.0);
    simplex_->add_constraint(terms, lp::Relation::kLessEqual, 0.0);
    cuts_.push_back({std::move(key), 0});
    return true;
  }

  // Drops cuts that have been slack at kPurgeAge consecutive LP optima. Keeps the tableau
  // near the size of the active set; a dropped cut may come back through the oracle.
  void purge_slack_cuts() {
    std::vector<std::size_t> stale;
    for (std::size_t t = 0; t < cuts_.size(); ++t) {
      CutRow& cut = cuts_[t];
      cut.slack_age = simplex_->is_binding(base_rows_ + t) ? 0 : cut.slack_age + 1;
      if (cut.slack_age >= kPurgeAge) stale.push_back(base_rows_ + t);
    }
    if (stale.empty()) return;
    const std::vector<long> renumber = simplex_->remove_constraints(stale);
    std::vector<CutRow> kept;
    for (std::size_t t = 0; t < cuts_.size(); ++t) {
      if (renumber[base_rows_ + t] >= 0) {
        kept.push_back(std::move(cuts_[t]));
      } else {
        seen_.erase(cuts_[t].key);
      }
    }
    cuts_ = std::move(kept);
  }

  lp::LpSolution solve() { return simplex_->solve(); }

  Marginals expand(std::span<const double> x) const {
    Marginals p(instance_.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = x[group_of_[i]];
    return p;
  }

 private:
  const Instance& instance_;
  std::vector<IndexSet> groups_;
  std::vector<std::size_t> group_of_;
  using CutKey = std::vector<std::pair<std::size_t, double>>;
  struct CutRow {
    CutKey key;
    std::size_t slack_age = 0;
  };
  static constexpr std::size_t kPurgeAge = 3;

  std::optional<lp::Simplex> simplex_;
  std::size_t base_rows_ = 0;   // total and monotonicity rows, never purged
  std::vector<CutRow> cuts_;    // cut t is LP row base_rows_ + t
  std::set<CutKey> seen_;
  std::size_t chain_width_ = 0;
};

SolveReport solve_with_floor(const Instance& instance, std::span<const double> floor,
                             const SolveOptions& options) {
  const std::size_t n = instance.size();
  SolveReport report;
  report.p.assign(n, 0.0);

  PruneResult pruned;
  if (options.prune) {
    pruned = prune_with_floor(instance, floor);
  } else {
    pruned.remaining.resize(n);
    std::iota(pruned.remaining.begin(), pruned.remaining.end(), std::size_t{0});
    pruned.reduced_budget = instance.budget();
  }
  report.pruned_accept = pruned.accepted;
  report.pruned_reject = pruned.rejected;
  for (std::size_t i : pruned.accepted) report.p[i] = 1.0;

  const std::size_t m = pruned.remaining.size();
  const std::size_t k = pruned.reduced_budget;
  if (m > 0 && k == m) {
    for (std::size_t i : pruned.remaining) report.p[i] = 1.0;
  } else if (m > 0 && k > 0) {
    const Instance reduced = instance.subset(pruned.remaining, k);
    std::vector<double> reduced_floor;
    if (!floor.empty()) {
      for (std::size_t i : pruned.remaining) reduced_floor.push_back(floor[i]);
    }
    const bool floor_free = std::all_of(reduced_floor.begin(), reduced_floor.end(),
                                        [](double f) { return f == 0.0; });
    CutMaster master(reduced, group_candidates(reduced, reduced_floor, options.group_symmetric),
                     reduced_floor, options.monotone_rows && floor_free, options.simplex);
    report.chain_width = master.chain_width();
    const std::size_t g = master.num_groups();

    // Best point seen so far (group space) and its exact worst-case value. The LP objective
    // bounds the optimum from above, so the incumbent is optimal once it is within tolerance.
    std::vector<double> incumbent;
    double incumbent_value = -1.0;
    auto offer = [&](std::span<const double> point, double value) {
      if (value > incumbent_value) {
        incumbent_value = value;
        incumbent.assign(point.begin(), point.begin() + static_cast<std::ptrdiff_t>(g));
      }
    };
    bool converged = false;
    while (report.iterations < options.max_iters) {
      const lp::LpSolution solution = master.solve();
      ++report.iterations;
      if (solution.status != lp::Status::kOptimal) {
        throw SolverFailure(std::string("LP solve failed: ") + lp::to_string(solution.status));
      }
      const std::vector<double>& x = solution.values;
      const double v = x[g];
      report.bound = v;
      const Marginals p = master.expand(x);
      const std::vector<Cut> cuts = separate(p, v, reduced, options.tolerance);
      if (cuts.empty()) {
        incumbent.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(g));
        converged = true;
        break;
      }
      master.purge_slack_cuts();
      for (const Cut& cut : cuts) report.cuts_added += master.add_cut(cut.members);
      if (!options.stabilize) continue;

      offer(x, min_feasible_value(p, reduced).value);
      const std::vector<double> anchor = incumbent;
      const double anchor_value = incumbent_value;
      for (double step : kStabilizationSteps) {
        if (incumbent_value >= v - options.tolerance) break;
        std::vector<double> mixed(g);
        for (std::size_t gi = 0; gi < g; ++gi) mixed[gi] = step * x[gi] + (1 - step) * anchor[gi];
        const Marginals q = master.expand(mixed);
        const double target = step * v + (1 - step) * anchor_value;
        for (const Cut& cut : separate(q, target, reduced, options.tolerance)) {
          report.cuts_added += master.add_cut(cut.members);
        }
        offer(mixed, min_feasible_value(q, reduced).value);
      }
      if (incumbent_value >= v - options.tolerance) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw SolverFailure("cutting-plane loop hit the iteration limit of " +
                          std::to_string(options.max_iters));
    }
    report.lp_rows = master.rows();
    report.bound += static_cast<double>(pruned.accepted.size());
    report.symmetry_groups.reserve(master.groups().size());
    for (const IndexSet& members : master.groups()) {
      IndexSet original;
      for (std::size_t t : members) original.push_back(pruned.remaining[t]);
      report.symmetry_groups.push_back(std::move(original));
    }

    Marginals reduced_p = master.expand(incumbent);
    std::vector<double> lo(m, 0.0), hi(m, 1.0);
    if (!reduced_floor.empty()) lo = reduced_floor;
    repair_marginals(reduced_p, lo, hi, static_cast<double>(k));
    for (std::size_t t = 0; t < m; ++t) report.p[pruned.remaining[t]] = reduced_p[t];
  } else {
    report.bound = static_cast<double>(pruned.accepted.size() + (k == m ? m : 0));
  }
  report.value = worst_case_utility(report.p, instance);
  if (m == 0 || k == 0 || k == m) report.bound = report.value;
  return report;
}

}  // namespace

ChainPartition chain_cover(const OrderCounts& counts) {
  const std::size_t n = counts.above.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (counts.above[a] != counts.above[b]) return counts.above[a] < counts.above[b];
    if (counts.below[a] != counts.below[b]) return counts.below[a] > counts.below[b];
    return a < b;
  });
  ChainPartition cover;
  // Tails kept sorted by B; a point joins the chain with the smallest tail B >= its B.
  std::vector<std::pair<std::size_t, std::size_t>> tails;  // (tail B, chain)
  for (std::size_t i : order) {
    const std::size_t b = counts.below[i];
    auto it = std::lower_bound(tails.begin(), tails.end(), std::make_pair(b, std::size_t{0}));
    if (it == tails.end()) {
      tails.emplace_back(b, cover.chains.size());
      cover.chains.push_back({i});
    } else {
      cover.chains[it->second].push_back(i);
      it->first = b;
    }
  }
  return cover;
}

std::vector<std::pair<std::size_t, std::size_t>> dominance_cover(const OrderCounts& counts) {
  const std::size_t n = counts.above.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (counts.above[a] != counts.above[b]) return counts.above[a] < counts.above[b];
    if (counts.below[a] != counts.below[b]) return counts.below[a] > counts.below[b];
    return a < b;
  });
  // For each a, scan the points it dominates in (A ascending, B descending) order; one is
  // covered by a exactly when its B beats every B seen before it. Copies of a are linked to a
  // directly and do not block anything.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < n; ++a) {
    long best = -1;
    for (std::size_t b : order) {
      if (b == a || counts.above[b] < counts.above[a] || counts.below[b] > counts.below[a]) continue;
      if (counts.above[b] == counts.above[a] && counts.below[b] == counts.below[a]) {
        pairs.emplace_back(a, b);
        continue;
      }
      const auto below = static_cast<long>(counts.below[b]);
      if (below > best) pairs.emplace_back(a, b);
      best = std::max(best, below);
    }
  }
  return pairs;
}

PruneResult prune(const Instance& instance) { return prune_with_floor(instance, {}); }

std::vector<IndexSet> symmetry_groups(const Instance& instance) {
  return group_candidates(instance, {}, true);
}

SolveReport solve_ex_ante(const Instance& instance, const SolveOptions& options) {
  return solve_with_floor(instance, {}, options);
}

std::vector<Marginals> solve_monotone_sequence(const Instance& instance,
                                               const SolveOptions& options) {
  if (instance.budget() == 0) throw PreconditionError("the monotone sequence needs k >= 1");
  std::vector<Marginals> sequence;
  std::vector<double> floor(instance.size(), 0.0);
  for (std::size_t budget = 1; budget <= instance.budget(); ++budget) {
    const Instance step = instance.with_budget(budget);
    Marginals p = enforce(solve_with_floor(step, floor, options).p, step);
    floor = p;
    sequence.push_back(std::move(p));
  }
  return sequence;
}

UniformReport solve_uniform(const Instance& instance, const SolveOptions& options) {
  const std::size_t n = instance.size();
  const std::size_t k = instance.budget();
  UniformReport report;
  report.p.assign(n, 0.0);
  if (k > 0 && k < n) {
    // Variables: x_0..x_{n-1}, v, c.
    const std::size_t v = n, c = n + 1;
    lp::LinearProgram program;
    program.objective.assign(n + 2, 0.0);
    program.objective[v] = 1.0;
    program.bounds.assign(n, {0.0, 1.0});
    program.bounds.push_back({0.0, static_cast<double>(k)});
    program.bounds.push_back({0.0, 1.0});
    lp::Constraint total{std::vector<double>(n + 2, 0.0), lp::Relation::kEqual,
                         static_cast<double>(k)};
    std::fill(total.coefficients.begin(), total.coefficients.begin() + static_cast<std::ptrdiff_t>(n), 1.0);
    program.constraints.push_back(std::move(total));
    auto add_cut = [&](const IndexSet& members) {
      lp::Constraint cut{std::vector<double>(n + 2, 0.0), lp::Relation::kLessEqual, 0.0};
      cut.coefficients[v] = 1.0;
      for (std::size_t i : members) cut.coefficients[i] = -1.0;
      program.constraints.push_back(std::move(cut));
    };
    add_cut(seed_members(instance));

    std::vector<std::size_t> tied(n);
    std::iota(tied.begin(), tied.end(), std::size_t{0});
    std::vector<std::pair<std::size_t, std::size_t>> one_or_zero;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (instance.dominates(a, b)) one_or_zero.emplace_back(a, b);
      }
    }

    bool converged = false;
    lp::MipSolution solution;
    while (report.iterations < options.max_iters) {
      solution = lp::solve_mip_three_valued(program, tied, c, one_or_zero, options.mip);
      ++report.iterations;
      report.nodes += solution.nodes;
      if (solution.status != lp::Status::kOptimal) {
        throw SolverFailure(std::string("uniform master problem failed: ") +
                            lp::to_string(solution.status));
      }
      const std::span<const double> x(solution.values.data(), n);
      const std::vector<Cut> cuts = separate(x, solution.values[v], instance, options.tolerance);
      if (cuts.empty()) {
        converged = true;
        break;
      }
      for (const Cut& cut : cuts) add_cut(cut.members);
      report.cuts_added += cuts.size();
    }
    if (!converged) {
      throw SolverFailure("uniform cutting-plane loop hit the iteration limit of " +
                          std::to_string(options.max_iters));
    }
    report.bound = solution.objective_value;
    report.lp_rows = program.constraints.size();
    const double tol = options.mip.integrality_tolerance;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = solution.values[i];
      if (x >= 1.0 - tol) {
        report.accept.push_back(i);
      } else if (x <= tol) {
        report.reject.push_back(i);
      } else {
        report.lottery.push_back(i);
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) (k == n && n > 0 ? report.accept : report.reject).push_back(i);
  }
  for (std::size_t i : report.accept) report.p[i] = 1.0;
  if (!report.lottery.empty()) {
    const double share = static_cast<double>(k - report.accept.size()) /
                         static_cast<double>(report.lottery.size());
    report.lottery_probability = share;
    for (std::size_t i : report.lottery) report.p[i] = share;
  }
  report.value = worst_case_utility(report.p, instance);
  if (k == 0 || k == n) report.bound = report.value;
  return report;
}

}  // namespace merit
