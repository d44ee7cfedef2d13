#include "merit/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>
#include <tuple>

#include "merit/error.hpp"
#include "merit/rules.hpp"
#include "merit/sampling.hpp"

namespace merit {
namespace {

double mean_of(const std::vector<double>& values) {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  return m % 2 == 1 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
}

std::string proposal_id(std::size_t p) { return "P" + std::to_string(p + 1); }

Interval make_interval(std::size_t p, double lower, double upper, double estimate) {
  return Interval{proposal_id(p), lower, upper, std::clamp(estimate, lower, upper)};
}

IntervalSet loo_from_rows(const std::vector<std::vector<double>>& rows, double lo, double hi) {
  IntervalSet out;
  for (std::size_t p = 0; p < rows.size(); ++p) {
    const std::vector<double>& s = rows[p];
    if (s.empty()) {
      out.intervals.push_back(make_interval(p, lo, hi, 0.5 * (lo + hi)));
      out.flagged.push_back(p);
      continue;
    }
    const double total = std::accumulate(s.begin(), s.end(), 0.0);
    const double mean = total / static_cast<double>(s.size());
    if (s.size() == 1) {
      out.intervals.push_back(make_interval(p, s[0], s[0], s[0]));
      out.flagged.push_back(p);
      continue;
    }
    double lower = INFINITY, upper = -INFINITY;
    for (double x : s) {
      const double left_out = (total - x) / static_cast<double>(s.size() - 1);
      lower = std::min(lower, left_out);
      upper = std::max(upper, left_out);
    }
    out.intervals.push_back(make_interval(p, lower, upper, mean));
  }
  return out;
}

std::vector<std::vector<double>> present_rows(const ReviewMatrix& matrix) {
  std::vector<std::vector<double>> rows(matrix.proposals);
  for (std::size_t p = 0; p < matrix.proposals; ++p) rows[p] = matrix.present(p);
  return rows;
}

double percentile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::string format_number(double x) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.10g", x);
  return buffer;
}

}  // namespace

std::vector<double> ReviewMatrix::present(std::size_t p) const {
  std::vector<double> out;
  for (std::size_t r = 0; r < reviewers; ++r) {
    if (at(p, r)) out.push_back(*at(p, r));
  }
  return out;
}

std::size_t ReviewMatrix::present_count() const {
  return static_cast<std::size_t>(
      std::count_if(scores.begin(), scores.end(), [](const auto& s) { return s.has_value(); }));
}

void MiscalParams::validate() const {
  if (sigma_theta < 0 || sigma_b < 0 || sigma_eps < 0 || sigma_a < 0) {
    throw InvalidInput("standard deviations must be non-negative");
  }
  if (n_proposals == 0 || n_reviewers == 0) throw InvalidInput("need proposals and reviewers");
  if (reviews_per_reviewer > n_proposals) {
    throw InvalidInput("a reviewer cannot review more proposals than exist");
  }
  if (!(score_min < score_max)) throw InvalidInput("score range is empty");
}

MiscalParams MiscalParams::swiss_regime() { return MiscalParams{}; }

MiscalParams MiscalParams::conference_regime() {
  MiscalParams params;
  params.n_proposals = 1000;
  params.n_reviewers = 1000;
  params.reviews_per_reviewer = 5;
  return params;
}

namespace {

struct ReviewDraw {
  std::vector<double> quality;
  std::vector<std::tuple<std::size_t, std::size_t, double>> cells;  // (proposal, reviewer, score)
};

ReviewDraw draw_reviews(const MiscalParams& params, std::uint64_t seed) {
  params.validate();
  Xoshiro256 rng(seed);
  std::normal_distribution<double> standard(0.0, 1.0);
  const std::size_t n = params.n_proposals;
  const std::size_t reviewers = params.n_reviewers;

  ReviewDraw draw;
  const double mid = 0.5 * (params.score_min + params.score_max);
  for (std::size_t p = 0; p < n; ++p) draw.quality.push_back(mid + params.sigma_theta * standard(rng));
  std::vector<double> offset(reviewers), scale(reviewers, 1.0);
  // Log-normal scale with mean 1 and standard deviation sigma_a.
  const double s2 = std::log1p(params.sigma_a * params.sigma_a);
  for (std::size_t r = 0; r < reviewers; ++r) {
    offset[r] = params.sigma_b * standard(rng);
    if (params.sigma_a > 0) scale[r] = std::exp(-0.5 * s2 + std::sqrt(s2) * standard(rng));
  }

  std::vector<std::size_t> load(n, 0);
  std::vector<std::uint64_t> tiebreak(n);
  std::vector<std::size_t> order(n);
  draw.cells.reserve(reviewers * params.reviews_per_reviewer);
  for (std::size_t r = 0; r < reviewers; ++r) {
    for (std::size_t p = 0; p < n; ++p) tiebreak[p] = rng();
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto cut = order.begin() + static_cast<std::ptrdiff_t>(params.reviews_per_reviewer);
    std::nth_element(order.begin(), cut, order.end(), [&](std::size_t a, std::size_t b) {
      return load[a] != load[b] ? load[a] < load[b] : tiebreak[a] < tiebreak[b];
    });
    for (auto it = order.begin(); it != cut; ++it) {
      const std::size_t p = *it;
      ++load[p];
      const double y = scale[r] * draw.quality[p] + offset[r] + params.sigma_eps * standard(rng);
      draw.cells.emplace_back(p, r, std::clamp(y, params.score_min, params.score_max));
    }
  }
  return draw;
}

}  // namespace

ReviewMatrix generate_reviews(const MiscalParams& params, std::uint64_t seed) {
  ReviewDraw draw = draw_reviews(params, seed);
  ReviewMatrix matrix;
  matrix.proposals = params.n_proposals;
  matrix.reviewers = params.n_reviewers;
  matrix.scores.assign(matrix.proposals * matrix.reviewers, std::nullopt);
  matrix.score_min = params.score_min;
  matrix.score_max = params.score_max;
  matrix.true_quality = std::move(draw.quality);
  for (const auto& [p, r, score] : draw.cells) matrix.at(p, r) = score;
  return matrix;
}

IntervalSet manski_intervals(const ReviewMatrix& matrix, Aggregator aggregator) {
  IntervalSet out;
  auto aggregate = [&](const std::vector<double>& v) {
    return aggregator == Aggregator::kMean ? mean_of(v) : median_of(v);
  };
  for (std::size_t p = 0; p < matrix.proposals; ++p) {
    std::vector<double> low, high;
    for (std::size_t r = 0; r < matrix.reviewers; ++r) {
      const auto& s = matrix.at(p, r);
      low.push_back(s ? *s : matrix.score_min);
      high.push_back(s ? *s : matrix.score_max);
    }
    const std::vector<double> seen = matrix.present(p);
    if (seen.empty()) {
      out.intervals.push_back(make_interval(p, matrix.score_min, matrix.score_max,
                                            0.5 * (matrix.score_min + matrix.score_max)));
      out.flagged.push_back(p);
      continue;
    }
    out.intervals.push_back(make_interval(p, aggregate(low), aggregate(high), aggregate(seen)));
  }
  return out;
}

IntervalSet loo_intervals(const ReviewMatrix& matrix) {
  return loo_from_rows(present_rows(matrix), matrix.score_min, matrix.score_max);
}

IntervalSet offset_corrected_loo_intervals(const ReviewMatrix& matrix) {
  const std::size_t n = matrix.proposals;
  const std::size_t reviewers = matrix.reviewers;
  std::vector<double> quality(n, 0.0), offset(reviewers, 0.0);
  // Alternating least squares for y = quality_p + offset_r with offsets centred at 0.
  for (int sweep = 0; sweep < 500; ++sweep) {
    for (std::size_t p = 0; p < n; ++p) {
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t r = 0; r < reviewers; ++r) {
        if (const auto& s = matrix.at(p, r)) {
          sum += *s - offset[r];
          ++count;
        }
      }
      quality[p] = count ? sum / static_cast<double>(count) : 0.0;
    }
    double change = 0.0, mean_offset = 0.0;
    for (std::size_t r = 0; r < reviewers; ++r) {
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t p = 0; p < n; ++p) {
        if (const auto& s = matrix.at(p, r)) {
          sum += *s - quality[p];
          ++count;
        }
      }
      const double updated = count ? sum / static_cast<double>(count) : 0.0;
      change = std::max(change, std::fabs(updated - offset[r]));
      offset[r] = updated;
      mean_offset += updated;
    }
    mean_offset /= static_cast<double>(reviewers);
    for (double& b : offset) b -= mean_offset;
    if (change < 1e-10) break;
  }
  std::vector<std::vector<double>> rows(n);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t r = 0; r < reviewers; ++r) {
      if (const auto& s = matrix.at(p, r)) rows[p].push_back(*s - offset[r]);
    }
  }
  return loo_from_rows(rows, matrix.score_min, matrix.score_max);
}

DropResult drop_scores(const ReviewMatrix& matrix, double sparsity, std::uint64_t seed) {
  if (!(sparsity >= 0.0 && sparsity < 1.0)) throw InvalidInput("sparsity must lie in [0, 1)");
  DropResult result{matrix, 0, 0, false};
  std::vector<std::size_t> cells;
  std::vector<std::size_t> remaining(matrix.proposals, 0);
  for (std::size_t c = 0; c < matrix.scores.size(); ++c) {
    if (matrix.scores[c]) {
      cells.push_back(c);
      ++remaining[c / matrix.reviewers];
    }
  }
  result.requested = static_cast<std::size_t>(std::floor(sparsity * static_cast<double>(cells.size())));
  Xoshiro256 rng(seed);
  for (std::size_t t = cells.size(); t > 1; --t) std::swap(cells[t - 1], cells[rng.below(t)]);
  for (std::size_t c : cells) {
    if (result.dropped == result.requested) break;
    const std::size_t p = c / matrix.reviewers;
    if (remaining[p] <= 1) continue;
    result.matrix.scores[c].reset();
    --remaining[p];
    ++result.dropped;
  }
  result.guard_bound = result.dropped < result.requested;
  return result;
}

IndexSet true_top_k(const std::vector<double>& quality, std::size_t k) {
  IndexSet order(quality.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return quality[a] > quality[b]; });
  order.resize(std::min(k, order.size()));
  return order;
}

double expected_utility(std::span<const double> p, const IndexSet& true_top) {
  if (true_top.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i : true_top) total += p[i];
  return total / static_cast<double>(true_top.size());
}

Instance conference_instance(std::size_t n, double acceptance_rate, std::uint64_t seed) {
  if (!(acceptance_rate >= 0.0 && acceptance_rate <= 1.0)) throw InvalidInput("acceptance rate must lie in [0, 1]");
  MiscalParams params = MiscalParams::conference_regime();
  params.n_proposals = n;
  params.n_reviewers = n;
  params.reviews_per_reviewer = std::min<std::size_t>(5, n);
  const auto k = static_cast<std::size_t>(std::llround(acceptance_rate * static_cast<double>(n)));
  // Score lists straight from the draw; a dense n x n matrix would not fit at this size.
  const ReviewDraw draw = draw_reviews(params, seed);
  std::vector<std::vector<double>> rows(n);
  for (const auto& [p, r, score] : draw.cells) rows[p].push_back(score);
  return Instance(loo_from_rows(rows, params.score_min, params.score_max).intervals, k);
}

IntervalMethod parse_interval_method(const std::string& name) {
  if (name == "loo") return IntervalMethod::kLoo;
  if (name == "manski-mean") return IntervalMethod::kManskiMean;
  if (name == "manski-median") return IntervalMethod::kManskiMedian;
  if (name == "loo-offset") return IntervalMethod::kLooOffset;
  throw InvalidInput("unknown interval method '" + name + "'");
}

std::string interval_method_name(IntervalMethod method) {
  switch (method) {
    case IntervalMethod::kLoo: return "loo";
    case IntervalMethod::kManskiMean: return "manski-mean";
    case IntervalMethod::kManskiMedian: return "manski-median";
    case IntervalMethod::kLooOffset: return "loo-offset";
  }
  return "unknown";
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t trial) {
  Xoshiro256 rng(master ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(trial) + 1)));
  return rng();
}

ComparisonResult run_comparison(const ComparisonConfig& config) {
  config.params.validate();
  ComparisonResult result;
  for (std::size_t trial = 0; trial < config.trials; ++trial) {
    const std::uint64_t seed = trial_seed(config.seed, trial);
    ReviewMatrix matrix = generate_reviews(config.params, seed);
    if (config.sparsity > 0.0) matrix = drop_scores(matrix, config.sparsity, seed ^ 0x5bd1e995ULL).matrix;

    IntervalSet set;
    switch (config.intervals) {
      case IntervalMethod::kLoo: set = loo_intervals(matrix); break;
      case IntervalMethod::kManskiMean: set = manski_intervals(matrix, Aggregator::kMean); break;
      case IntervalMethod::kManskiMedian: set = manski_intervals(matrix, Aggregator::kMedian); break;
      case IntervalMethod::kLooOffset: set = offset_corrected_loo_intervals(matrix); break;
    }
    const std::size_t n = matrix.proposals;
    const auto k = static_cast<std::size_t>(
        std::clamp<long long>(std::llround(config.k_fraction * static_cast<double>(n)), 0,
                              static_cast<long long>(n)));
    const Instance instance(std::move(set.intervals), k);
    const IndexSet top = true_top_k(matrix.true_quality, k);

    for (const std::string& rule : config.rules) {
      try {
        Marginals p;
        if (rule == "det-mean") {
          std::vector<double> raw(n);
          for (std::size_t i = 0; i < n; ++i) {
            const std::vector<double> seen = matrix.present(i);
            raw[i] = seen.empty() ? 0.5 * (matrix.score_min + matrix.score_max) : mean_of(seen);
          }
          p.assign(n, 0.0);
          for (std::size_t i : true_top_k(raw, k)) p[i] = 1.0;
        } else {
          p = run_rule(parse_method(rule), instance).p;
        }
        result.records.push_back({trial, rule, "expected_utility", expected_utility(p, top), ""});
        result.records.push_back(
            {trial, rule, "worst_case_utility", normalized_worst_case_utility(p, instance), ""});
      } catch (const std::exception& error) {
        result.records.push_back({trial, rule, "error", NAN, error.what()});
      }
    }
  }

  std::map<std::pair<std::string, std::string>, std::vector<double>> grouped;
  for (const TrialRecord& record : result.records) {
    if (record.metric != "error") grouped[{record.rule, record.metric}].push_back(record.value);
  }
  Xoshiro256 rng(config.seed ^ 0xb5ad4eceda1ce2a9ULL);
  for (const std::string& rule : config.rules) {
    for (const char* metric : {"expected_utility", "worst_case_utility"}) {
      auto it = grouped.find({rule, metric});
      if (it == grouped.end()) continue;
      const std::vector<double>& values = it->second;
      SummaryRow row{rule, metric, values.size(), mean_of(values), 0.0, 0.0};
      std::vector<double> means;
      for (std::size_t b = 0; b < config.bootstrap_resamples; ++b) {
        double sum = 0.0;
        for (std::size_t t = 0; t < values.size(); ++t) sum += values[rng.below(values.size())];
        means.push_back(sum / static_cast<double>(values.size()));
      }
      row.ci_low = means.empty() ? row.mean : percentile(means, 0.025);
      row.ci_high = means.empty() ? row.mean : percentile(means, 0.975);
      result.summary.push_back(row);
    }
  }
  return result;
}

std::string records_csv(const ComparisonResult& result) {
  std::string out = "trial,rule,metric,value,note\n";
  for (const TrialRecord& r : result.records) {
    std::string note = r.note;
    std::replace(note.begin(), note.end(), ',', ';');
    out += std::to_string(r.trial) + "," + r.rule + "," + r.metric + "," + format_number(r.value) +
           "," + note + "\n";
  }
  return out;
}

std::string summary_csv(const ComparisonResult& result) {
  std::string out = "rule,metric,trials,mean,ci_low,ci_high\n";
  for (const SummaryRow& r : result.summary) {
    out += r.rule + "," + r.metric + "," + std::to_string(r.trials) + "," + format_number(r.mean) + "," +
           format_number(r.ci_low) + "," + format_number(r.ci_high) + "\n";
  }
  return out;
}

}  // namespace merit
