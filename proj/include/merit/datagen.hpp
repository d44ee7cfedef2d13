#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "merit/model.hpp"

namespace merit {

struct ReviewMatrix {
  std::size_t proposals = 0;
  std::size_t reviewers = 0;
  std::vector<std::optional<double>> scores;  // row-major, proposals x reviewers
  std::vector<double> true_quality;           // empty for ingested data
  double score_min = 1.0;
  double score_max = 10.0;

  std::optional<double>& at(std::size_t p, std::size_t r) { return scores[p * reviewers + r]; }
  const std::optional<double>& at(std::size_t p, std::size_t r) const { return scores[p * reviewers + r]; }
  std::vector<double> present(std::size_t p) const;
  std::size_t present_count() const;
};

// Linear miscalibration model: y = a_r * theta_p + b_r + noise, clamped to the score range.
struct MiscalParams {
  double sigma_theta = 2.0;
  double sigma_b = 1.0;
  double sigma_eps = 0.5;
  double sigma_a = 0.0;  // 0 disables the multiplicative term
  std::size_t n_proposals = 350;
  std::size_t n_reviewers = 10;
  std::size_t reviews_per_reviewer = 80;
  double score_min = 1.0;
  double score_max = 10.0;

  void validate() const;
  static MiscalParams swiss_regime();       // 350 proposals, 10 reviewers, 80 each
  static MiscalParams conference_regime();  // 1000 papers, 1000 reviewers, 5 each
};

// Each reviewer scores reviews_per_reviewer distinct proposals drawn at random among the
// least-loaded ones, so coverage stays balanced.
ReviewMatrix generate_reviews(const MiscalParams& params, std::uint64_t seed);

struct IntervalSet {
  std::vector<Interval> intervals;  // ids "P1", "P2", ...
  IndexSet flagged;                 // proposals whose data could not support a proper interval
};

enum class Aggregator { kMean, kMedian };

// Missing entries imputed at the range minimum (lower) and maximum (upper).
IntervalSet manski_intervals(const ReviewMatrix& matrix, Aggregator aggregator = Aggregator::kMean);
// Range of the means obtained by leaving out one present score at a time.
IntervalSet loo_intervals(const ReviewMatrix& matrix);
// Leave-one-out intervals on scores with fitted additive reviewer offsets removed.
IntervalSet offset_corrected_loo_intervals(const ReviewMatrix& matrix);

struct DropResult {
  ReviewMatrix matrix;
  std::size_t requested = 0;
  std::size_t dropped = 0;
  bool guard_bound = false;  // fewer than requested were dropped to keep one score per proposal
};

DropResult drop_scores(const ReviewMatrix& matrix, double sparsity, std::uint64_t seed);

// Candidates sorted by decreasing true quality (ties by position).
IndexSet true_top_k(const std::vector<double>& quality, std::size_t k);
// sum_{i in true top k} p_i / k.
double expected_utility(std::span<const double> p, const IndexSet& true_top);

// Scaling workload: conference regime with n proposals and n reviewers scoring 5 each,
// leave-one-out intervals, budget round(acceptance_rate * n).
Instance conference_instance(std::size_t n, double acceptance_rate, std::uint64_t seed);

enum class IntervalMethod { kLoo, kManskiMean, kManskiMedian, kLooOffset };
IntervalMethod parse_interval_method(const std::string& name);
std::string interval_method_name(IntervalMethod method);

struct ComparisonConfig {
  MiscalParams params;
  IntervalMethod intervals = IntervalMethod::kLoo;
  // merit, merit-uniform, merit-monotone, swissnsf, rat, det (estimates of the interval
  // method) and det-mean (raw mean score).
  std::vector<std::string> rules = {"merit", "swissnsf", "det-mean"};
  double k_fraction = 0.3;
  std::size_t trials = 50;
  std::uint64_t seed = 1;
  double sparsity = 0.0;
  std::size_t bootstrap_resamples = 2000;
};

struct TrialRecord {
  std::size_t trial = 0;
  std::string rule;
  std::string metric;  // expected_utility | worst_case_utility | error
  double value = 0.0;
  std::string note;
};

struct SummaryRow {
  std::string rule;
  std::string metric;
  std::size_t trials = 0;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct ComparisonResult {
  std::vector<TrialRecord> records;
  std::vector<SummaryRow> summary;
};

ComparisonResult run_comparison(const ComparisonConfig& config);
std::uint64_t trial_seed(std::uint64_t master, std::size_t trial);
std::string records_csv(const ComparisonResult& result);
std::string summary_csv(const ComparisonResult& result);

}  // namespace merit
