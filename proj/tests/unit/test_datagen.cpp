#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "merit/datagen.hpp"
#include "merit/error.hpp"

namespace merit {
namespace {

ReviewMatrix rows_matrix(const std::vector<std::vector<std::optional<double>>>& rows) {
  ReviewMatrix m;
  m.proposals = rows.size();
  m.reviewers = rows.empty() ? 0 : rows[0].size();
  for (const auto& row : rows) m.scores.insert(m.scores.end(), row.begin(), row.end());
  return m;
}

void expect_interval(const Interval& iv, double lower, double upper, double estimate) {
  EXPECT_NEAR(iv.lower, lower, 1e-12);
  EXPECT_NEAR(iv.upper, upper, 1e-12);
  ASSERT_TRUE(iv.estimate);
  EXPECT_NEAR(*iv.estimate, estimate, 1e-12);
}

TEST(Params, Regimes) {
  const MiscalParams swiss = MiscalParams::swiss_regime();
  EXPECT_EQ(swiss.n_proposals, 350u);
  EXPECT_EQ(swiss.n_reviewers, 10u);
  EXPECT_EQ(swiss.reviews_per_reviewer, 80u);
  const MiscalParams conf = MiscalParams::conference_regime();
  EXPECT_EQ(conf.n_proposals, 1000u);
  EXPECT_EQ(conf.n_reviewers, 1000u);
  EXPECT_EQ(conf.reviews_per_reviewer, 5u);
  MiscalParams bad;
  bad.sigma_b = -1;
  EXPECT_THROW(bad.validate(), InvalidInput);
  bad = MiscalParams{};
  bad.reviews_per_reviewer = 400;
  EXPECT_THROW(bad.validate(), InvalidInput);
}

TEST(GenerateReviews, BalancedAndReproducible) {
  const MiscalParams params = MiscalParams::swiss_regime();
  const ReviewMatrix m = generate_reviews(params, 4);
  EXPECT_EQ(m.present_count(), 800u);
  for (std::size_t r = 0; r < m.reviewers; ++r) {
    std::size_t count = 0;
    for (std::size_t p = 0; p < m.proposals; ++p) count += m.at(p, r).has_value();
    EXPECT_EQ(count, 80u);
  }
  for (std::size_t p = 0; p < m.proposals; ++p) {
    const std::size_t c = m.present(p).size();
    EXPECT_TRUE(c == 2 || c == 3) << c;
    for (double s : m.present(p)) {
      EXPECT_GE(s, 1.0);
      EXPECT_LE(s, 10.0);
    }
  }
  const ReviewMatrix again = generate_reviews(params, 4);
  EXPECT_EQ(again.scores, m.scores);
  EXPECT_EQ(again.true_quality, m.true_quality);
  EXPECT_NE(generate_reviews(params, 5).scores, m.scores);
}

TEST(GenerateReviews, NoiselessScoresAreTheQuality) {
  MiscalParams params;
  params.sigma_theta = 1.0;
  params.sigma_b = params.sigma_eps = params.sigma_a = 0.0;
  params.n_proposals = 30;
  params.n_reviewers = 4;
  params.reviews_per_reviewer = 30;
  const ReviewMatrix m = generate_reviews(params, 9);
  std::vector<double> means;
  for (std::size_t p = 0; p < m.proposals; ++p) {
    for (double s : m.present(p)) EXPECT_DOUBLE_EQ(s, std::clamp(m.true_quality[p], 1.0, 10.0));
    const auto seen = m.present(p);
    means.push_back(seen[0]);
  }
  EXPECT_EQ(true_top_k(means, 10), true_top_k(m.true_quality, 10));
}

TEST(Manski, Examples) {
  ReviewMatrix m = rows_matrix({{4.0, std::nullopt}, {3.0, 5.0}, {std::nullopt, std::nullopt}});
  const IntervalSet set = manski_intervals(m);
  expect_interval(set.intervals[0], 2.5, 7.0, 4.0);
  expect_interval(set.intervals[1], 4.0, 4.0, 4.0);
  expect_interval(set.intervals[2], 1.0, 10.0, 5.5);
  EXPECT_EQ(set.flagged, (IndexSet{2}));
  EXPECT_EQ(set.intervals[0].id, "P1");
  // Median of {4, 1} and {4, 10}.
  expect_interval(manski_intervals(m, Aggregator::kMedian).intervals[0], 2.5, 7.0, 4.0);
}

TEST(Loo, Examples) {
  const ReviewMatrix m = rows_matrix({{2.0, 4.0, 6.0}, {5.0, 5.0, 5.0}, {3.0, 7.0, std::nullopt},
                                      {8.0, std::nullopt, std::nullopt}, {std::nullopt, std::nullopt, std::nullopt}});
  const IntervalSet set = loo_intervals(m);
  expect_interval(set.intervals[0], 3.0, 5.0, 4.0);
  expect_interval(set.intervals[1], 5.0, 5.0, 5.0);
  expect_interval(set.intervals[2], 3.0, 7.0, 5.0);
  EXPECT_EQ(set.flagged, (IndexSet{3, 4}));
}

TEST(Loo, WidthShrinksWithMoreReviews) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(5.5, 1.5);
  auto median_width = [&](std::size_t reviews) {
    ReviewMatrix m;
    m.proposals = 400;
    m.reviewers = reviews;
    for (std::size_t c = 0; c < m.proposals * reviews; ++c) m.scores.push_back(noise(rng));
    std::vector<double> widths;
    for (const Interval& iv : loo_intervals(m).intervals) widths.push_back(iv.upper - iv.lower);
    std::nth_element(widths.begin(), widths.begin() + 200, widths.end());
    return widths[200];
  };
  EXPECT_LT(median_width(10), median_width(3));
}

TEST(LooOffset, RemovesAdditiveOffsets) {
  MiscalParams params;
  params.sigma_eps = 0.0;
  params.sigma_b = 2.0;
  params.n_proposals = 40;
  params.n_reviewers = 6;
  params.reviews_per_reviewer = 20;
  params.score_min = -100;
  params.score_max = 100;
  const ReviewMatrix m = generate_reviews(params, 12);
  const IntervalSet corrected = offset_corrected_loo_intervals(m);
  std::vector<double> centre;
  for (const Interval& iv : corrected.intervals) {
    EXPECT_LT(iv.upper - iv.lower, 1e-6);
    centre.push_back(*iv.estimate);
  }
  EXPECT_EQ(true_top_k(centre, 40), true_top_k(m.true_quality, 40));
  // Raw intervals carry the offsets and are wide.
  double widest = 0;
  for (const Interval& iv : loo_intervals(m).intervals) widest = std::max(widest, iv.upper - iv.lower);
  EXPECT_GT(widest, 0.5);
}

TEST(DropScores, Examples) {
  MiscalParams full;
  full.n_proposals = 10;
  full.n_reviewers = 10;
  full.reviews_per_reviewer = 10;
  const ReviewMatrix m = generate_reviews(full, 1);
  ASSERT_EQ(m.present_count(), 100u);

  const DropResult none = drop_scores(m, 0.0, 2);
  EXPECT_EQ(none.matrix.scores, m.scores);
  EXPECT_EQ(none.dropped, 0u);

  const DropResult some = drop_scores(m, 0.4, 2);
  EXPECT_EQ(some.requested, 40u);
  EXPECT_EQ(some.matrix.present_count(), 60u);
  for (std::size_t p = 0; p < 10; ++p) EXPECT_GE(some.matrix.present(p).size(), 1u);
  EXPECT_FALSE(some.guard_bound);

  MiscalParams sparse;
  sparse.n_proposals = 50;
  sparse.n_reviewers = 4;
  sparse.reviews_per_reviewer = 25;  // two reviews per proposal
  const DropResult most = drop_scores(generate_reviews(sparse, 3), 0.99, 4);
  EXPECT_TRUE(most.guard_bound);
  EXPECT_EQ(most.matrix.present_count(), 50u);
  EXPECT_THROW(drop_scores(m, 1.0, 1), InvalidInput);
}

TEST(Utility, TopAndExpectation) {
  EXPECT_EQ(true_top_k({0.3, 0.9, 0.5, 0.9}, 2), (IndexSet{1, 3}));
  EXPECT_EQ(true_top_k({1, 2}, 5), (IndexSet{1, 0}));
  EXPECT_DOUBLE_EQ(expected_utility(std::vector<double>{0.5, 1, 0, 0.5}, {1, 3}), 0.75);
  EXPECT_DOUBLE_EQ(expected_utility(std::vector<double>{0.5, 0.5}, {}), 0.0);
}

TEST(IntervalMethods, NamesRoundTrip) {
  for (IntervalMethod m : {IntervalMethod::kLoo, IntervalMethod::kManskiMean, IntervalMethod::kManskiMedian,
                           IntervalMethod::kLooOffset}) {
    EXPECT_EQ(parse_interval_method(interval_method_name(m)), m);
  }
  EXPECT_THROW(parse_interval_method("gaussian"), InvalidInput);
}

TEST(TrialSeed, DistinctPerTrial) {
  std::set<std::uint64_t> seen;
  for (std::size_t t = 0; t < 1000; ++t) seen.insert(trial_seed(1, t));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(trial_seed(7, 3), trial_seed(7, 3));
}

TEST(ConferenceInstance, ShapeAndBudget) {
  const Instance inst = conference_instance(300, 1.0 / 3, 5);
  EXPECT_EQ(inst.size(), 300u);
  EXPECT_EQ(inst.budget(), 100u);
  EXPECT_TRUE(inst.has_estimates());
  EXPECT_THROW(conference_instance(10, 1.5, 1), InvalidInput);
}

TEST(Comparison, NoiselessGivesPerfectUtility) {
  ComparisonConfig config;
  config.params.sigma_b = config.params.sigma_eps = 0.0;
  config.params.n_proposals = 60;
  config.params.n_reviewers = 6;
  config.params.reviews_per_reviewer = 30;
  config.rules = {"merit", "merit-monotone", "swissnsf", "rat", "det", "det-mean"};
  config.trials = 3;
  config.bootstrap_resamples = 50;
  const ComparisonResult result = run_comparison(config);
  for (const SummaryRow& row : result.summary) {
    if (row.metric != "expected_utility") continue;
    EXPECT_NEAR(row.mean, 1.0, 1e-9) << row.rule;
    EXPECT_EQ(row.trials, 3u);
  }
  EXPECT_EQ(result.summary.size(), 12u);
}

TEST(Comparison, MeritWinsTheWorstCaseEveryTrial) {
  ComparisonConfig config;
  config.params.n_proposals = 80;
  config.params.n_reviewers = 8;
  config.params.reviews_per_reviewer = 30;
  config.trials = 4;
  config.bootstrap_resamples = 20;
  config.rules = {"merit", "swissnsf", "det"};
  const ComparisonResult result = run_comparison(config);
  std::map<std::pair<std::size_t, std::string>, double> worst;
  for (const TrialRecord& r : result.records) {
    ASSERT_NE(r.metric, "error") << r.note;
    if (r.metric == "worst_case_utility") worst[{r.trial, r.rule}] = r.value;
  }
  for (std::size_t t = 0; t < config.trials; ++t) {
    EXPECT_GE((worst[{t, "merit"}]), (worst[{t, "swissnsf"}]) - 1e-9);
    EXPECT_GE((worst[{t, "merit"}]), (worst[{t, "det"}]) - 1e-9);
  }
}

TEST(Comparison, ReproducibleCsv) {
  ComparisonConfig config;
  config.params.n_proposals = 40;
  config.params.n_reviewers = 5;
  config.params.reviews_per_reviewer = 16;
  config.trials = 2;
  config.bootstrap_resamples = 30;
  config.sparsity = 0.2;
  const ComparisonResult a = run_comparison(config);
  const ComparisonResult b = run_comparison(config);
  EXPECT_EQ(records_csv(a), records_csv(b));
  EXPECT_EQ(summary_csv(a), summary_csv(b));
  EXPECT_EQ(records_csv(a).substr(0, 27), "trial,rule,metric,value,not");
  EXPECT_EQ(summary_csv(a).rfind("rule,metric,trials,mean,ci_low,ci_high\n", 0), 0u);
}

}  // namespace
}  // namespace merit
