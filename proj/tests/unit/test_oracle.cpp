#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "../support/brute.hpp"
#include "merit/oracle.hpp"

namespace merit {
namespace {

bool is_feasible_set(const IndexSet& members, const Instance& inst) {
  const auto sets = testing::topk_by_mask(inst);
  return std::find(sets.begin(), sets.end(), members) != sets.end();
}

TEST(Separate, AcceptsTightPoint) {
  const std::vector<double> p(4, 0.5);
  EXPECT_TRUE(separate(p, 1.0, testing::identical(4, 2)).empty());
}

TEST(Separate, ReportsViolatedPair) {
  const std::vector<double> p(4, 0.5);
  const auto cuts = separate(p, 1.2, testing::identical(4, 2));
  ASSERT_FALSE(cuts.empty());
  for (const Cut& cut : cuts) EXPECT_DOUBLE_EQ(cut.value, 1.0);
}

TEST(Separate, FindsCheapFeasibleSet) {
  const std::vector<double> p{1, 1, 0, 0};
  const auto cuts = separate(p, 2.0, testing::four_candidates(2));
  ASSERT_FALSE(cuts.empty());
  bool found = false;
  for (const Cut& cut : cuts) {
    if ((cut.members == IndexSet{0, 2} || cut.members == IndexSet{0, 3}) && cut.value == 1.0) found = true;
  }
  EXPECT_TRUE(found);
}

TEST(MinFeasible, Examples) {
  const Cut unique = min_feasible_value(std::vector<double>{1, 1, 0}, testing::disjoint(3, 2));
  EXPECT_DOUBLE_EQ(unique.value, 2.0);
  EXPECT_EQ(unique.members, (IndexSet{0, 1}));

  const Cut cheap = min_feasible_value(std::vector<double>{0.9, 0.8, 0.1, 0.1, 0.1}, testing::identical(5, 2));
  EXPECT_NEAR(cheap.value, 0.2, 1e-15);
  ASSERT_EQ(cheap.members.size(), 2u);
  EXPECT_GE(cheap.members[0], 2u);
}

// Random p on random intervals: the oracle minimum is the enumerated minimum, every reported
// cut is a real feasible set that is violated, and nothing is reported at the minimum itself.
TEST(Separate, MatchesEnumeration) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 1 + trial % 10;
    const std::size_t k = 1 + trial % n;
    const Instance inst = trial % 3 ? testing::random_instance(rng, n, k)
                                    : testing::random_grid_instance(rng, n, k);
    std::vector<double> p(n);
    for (double& x : p) x = unit(rng);
    // Ties in p exercise the ordering inside the oracle.
    if (trial % 4 == 0) for (double& x : p) x = std::round(x * 3) / 3;
    const double truth = testing::brute_min(p, inst);

    const Cut best = min_feasible_value(p, inst);
    EXPECT_NEAR(best.value, truth, 1e-12);
    EXPECT_TRUE(is_feasible_set(best.members, inst));
    EXPECT_NEAR(testing::set_value(p, best.members), best.value, 1e-12);

    EXPECT_TRUE(separate(p, truth, inst).empty());
    const auto cuts = separate(p, truth + 0.05, inst);
    ASSERT_FALSE(cuts.empty());
    double lowest = 1e300;
    for (const Cut& cut : cuts) {
      EXPECT_TRUE(is_feasible_set(cut.members, inst));
      EXPECT_LT(cut.value, truth + 0.05 - kViolationTolerance);
      lowest = std::min(lowest, cut.value);
    }
    EXPECT_NEAR(lowest, truth, 1e-12);
  }
}

}  // namespace
}  // namespace merit
