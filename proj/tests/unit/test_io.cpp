#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include <unistd.h>

#include "../support/brute.hpp"
#include "merit/error.hpp"
#include "merit/io.hpp"
#include "merit/rules.hpp"

namespace merit {
namespace {

std::vector<Interval> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_intervals_csv(in);
}

std::string message_of(const std::string& text) {
  try {
    parse(text);
  } catch (const InvalidInput& e) {
    return e.what();
  }
  return "";
}

std::filesystem::path scratch(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("merit_io_" + std::to_string(::getpid()) + "_" + name);
}

TEST(IntervalsCsv, AnyColumnOrderQuotesAndBom) {
  const auto rows = parse("\xEF\xBB\xBFupper,id,lower\n2,\"a,b\",1\n\n 5 , c , 3\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].id, "a,b");
  EXPECT_DOUBLE_EQ(rows[0].lower, 1);
  EXPECT_DOUBLE_EQ(rows[0].upper, 2);
  EXPECT_FALSE(rows[0].estimate);
  EXPECT_EQ(rows[1].id, "c");
  EXPECT_DOUBLE_EQ(rows[1].lower, 3);
}

TEST(IntervalsCsv, EstimateColumnAndWindowsLineEnds) {
  const auto rows = parse("id,lower,upper,estimate\r\nx,0,1,0.25\r\ny,0,1,\r\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_DOUBLE_EQ(*rows[0].estimate, 0.25);
  EXPECT_FALSE(rows[1].estimate);
}

TEST(IntervalsCsv, ErrorsNameTheLine) {
  EXPECT_NE(message_of("id,lower,upper\na,0,1\nb,zero,1\n").find("line 3"), std::string::npos);
  EXPECT_NE(message_of("id,lower\na,0\n").find("upper"), std::string::npos);
  EXPECT_NE(message_of("id,lower,upper\na,0\n").find("line 2"), std::string::npos);
  EXPECT_NE(message_of("id,id,lower,upper\n").find("duplicate"), std::string::npos);
  EXPECT_NE(message_of("").find("header"), std::string::npos);
}

TEST(IntervalsJson, BothShapes) {
  const auto bare = parse_intervals_json(nlohmann::json::parse(R"([{"id":"a","lower":0,"upper":1}])"));
  ASSERT_EQ(bare.size(), 1u);
  EXPECT_FALSE(bare[0].estimate);
  const auto wrapped = parse_intervals_json(
      nlohmann::json::parse(R"({"intervals":[{"id":"a","lower":0,"upper":1,"estimate":0.5}]})"));
  EXPECT_DOUBLE_EQ(*wrapped[0].estimate, 0.5);
  EXPECT_THROW(parse_intervals_json(nlohmann::json::parse(R"({"x":1})")), InvalidInput);
  EXPECT_THROW(parse_intervals_json(nlohmann::json::parse(R"([{"id":"a","lower":"zero","upper":1}])")),
               InvalidInput);
}

TEST(IntervalsCsv, WriteReadIsExact) {
  std::mt19937_64 rng(1);
  const Instance inst = testing::random_instance(rng, 20, 5);
  const auto back = parse(intervals_csv(inst.intervals()));
  ASSERT_EQ(back.size(), inst.size());
  for (std::size_t i = 0; i < inst.size(); ++i) {
    EXPECT_EQ(back[i].id, inst[i].id);
    EXPECT_EQ(back[i].lower, inst.lower(i));
    EXPECT_EQ(back[i].upper, inst.upper(i));
    EXPECT_EQ(*back[i].estimate, *inst[i].estimate);
  }
}

TEST(LoadIntervals, DispatchesOnExtension) {
  const auto json_path = scratch("in.json");
  write_text_file(json_path.string(), R"([{"id":"a","lower":0,"upper":1}])");
  EXPECT_EQ(load_intervals(json_path.string()).size(), 1u);
  const auto csv_path = scratch("in.csv");
  write_text_file(csv_path.string(), "id,lower,upper\na,0,1\nb,0,1\n");
  EXPECT_EQ(load_intervals(csv_path.string()).size(), 2u);
  std::filesystem::remove(json_path);
  std::filesystem::remove(csv_path);
  EXPECT_THROW(load_intervals(scratch("missing.csv").string()), InvalidInput);
}

TEST(ReviewsCsv, LongFormat) {
  std::istringstream in("proposal,reviewer,score\nA,r1,4\nB,r1,6\nA,r2,8\n");
  const ReviewTable t = parse_reviews_csv(in, 1, 10);
  EXPECT_EQ(t.proposal_ids, (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(t.matrix.reviewers, 2u);
  EXPECT_EQ(t.matrix.present(0), (std::vector<double>{4, 8}));
  EXPECT_FALSE(t.matrix.at(1, 1));
  std::istringstream out_of_range("proposal,reviewer,score\nA,r1,11\n");
  EXPECT_THROW(parse_reviews_csv(out_of_range, 1, 10), InvalidInput);
  std::istringstream twice("proposal,reviewer,score\nA,r1,4\nA,r1,5\n");
  EXPECT_THROW(parse_reviews_csv(twice, 1, 10), InvalidInput);
}

// Marginals written out and read back score the same worst case.
TEST(Marginals, RoundTripKeepsUtility) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance inst = testing::random_instance(rng, 9, 1 + trial % 8);
    const SelectionRuleOutput out = run_rule(Method::kMerit, inst);
    const double before = worst_case_utility(out.p, inst);

    const auto csv_path = scratch("m.csv");
    write_text_file(csv_path.string(), marginals_csv(inst, out.p));
    const Marginals from_csv = align_marginals(load_marginals(csv_path.string()), inst);
    EXPECT_NEAR(worst_case_utility(from_csv, inst), before, 1e-12);

    const auto json_path = scratch("m.json");
    write_text_file(json_path.string(), selection_json("merit", inst, out).dump(2));
    const Marginals from_json = align_marginals(load_marginals(json_path.string()), inst);
    EXPECT_NEAR(worst_case_utility(from_json, inst), before, 1e-12);
    std::filesystem::remove(csv_path);
    std::filesystem::remove(json_path);
  }
}

TEST(Marginals, AlignReordersAndChecksIds) {
  const Instance fig = testing::four_candidates(2);
  MarginalsFile file{{"3", "1", "4", "2"}, {0.2, 1.0, 0.3, 0.5}};
  EXPECT_EQ(align_marginals(file, fig), (Marginals{1.0, 0.5, 0.2, 0.3}));
  file.ids[0] = "9";
  EXPECT_THROW(align_marginals(file, fig), InvalidInput);
  file.ids[0] = "1";
  EXPECT_THROW(align_marginals(file, fig), InvalidInput);
  EXPECT_THROW(align_marginals(MarginalsFile{{"1"}, {1.0}}, fig), InvalidInput);
}

TEST(SelectionJson, KeyOrderAndTiers) {
  const Instance fig = testing::four_candidates(2);
  const auto doc = selection_json("merit", fig, run_rule(Method::kMerit, fig));
  std::vector<std::string> keys;
  for (const auto& item : doc.items()) keys.push_back(item.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"method", "k", "marginals", "tiers"}));
  EXPECT_EQ(doc["marginals"][0]["id"], "1");
  EXPECT_EQ(doc["tiers"]["accept"], nlohmann::ordered_json::parse(R"(["1"])"));
  EXPECT_EQ(doc["tiers"]["lottery"].size(), 3u);
  EXPECT_NEAR(doc["tiers"]["lottery_probability"].get<double>(), 1.0 / 3, 1e-9);
  EXPECT_DOUBLE_EQ(doc["tiers"]["accept_percent"].get<double>(), 25.0);
  // Same input, same bytes.
  EXPECT_EQ(doc.dump(), selection_json("merit", fig, run_rule(Method::kMerit, fig)).dump());
}

TEST(Tiers, SummaryLine) {
  const SelectionRuleOutput out = tiers_from_marginals({1, 0.5, 0.25, 0.25});
  const TierSummary s = summarize_tiers(out, 4);
  EXPECT_DOUBLE_EQ(s.accept_percent, 25.0);
  EXPECT_DOUBLE_EQ(s.random_percent, 75.0);
  EXPECT_DOUBLE_EQ(*s.p_min, 0.25);
  EXPECT_DOUBLE_EQ(*s.p_max, 0.5);
  const std::string line = format_tier_line("merit", s);
  EXPECT_NE(line.find("accept  25.0%"), std::string::npos);
  EXPECT_NE(line.find("[0.250, 0.500]"), std::string::npos);
}

}  // namespace
}  // namespace merit
