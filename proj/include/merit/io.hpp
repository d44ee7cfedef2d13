#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "merit/baselines.hpp"
#include "merit/datagen.hpp"
#include "merit/model.hpp"

namespace merit {

// Header `id,lower,upper[,estimate]` in any column order. Blank lines are skipped.
// Throws InvalidInput with the offending line number.
std::vector<Interval> parse_intervals_csv(std::istream& in);
// Either a bare array or {"intervals": [...]} of {id, lower, upper, estimate?}.
std::vector<Interval> parse_intervals_json(const nlohmann::json& doc);
// Dispatches on a .json extension; anything else is read as CSV.
std::vector<Interval> load_intervals(const std::string& path);
std::string intervals_csv(const std::vector<Interval>& intervals);

// Long format `proposal,reviewer,score`; missing cells are simply absent.
// Proposal and reviewer ids keep first-appearance order.
struct ReviewTable {
  ReviewMatrix matrix;
  std::vector<std::string> proposal_ids;
};
ReviewTable parse_reviews_csv(std::istream& in, double score_min, double score_max);

struct MarginalsFile {
  std::vector<std::string> ids;
  std::vector<double> p;
};

// Accepts a selection JSON ({"marginals": [{id, p}]}) or CSV with header `id,p`.
MarginalsFile load_marginals(const std::string& path);
// Reorders to the instance's candidate order. Throws InvalidInput on any id mismatch.
Marginals align_marginals(const MarginalsFile& file, const Instance& instance);

struct TierSummary {
  double accept_percent = 0.0;
  double random_percent = 0.0;
  double reject_percent = 0.0;
  std::optional<double> p_min;  // over the lottery tier
  std::optional<double> p_max;
};

TierSummary summarize_tiers(const SelectionRuleOutput& output, std::size_t n);
std::string format_tier_line(const std::string& label, const TierSummary& summary);

// {method, k, marginals: [{id, p}], tiers} with keys in that order.
nlohmann::ordered_json selection_json(const std::string& method, const Instance& instance,
                                      const SelectionRuleOutput& output);
// id,p with 17 significant digits so values re-read exactly.
std::string marginals_csv(const Instance& instance, std::span<const double> p);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace merit
