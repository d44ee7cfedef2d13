#include "merit/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "merit/error.hpp"

namespace merit {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(first, last - first + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') quoted = !quoted;
    if (c == ',' && !quoted) {
      cells.push_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(trim(cell));
  return cells;
}

double parse_number(const std::string& text, std::size_t line, const char* column) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (!text.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw InvalidInput("line " + std::to_string(line) + ": cannot parse " + column + " '" + text + "'");
  }
  return value;
}

struct CsvTable {
  std::map<std::string, std::size_t> columns;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line number, cells)
};

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t number = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++number;
    if (number == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_row(line);
    if (header) {
      for (std::size_t c = 0; c < cells.size(); ++c) {
        std::string name = cells[c];
        std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::tolower(ch); });
        if (!table.columns.emplace(name, c).second) {
          throw InvalidInput("line " + std::to_string(number) + ": duplicate column '" + name + "'");
        }
      }
      header = false;
      continue;
    }
    if (cells.size() != table.columns.size()) {
      throw InvalidInput("line " + std::to_string(number) + ": expected " +
                         std::to_string(table.columns.size()) + " fields, found " +
                         std::to_string(cells.size()));
    }
    table.rows.emplace_back(number, std::move(cells));
  }
  if (header) throw InvalidInput("input has no header row");
  return table;
}

std::size_t require_column(const CsvTable& table, const std::string& name) {
  auto it = table.columns.find(name);
  if (it == table.columns.end()) throw InvalidInput("missing column '" + name + "'");
  return it->second;
}

std::string number_text(double x) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", x);
  return buffer;
}

}  // namespace

std::vector<Interval> parse_intervals_csv(std::istream& in) {
  const CsvTable table = read_csv(in);
  const std::size_t id = require_column(table, "id");
  const std::size_t lower = require_column(table, "lower");
  const std::size_t upper = require_column(table, "upper");
  const auto est = table.columns.find("estimate");
  std::vector<Interval> out;
  for (const auto& [line, cells] : table.rows) {
    Interval iv{cells[id], parse_number(cells[lower], line, "lower"), parse_number(cells[upper], line, "upper"),
                std::nullopt};
    if (est != table.columns.end() && !cells[est->second].empty()) {
      iv.estimate = parse_number(cells[est->second], line, "estimate");
    }
    out.push_back(std::move(iv));
  }
  return out;
}

std::vector<Interval> parse_intervals_json(const nlohmann::json& doc) {
  const nlohmann::json& list = doc.is_object() && doc.contains("intervals") ? doc.at("intervals") : doc;
  if (!list.is_array()) throw InvalidInput("expected an array of intervals");
  std::vector<Interval> out;
  try {
    for (const auto& item : list) {
      Interval iv;
      const auto& id = item.at("id");
      iv.id = id.is_string() ? id.get<std::string>() : id.dump();
      iv.lower = item.at("lower").get<double>();
      iv.upper = item.at("upper").get<double>();
      if (item.contains("estimate") && !item.at("estimate").is_null()) {
        iv.estimate = item.at("estimate").get<double>();
      }
      out.push_back(std::move(iv));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed interval entry: ") + e.what());
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << text;
}

namespace {
bool has_json_extension(const std::string& path) {
  return path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
}

nlohmann::json parse_json_text(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(std::string("JSON parse error: ") + e.what());
  }
}
}  // namespace

std::vector<Interval> load_intervals(const std::string& path) {
  const std::string text = read_text_file(path);
  if (has_json_extension(path)) return parse_intervals_json(parse_json_text(text));
  std::istringstream in(text);
  return parse_intervals_csv(in);
}

std::string intervals_csv(const std::vector<Interval>& intervals) {
  const bool estimates = std::all_of(intervals.begin(), intervals.end(),
                                     [](const Interval& iv) { return iv.estimate.has_value(); });
  std::string out = estimates ? "id,lower,upper,estimate\n" : "id,lower,upper\n";
  for (const Interval& iv : intervals) {
    out += iv.id + "," + number_text(iv.lower) + "," + number_text(iv.upper);
    if (estimates) out += "," + number_text(*iv.estimate);
    out += "\n";
  }
  return out;
}

ReviewTable parse_reviews_csv(std::istream& in, double score_min, double score_max) {
  const CsvTable table = read_csv(in);
  const std::size_t pc = require_column(table, "proposal");
  const std::size_t rc = require_column(table, "reviewer");
  const std::size_t sc = require_column(table, "score");
  std::unordered_map<std::string, std::size_t> proposals, reviewers;
  ReviewTable out;
  std::vector<std::tuple<std::size_t, std::size_t, double>> cells;
  for (const auto& [line, row] : table.rows) {
    auto [p, fresh] = proposals.emplace(row[pc], proposals.size());
    if (fresh) out.proposal_ids.push_back(row[pc]);
    const std::size_t r = reviewers.emplace(row[rc], reviewers.size()).first->second;
    const double score = parse_number(row[sc], line, "score");
    if (score < score_min || score > score_max) {
      throw InvalidInput("line " + std::to_string(line) + ": score outside the declared range");
    }
    cells.emplace_back(p->second, r, score);
  }
  ReviewMatrix& m = out.matrix;
  m.proposals = proposals.size();
  m.reviewers = reviewers.size();
  m.scores.assign(m.proposals * m.reviewers, std::nullopt);
  m.score_min = score_min;
  m.score_max = score_max;
  for (const auto& [p, r, score] : cells) {
    if (m.at(p, r)) throw InvalidInput("duplicate score for proposal '" + out.proposal_ids[p] + "'");
    m.at(p, r) = score;
  }
  return out;
}

MarginalsFile load_marginals(const std::string& path) {
  const std::string text = read_text_file(path);
  MarginalsFile out;
  if (has_json_extension(path)) {
    const nlohmann::json doc = parse_json_text(text);
    try {
      for (const auto& item : doc.at("marginals")) {
        out.ids.push_back(item.at("id").get<std::string>());
        out.p.push_back(item.at("p").get<double>());
      }
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput(std::string("malformed marginals file: ") + e.what());
    }
    return out;
  }
  std::istringstream in(text);
  const CsvTable table = read_csv(in);
  const std::size_t id = require_column(table, "id");
  const std::size_t p = require_column(table, "p");
  for (const auto& [line, cells] : table.rows) {
    out.ids.push_back(cells[id]);
    out.p.push_back(parse_number(cells[p], line, "p"));
  }
  return out;
}

Marginals align_marginals(const MarginalsFile& file, const Instance& instance) {
  if (file.ids.size() != instance.size()) {
    throw InvalidInput("marginals list " + std::to_string(file.ids.size()) + " ids but the instance has " +
                       std::to_string(instance.size()));
  }
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < instance.size(); ++i) position.emplace(instance[i].id, i);
  Marginals p(instance.size(), 0.0);
  std::vector<char> seen(instance.size(), 0);
  for (std::size_t j = 0; j < file.ids.size(); ++j) {
    auto it = position.find(file.ids[j]);
    if (it == position.end()) throw InvalidInput("unknown id '" + file.ids[j] + "' in marginals");
    if (seen[it->second]++) throw InvalidInput("id '" + file.ids[j] + "' repeated in marginals");
    p[it->second] = file.p[j];
  }
  return p;
}

TierSummary summarize_tiers(const SelectionRuleOutput& output, std::size_t n) {
  TierSummary s;
  if (n == 0) return s;
  const double scale = 100.0 / static_cast<double>(n);
  s.accept_percent = scale * static_cast<double>(output.accept.size());
  s.random_percent = scale * static_cast<double>(output.lottery.size());
  s.reject_percent = scale * static_cast<double>(output.reject.size());
  for (std::size_t i : output.lottery) {
    s.p_min = s.p_min ? std::min(*s.p_min, output.p[i]) : output.p[i];
    s.p_max = s.p_max ? std::max(*s.p_max, output.p[i]) : output.p[i];
  }
  return s;
}

std::string format_tier_line(const std::string& label, const TierSummary& s) {
  char buffer[160];
  if (s.p_min) {
    std::snprintf(buffer, sizeof buffer, "%-16s accept %5.1f%%  random %5.1f%%  p range [%.3f, %.3f]",
                  label.c_str(), s.accept_percent, s.random_percent, *s.p_min, *s.p_max);
  } else {
    std::snprintf(buffer, sizeof buffer, "%-16s accept %5.1f%%  random %5.1f%%  p range -", label.c_str(),
                  s.accept_percent, s.random_percent);
  }
  return buffer;
}

nlohmann::ordered_json selection_json(const std::string& method, const Instance& instance,
                                      const SelectionRuleOutput& output) {
  nlohmann::ordered_json doc;
  doc["method"] = method;
  doc["k"] = instance.budget();
  nlohmann::ordered_json marginals = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < instance.size(); ++i) {
    nlohmann::ordered_json entry;
    entry["id"] = instance[i].id;
    entry["p"] = output.p[i];
    marginals.push_back(std::move(entry));
  }
  doc["marginals"] = std::move(marginals);
  auto ids = [&](const IndexSet& set) {
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (std::size_t i : set) list.push_back(instance[i].id);
    return list;
  };
  const TierSummary s = summarize_tiers(output, instance.size());
  nlohmann::ordered_json tiers;
  tiers["accept"] = ids(output.accept);
  tiers["lottery"] = ids(output.lottery);
  tiers["reject"] = ids(output.reject);
  tiers["lottery_probability"] =
      output.lottery_probability ? nlohmann::ordered_json(*output.lottery_probability) : nullptr;
  tiers["accept_percent"] = s.accept_percent;
  tiers["random_percent"] = s.random_percent;
  tiers["p_min"] = s.p_min ? nlohmann::ordered_json(*s.p_min) : nullptr;
  tiers["p_max"] = s.p_max ? nlohmann::ordered_json(*s.p_max) : nullptr;
  tiers["under_budget"] = output.under_budget;
  doc["tiers"] = std::move(tiers);
  return doc;
}

std::string marginals_csv(const Instance& instance, std::span<const double> p) {
  std::string out = "id,p\n";
  for (std::size_t i = 0; i < instance.size(); ++i) out += instance[i].id + "," + number_text(p[i]) + "\n";
  return out;
}

}  // namespace merit
