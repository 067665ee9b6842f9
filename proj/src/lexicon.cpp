#include "storyarcs/lexicon.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

namespace storyarcs {
namespace {

constexpr double kMinScore = 1.0;
constexpr double kMaxScore = 9.0;

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', pos);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(pos));
      return cols;
    }
    cols.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
}

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

}  // namespace

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

Lexicon::Lexicon(std::vector<std::pair<std::string, double>> sorted_entries, std::size_t excluded)
    : excluded_(excluded) {
  words_.reserve(sorted_entries.size());
  scores_.reserve(sorted_entries.size());
  index_.reserve(sorted_entries.size());
  for (auto& [word, score] : sorted_entries) {
    index_.emplace(word, words_.size());
    words_.push_back(std::move(word));
    scores_.push_back(score);
  }
  min_score_ = *std::min_element(scores_.begin(), scores_.end());
  max_score_ = *std::max_element(scores_.begin(), scores_.end());
}

Lexicon Lexicon::load(std::istream& in, const LexiconOptions& options) {
  if (options.neutral_band && !(options.neutral_band->low < options.neutral_band->high)) {
    throw Error("neutral band requires low < high");
  }
  if (options.score_column == 0) throw Error("score column cannot be the word column");

  std::vector<std::pair<std::string, double>> entries;
  std::unordered_map<std::string, std::size_t> seen;  // word -> line
  std::size_t excluded = 0;
  std::size_t line_no = 0;
  bool first_content_line = true;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cols = split_tabs(line);
    const bool is_first = first_content_line;
    first_content_line = false;
    if (cols.size() <= options.score_column) {
      if (is_first) continue;  // a one-column title line is treated as a header
      throw LexiconParseError(line_no, "expected at least " +
                                           std::to_string(options.score_column + 1) + " columns");
    }
    const auto score = parse_double(cols[options.score_column]);
    if (!score) {
      if (is_first) continue;  // header row
      throw LexiconParseError(line_no, "score is not a number");
    }
    const std::string word = to_lower_ascii(trim(cols[0]));
    if (word.empty()) throw LexiconParseError(line_no, "empty word");
    if (!std::isfinite(*score) || *score < kMinScore || *score > kMaxScore) {
      throw LexiconParseError(line_no, "score outside [1, 9]");
    }
    if (!seen.emplace(word, line_no).second) throw DuplicateWordError(line_no, word);
    if (options.neutral_band && *score > options.neutral_band->low &&
        *score < options.neutral_band->high) {
      ++excluded;
      continue;
    }
    entries.emplace_back(word, *score);
  }
  if (entries.empty()) throw EmptyLexiconError();
  std::sort(entries.begin(), entries.end());
  return Lexicon(std::move(entries), excluded);
}

Lexicon Lexicon::load_file(const std::filesystem::path& path, const LexiconOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lexicon file " + path.string());
  return load(in, options);
}

Lexicon Lexicon::from_entries(std::span<const std::pair<std::string, double>> entries) {
  std::vector<std::pair<std::string, double>> sorted;
  sorted.reserve(entries.size());
  for (const auto& [word, score] : entries) {
    if (!std::isfinite(score) || score < kMinScore || score > kMaxScore) {
      throw Error("score for '" + word + "' outside [1, 9]");
    }
    sorted.emplace_back(to_lower_ascii(word), score);
  }
  if (sorted.empty()) throw EmptyLexiconError();
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].first == sorted[i - 1].first) throw DuplicateWordError(0, sorted[i].first);
  }
  return Lexicon(std::move(sorted), 0);
}

std::optional<std::size_t> Lexicon::index_of(std::string_view word) const {
  const bool has_upper =
      std::any_of(word.begin(), word.end(), [](char c) { return c >= 'A' && c <= 'Z'; });
  const auto it = has_upper ? index_.find(to_lower_ascii(word)) : index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> Lexicon::score(std::string_view word) const {
  const auto idx = index_of(word);
  if (!idx) return std::nullopt;
  return scores_[*idx];
}

WindowScore Lexicon::average(std::span<const std::uint32_t> counts, std::size_t total_count) const {
  double weighted = 0.0;
  std::uint64_t matched = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) continue;
    weighted += scores_[i] * static_cast<double>(counts[i]);
    matched += counts[i];
  }
  if (matched == 0) throw ZeroCoverageError(total_count);
  return WindowScore{weighted / static_cast<double>(matched), static_cast<std::size_t>(matched),
                     total_count};
}

WindowScore score_window(std::span<const std::string> tokens, const Lexicon& lexicon) {
  std::vector<std::uint32_t> counts(lexicon.size(), 0);
  for (const auto& token : tokens) {
    if (const auto idx = lexicon.index_of(token)) ++counts[*idx];
  }
  return lexicon.average(counts, tokens.size());
}

}  // namespace storyarcs
