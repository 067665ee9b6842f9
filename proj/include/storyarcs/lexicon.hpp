#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "storyarcs/error.hpp"

namespace storyarcs {

// Scores strictly inside (low, high) are dropped at load time.
struct NeutralBand {
  double low = 4.0;
  double high = 6.0;
};

struct LexiconOptions {
  std::optional<NeutralBand> neutral_band;
  // Zero-based column holding the score; column 0 is always the word.
  std::size_t score_column = 1;
};

class LexiconParseError : public Error {
 public:
  LexiconParseError(std::size_t line, const std::string& what)
      : Error("lexicon line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DuplicateWordError : public Error {
 public:
  DuplicateWordError(std::size_t line, const std::string& word)
      : Error("lexicon line " + std::to_string(line) + ": duplicate word '" + word + "'"),
        line_(line), word_(word) {}
  std::size_t line() const { return line_; }
  const std::string& word() const { return word_; }

 private:
  std::size_t line_;
  std::string word_;
};

class EmptyLexiconError : public Error {
 public:
  EmptyLexiconError() : Error("lexicon has no usable entries") {}
};

class ZeroCoverageError : public Error {
 public:
  explicit ZeroCoverageError(std::size_t total)
      : Error("no token of a " + std::to_string(total) + "-token window is in the lexicon"),
        total_(total) {}
  std::size_t total_count() const { return total_; }

 private:
  std::size_t total_;
};

struct WindowScore {
  double score = 0.0;
  std::size_t matched_count = 0;
  std::size_t total_count = 0;
};

// Word -> happiness table. Words are lowercased and kept in ascending byte
// order; an entry's index is its rank in that order, and every weighted sum
// runs over indices in ascending order so that results are bit-reproducible.
class Lexicon {
 public:
  static Lexicon load(std::istream& in, const LexiconOptions& options = {});
  static Lexicon load_file(const std::filesystem::path& path, const LexiconOptions& options = {});
  static Lexicon from_entries(std::span<const std::pair<std::string, double>> entries);

  std::size_t size() const { return words_.size(); }
  std::span<const std::string> words() const { return words_; }
  std::span<const double> scores() const { return scores_; }
  double min_score() const { return min_score_; }
  double max_score() const { return max_score_; }
  std::size_t excluded_count() const { return excluded_; }

  std::optional<std::size_t> index_of(std::string_view word) const;
  std::optional<double> score(std::string_view word) const;

  // Weighted mean of scores given a per-index occurrence count vector
  // (length size()). Throws ZeroCoverageError when nothing matched.
  WindowScore average(std::span<const std::uint32_t> counts, std::size_t total_count) const;

 private:
  Lexicon(std::vector<std::pair<std::string, double>> sorted_entries, std::size_t excluded);

  std::vector<std::string> words_;
  std::vector<double> scores_;
  std::unordered_map<std::string, std::size_t> index_;
  double min_score_ = 0.0;
  double max_score_ = 0.0;
  std::size_t excluded_ = 0;
};

// h_avg of a token window: sum of score * frequency over lexicon words,
// divided by the number of matched tokens. Unmatched tokens are ignored.
WindowScore score_window(std::span<const std::string> tokens, const Lexicon& lexicon);

std::string to_lower_ascii(std::string_view s);

}  // namespace storyarcs
