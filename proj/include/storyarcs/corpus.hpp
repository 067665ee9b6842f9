#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "storyarcs/error.hpp"

namespace storyarcs {

struct CatalogEntry {
  std::int64_t id = 0;
  std::string title;
  std::string language;
  std::set<std::string> loc_classes;
  std::uint64_t downloads = 0;
  // Filled from the cleaned text when the catalog does not carry it.
  std::optional<std::uint64_t> word_count;
};

// Title keywords that mark anthologies, collections and multi-volume sets.
std::vector<std::string> default_title_keywords();

struct FilterConfig {
  std::uint64_t min_words = 20'000;
  std::uint64_t max_words = 100'000;
  // Entries need strictly more downloads than this.
  std::uint64_t min_downloads = 40;
  std::set<std::string> languages{"en"};
  std::set<std::string> loc_classes{"PN", "PR", "PS", "PZ"};
  std::vector<std::string> title_blacklist = default_title_keywords();
};

class CatalogError : public Error {
 public:
  using Error::Error;
};

// Keeps, in input order, the entries passing every filter. Entries without a
// word count fail the length filter.
std::vector<CatalogEntry> filter_catalog(std::span<const CatalogEntry> catalog,
                                         const FilterConfig& config);
bool passes_filter(const CatalogEntry& entry, const FilterConfig& config);

// Case-insensitive whole-token match; "vol." style keywords keep their period.
bool title_has_keyword(std::string_view title, std::span<const std::string> keywords);

// Delimiter-separated file with a header naming at least id, title, language,
// loc_classes and downloads (word_count optional), or a directory of per-book
// JSON records with the same keys.
std::vector<CatalogEntry> read_catalog(const std::filesystem::path& path);
void write_catalog(const std::filesystem::path& path, std::span<const CatalogEntry> catalog);

enum class FrontRule { none = 0, start_marker = 1, small_print = 2 };
enum class BackRule { none = 0, end_marker = 1, end_project_gutenberg = 2, the_end = 3 };

template <class Rule>
struct Stripped {
  std::string text;
  Rule rule = Rule::none;
};

// Drops everything through the first START OF TH(IS|E) PROJECT GUTENBERG EBOOK
// line; failing that, through an END ... SMALL PRINT line in the first half.
Stripped<FrontRule> strip_front_matter(std::string_view text);

// Truncates before, in order of preference: an END OF ... PROJECT GUTENBERG
// line anywhere (any case); a line with both END and PROJECT GUTENBERG in the
// last quarter (any case); a THE END line in the last tenth (exact case).
Stripped<BackRule> strip_back_matter(std::string_view text);

// Whitespace split, outer punctuation stripped (inner apostrophes and hyphens
// survive), lowercased, empties dropped.
std::vector<std::string> tokenize(std::string_view text);

// Same split, but outer punctuation marks are emitted as one token per mark.
std::vector<std::string> tokenize_keep_punctuation(std::string_view text);

struct BookRecord {
  CatalogEntry entry;
  std::vector<std::string> tokens;
  FrontRule front_rule = FrontRule::none;
  BackRule back_rule = BackRule::none;
};

struct CleanedText {
  std::string text;
  FrontRule front_rule = FrontRule::none;
  BackRule back_rule = BackRule::none;
};

CleanedText clean_text(std::string_view raw);

BookRecord make_book(CatalogEntry entry, std::string_view raw_text);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace storyarcs
