#include "storyarcs/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "storyarcs/lexicon.hpp"

namespace storyarcs {
namespace {

struct CodePoint {
  char32_t value;
  std::size_t offset;
  std::size_t length;
};

// Lenient UTF-8 decode; a malformed byte becomes U+FFFD of length 1.
CodePoint decode_at(std::string_view s, std::size_t pos) {
  const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
  const unsigned char lead = byte(pos);
  if (lead < 0x80) return {lead, pos, 1};
  std::size_t len = 0;
  char32_t cp = 0;
  if ((lead & 0xE0) == 0xC0) {
    len = 2;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4;
    cp = lead & 0x07;
  } else {
    return {0xFFFD, pos, 1};
  }
  if (pos + len > s.size()) return {0xFFFD, pos, 1};
  for (std::size_t i = 1; i < len; ++i) {
    if ((byte(pos + i) & 0xC0) != 0x80) return {0xFFFD, pos, 1};
    cp = (cp << 6) | (byte(pos + i) & 0x3F);
  }
  return {cp, pos, len};
}

bool is_space(char32_t c) {
  switch (c) {
    case U' ': case U'\t': case U'\n': case U'\v': case U'\f': case U'\r':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

bool is_punct(char32_t c) {
  if (c < 0x80) return std::ispunct(static_cast<int>(c)) != 0;
  // Latin-1 punctuation (inverted marks, guillemets, middle dot, ...).
  if (c == 0xA1 || c == 0xA7 || c == 0xAB || c == 0xB6 || c == 0xB7 || c == 0xBB || c == 0xBF) {
    return true;
  }
  // General punctuation block: dashes, curly quotes, ellipsis, primes.
  return (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E);
}

template <class Emit>
void for_each_piece(std::string_view text, Emit&& emit) {
  std::vector<CodePoint> piece;
  const auto flush = [&] {
    if (!piece.empty()) emit(std::span<const CodePoint>(piece));
    piece.clear();
  };
  for (std::size_t pos = 0; pos < text.size();) {
    const CodePoint cp = decode_at(text, pos);
    pos += cp.length;
    if (is_space(cp.value)) {
      flush();
    } else {
      piece.push_back(cp);
    }
  }
  flush();
}

struct PieceBounds {
  std::size_t first;  // first non-punctuation code point
  std::size_t last;   // one past the last non-punctuation code point
};

PieceBounds core_of(std::span<const CodePoint> piece) {
  std::size_t first = 0;
  while (first < piece.size() && is_punct(piece[first].value)) ++first;
  std::size_t last = piece.size();
  while (last > first && is_punct(piece[last - 1].value)) --last;
  return {first, last};
}

std::string slice(std::string_view text, std::span<const CodePoint> cps) {
  if (cps.empty()) return {};
  const std::size_t begin = cps.front().offset;
  const std::size_t end = cps.back().offset + cps.back().length;
  return std::string(text.substr(begin, end - begin));
}

struct Line {
  std::size_t begin;
  std::size_t end;  // excludes the newline
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      lines.push_back({pos, text.size()});
      break;
    }
    lines.push_back({pos, nl});
    pos = nl + 1;
  }
  return lines;
}

std::string to_upper_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  return out;
}

bool contains(std::string_view haystack, std::string_view needle) {
  return haystack.find(needle) != std::string_view::npos;
}

std::string_view line_text(std::string_view text, const Line& line) {
  return text.substr(line.begin, line.end - line.begin);
}

std::string_view strip_outer_punct(std::string_view s, bool keep_trailing_period) {
  while (!s.empty() && std::ispunct(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::ispunct(static_cast<unsigned char>(s.back())) &&
         !(keep_trailing_period && s.back() == '.')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

std::vector<std::string> default_title_keywords() {
  return {"stories", "collection", "poems",    "complete", "essays", "fables",
          "tales",   "papers",     "poetry",   "verses",   "ballads", "sketches",
          "vol.",    "vols.",      "works",    "volume",   "other"};
}

bool title_has_keyword(std::string_view title, std::span<const std::string> keywords) {
  std::vector<std::string> pieces;
  for_each_piece(title, [&](std::span<const CodePoint> piece) {
    pieces.push_back(to_lower_ascii(slice(title, piece)));
  });
  for (const auto& raw_keyword : keywords) {
    const std::string keyword = to_lower_ascii(raw_keyword);
    const bool wants_period = !keyword.empty() && keyword.back() == '.';
    for (const auto& piece : pieces) {
      if (strip_outer_punct(piece, wants_period) == keyword) return true;
    }
  }
  return false;
}

bool passes_filter(const CatalogEntry& entry, const FilterConfig& config) {
  const std::string language = to_lower_ascii(entry.language);
  const bool language_ok = std::any_of(config.languages.begin(), config.languages.end(),
                                       [&](const std::string& l) { return to_lower_ascii(l) == language; });
  if (!language_ok) return false;
  if (!entry.word_count || *entry.word_count < config.min_words ||
      *entry.word_count > config.max_words) {
    return false;
  }
  if (entry.downloads <= config.min_downloads) return false;
  const bool class_ok = std::any_of(entry.loc_classes.begin(), entry.loc_classes.end(),
                                    [&](const std::string& c) { return config.loc_classes.count(c) > 0; });
  if (!class_ok) return false;
  return !title_has_keyword(entry.title, config.title_blacklist);
}

std::vector<CatalogEntry> filter_catalog(std::span<const CatalogEntry> catalog,
                                         const FilterConfig& config) {
  if (!(config.min_words < config.max_words)) {
    throw CatalogError("filter requires min_words < max_words");
  }
  std::vector<CatalogEntry> kept;
  std::copy_if(catalog.begin(), catalog.end(), std::back_inserter(kept),
               [&](const CatalogEntry& e) { return passes_filter(e, config); });
  return kept;
}

Stripped<FrontRule> strip_front_matter(std::string_view text) {
  const auto lines = split_lines(text);
  for (const auto& line : lines) {
    const auto s = line_text(text, line);
    if (contains(s, "START OF THIS PROJECT GUTENBERG EBOOK") ||
        contains(s, "START OF THE PROJECT GUTENBERG EBOOK")) {
      return {std::string(text.substr(std::min(line.end + 1, text.size()))), FrontRule::start_marker};
    }
  }
  for (std::size_t i = 0; 2 * i < lines.size(); ++i) {
    const auto s = line_text(text, lines[i]);
    if (contains(s, "END") && contains(s, "SMALL PRINT")) {
      return {std::string(text.substr(std::min(lines[i].end + 1, text.size()))),
              FrontRule::small_print};
    }
  }
  return {std::string(text), FrontRule::none};
}

Stripped<BackRule> strip_back_matter(std::string_view text) {
  const auto lines = split_lines(text);
  const std::size_t n = lines.size();
  for (const auto& line : lines) {
    const std::string upper = to_upper_ascii(line_text(text, line));
    if (contains(upper, "END OF THIS PROJECT GUTENBERG EBOOK") ||
        contains(upper, "END OF THE PROJECT GUTENBERG EBOOK") ||
        contains(upper, "END OF PROJECT GUTENBERG")) {
      return {std::string(text.substr(0, line.begin)), BackRule::end_marker};
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (4 * i < 3 * n) continue;
    const std::string upper = to_upper_ascii(line_text(text, lines[i]));
    if (contains(upper, "END") && contains(upper, "PROJECT GUTENBERG")) {
      return {std::string(text.substr(0, lines[i].begin)), BackRule::end_project_gutenberg};
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (10 * i < 9 * n) continue;
    if (contains(line_text(text, lines[i]), "THE END")) {
      return {std::string(text.substr(0, lines[i].begin)), BackRule::the_end};
    }
  }
  return {std::string(text), BackRule::none};
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  for_each_piece(text, [&](std::span<const CodePoint> piece) {
    const auto [first, last] = core_of(piece);
    if (first < last) tokens.push_back(to_lower_ascii(slice(text, piece.subspan(first, last - first))));
  });
  return tokens;
}

std::vector<std::string> tokenize_keep_punctuation(std::string_view text) {
  std::vector<std::string> tokens;
  for_each_piece(text, [&](std::span<const CodePoint> piece) {
    const auto [first, last] = core_of(piece);
    for (std::size_t i = 0; i < first; ++i) tokens.push_back(slice(text, piece.subspan(i, 1)));
    if (first < last) tokens.push_back(to_lower_ascii(slice(text, piece.subspan(first, last - first))));
    for (std::size_t i = std::max(first, last); i < piece.size(); ++i) {
      tokens.push_back(slice(text, piece.subspan(i, 1)));
    }
  });
  return tokens;
}

CleanedText clean_text(std::string_view raw) {
  auto front = strip_front_matter(raw);
  auto back = strip_back_matter(front.text);
  return {std::move(back.text), front.rule, back.rule};
}

BookRecord make_book(CatalogEntry entry, std::string_view raw_text) {
  auto cleaned = clean_text(raw_text);
  BookRecord book{std::move(entry), tokenize(cleaned.text), cleaned.front_rule, cleaned.back_rule};
  if (!book.entry.word_count) book.entry.word_count = book.tokens.size();
  return book;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

}  // namespace storyarcs
