#include <doctest.h>

#include <algorithm>
#include <map>
#include <sstream>

#include "storyarcs/lexicon.hpp"
#include "storyarcs/random.hpp"
#include "support/synthetic.hpp"

using namespace storyarcs;

namespace {

Lexicon load_text(const std::string& text, LexiconOptions options = {}) {
  std::istringstream in(text);
  return Lexicon::load(in, options);
}

std::vector<std::string> random_tokens(Rng& rng, std::size_t count) {
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < count; ++i) {
    const auto pick = rng.index(3);
    if (pick == 0) tokens.push_back("filler" + std::to_string(rng.index(5)));
    else if (pick == 1) tokens.push_back("joy" + std::to_string(rng.index(20)));
    else tokens.push_back("gloom" + std::to_string(rng.index(20)));
  }
  tokens.push_back("joy0");  // guarantees coverage
  return tokens;
}

}  // namespace

TEST_CASE("load_lexicon reads plain rows") {
  const Lexicon lex = load_text("alpha\t3.0\nbeta\t6.5\ngamma\t8.0\n");
  CHECK(lex.size() == 3);
  CHECK(lex.score("beta") == doctest::Approx(6.5));
  CHECK(lex.min_score() == 3.0);
  CHECK(lex.max_score() == 8.0);
}

TEST_CASE("neutral band drops the scores strictly inside it") {
  LexiconOptions options;
  options.neutral_band = NeutralBand{4.0, 6.0};
  const Lexicon lex = load_text("low\t2.0\nmid\t5.0\nhigh\t8.0\n", options);
  CHECK(lex.size() == 2);
  CHECK(lex.excluded_count() == 1);
  CHECK_FALSE(lex.score("mid"));

  options.neutral_band = NeutralBand{6.0, 4.0};
  CHECK_THROWS_AS(load_text("a\t2.0\n", options), Error);
}

TEST_CASE("header and extra columns in a fixture file") {
  const Lexicon lex = Lexicon::load_file(std::string(STORYARCS_TEST_DATA) + "/lexicon_extra_columns.tsv");
  // Hand-parsed: header skipped, first two columns kept, case folded.
  REQUIRE(lex.size() == 4);
  CHECK(lex.score("happy") == 7.2);
  CHECK(lex.score("sad") == 2.5);
  CHECK(lex.score("SAD") == 2.5);
  CHECK(lex.score("neutral") == 5.0);
  CHECK(lex.score("rain") == 4.08);
  const std::vector<std::string> expected_order{"happy", "neutral", "rain", "sad"};
  CHECK(std::equal(lex.words().begin(), lex.words().end(), expected_order.begin()));
}

TEST_CASE("load errors") {
  SUBCASE("malformed row reports its line") {
    try {
      load_text("a\t2.0\nb\t3.0\nc\tnot-a-number\n");
      FAIL("expected a parse error");
    } catch (const LexiconParseError& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("missing score column") {
    CHECK_THROWS_AS(load_text("a\t2.0\nlonely\n"), LexiconParseError);
  }
  SUBCASE("duplicates after case folding") {
    try {
      load_text("Happy\t7.0\nhappy\t7.1\n");
      FAIL("expected a duplicate error");
    } catch (const DuplicateWordError& e) {
      CHECK(e.word() == "happy");
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("score outside [1, 9]") { CHECK_THROWS_AS(load_text("a\t9.5\n"), LexiconParseError); }
  SUBCASE("empty source") { CHECK_THROWS_AS(load_text(""), EmptyLexiconError); }
  SUBCASE("everything inside the neutral band") {
    LexiconOptions options;
    options.neutral_band = NeutralBand{4.0, 6.0};
    CHECK_THROWS_AS(load_text("a\t5.0\nb\t4.5\n", options), EmptyLexiconError);
  }
}

TEST_CASE("score_window examples") {
  const std::vector<std::pair<std::string, double>> entries{{"w", 6.0}, {"a", 7.0}, {"b", 4.0}};
  const Lexicon lex = Lexicon::from_entries(entries);

  const std::vector<std::string> five(5, "w");
  const WindowScore s = score_window(five, lex);
  CHECK(s.score == 6.0);
  CHECK(s.matched_count == 5);
  CHECK(s.total_count == 5);

  const std::vector<std::string> aab{"a", "a", "b"};
  CHECK(score_window(aab, lex).score == doctest::Approx((2 * 7.0 + 4.0) / 3.0).epsilon(1e-15));

  const std::vector<std::string> unknown{"zzz"};
  CHECK_THROWS_AS(score_window(unknown, lex), ZeroCoverageError);

  const std::vector<std::string> mixed{"A", "unknown", "b"};
  const WindowScore m = score_window(mixed, lex);
  CHECK(m.matched_count == 2);
  CHECK(m.total_count == 3);
  CHECK(m.score == doctest::Approx(5.5));
}

TEST_CASE("score_window properties on random windows") {
  const auto entries = testing::toy_lexicon_entries();
  const Lexicon lex = Lexicon::from_entries(entries);
  std::vector<std::pair<std::string, double>> shifted;
  for (const auto& [w, h] : entries) shifted.emplace_back(w, 0.5 * h + 2.0);
  const Lexicon affine = Lexicon::from_entries(shifted);

  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    auto tokens = random_tokens(rng, 1 + rng.index(200));
    const double score = score_window(tokens, lex).score;

    CHECK(score >= lex.min_score());
    CHECK(score <= lex.max_score());

    auto permuted = tokens;
    rng.shuffle(std::span<std::string>(permuted));
    CHECK(score_window(permuted, lex).score == score);

    auto doubled = tokens;
    doubled.insert(doubled.end(), tokens.begin(), tokens.end());
    CHECK(score_window(doubled, lex).score == doctest::Approx(score).epsilon(1e-14));

    CHECK(score_window(tokens, affine).score == doctest::Approx(0.5 * score + 2.0).epsilon(1e-13));
  }
}
