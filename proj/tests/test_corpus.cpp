#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "storyarcs/corpus.hpp"
#include "storyarcs/random.hpp"

using namespace storyarcs;
namespace fs = std::filesystem;

namespace {

CatalogEntry novel() {
  CatalogEntry e;
  e.id = 1;
  e.title = "A Novel";
  e.language = "en";
  e.loc_classes = {"PR"};
  e.downloads = 100;
  e.word_count = 50'000;
  return e;
}

// Lines "line 1" ... "line n" with `marker` replacing line `at` (1-based).
std::string numbered_text(std::size_t n, std::size_t at, const std::string& marker) {
  std::string text;
  for (std::size_t i = 1; i <= n; ++i) text += (i == at ? marker : "line " + std::to_string(i)) + "\n";
  return text;
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("storyarcs_corpus_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("filter_catalog applies every rule") {
  const FilterConfig config;
  CHECK(passes_filter(novel(), config));

  auto poems = novel();
  poems.title = "Collected Poems";
  CHECK_FALSE(passes_filter(poems, config));

  auto short_book = novel();
  short_book.word_count = 15'000;
  CHECK_FALSE(passes_filter(short_book, config));

  auto long_book = novel();
  long_book.word_count = 100'001;
  CHECK_FALSE(passes_filter(long_book, config));

  auto boundary = novel();
  boundary.word_count = 20'000;
  CHECK(passes_filter(boundary, config));

  auto unpopular = novel();
  unpopular.downloads = 40;  // needs more than 40
  CHECK_FALSE(passes_filter(unpopular, config));

  auto french = novel();
  french.language = "fr";
  CHECK_FALSE(passes_filter(french, config));

  auto history = novel();
  history.loc_classes = {"DA"};
  CHECK_FALSE(passes_filter(history, config));

  auto mixed_classes = novel();
  mixed_classes.loc_classes = {"DA", "PZ"};
  CHECK(passes_filter(mixed_classes, config));

  auto uncounted = novel();
  uncounted.word_count.reset();
  CHECK_FALSE(passes_filter(uncounted, config));
}

TEST_CASE("title keywords match whole tokens") {
  const auto keywords = default_title_keywords();
  CHECK(title_has_keyword("The Complete Works of X", keywords));
  CHECK(title_has_keyword("Sketches: Old and New", keywords));
  CHECK(title_has_keyword("Memoirs, Vol. 2", keywords));
  CHECK(title_has_keyword("History (vols. I-III)", keywords));
  CHECK(title_has_keyword("The Other Side", keywords));
  CHECK_FALSE(title_has_keyword("Volcano Days", keywords));
  CHECK_FALSE(title_has_keyword("Vol 2", keywords));  // "vol." needs its period
  CHECK_FALSE(title_has_keyword("Mother of Pearl", keywords));
  CHECK_FALSE(title_has_keyword("Storyteller", keywords));
}

TEST_CASE("filter_catalog is an order-preserving idempotent subset") {
  Rng rng(3);
  std::vector<CatalogEntry> catalog;
  const std::vector<std::string> titles{"A Novel", "Poems", "Tales of Two", "Night", "The Volume"};
  for (int i = 0; i < 200; ++i) {
    CatalogEntry e = novel();
    e.id = i;
    e.title = titles[rng.index(titles.size())];
    e.downloads = rng.index(200);
    e.word_count = rng.index(150'000);
    e.loc_classes = {rng.index(2) ? "PS" : "QA"};
    catalog.push_back(e);
  }
  const FilterConfig config;
  const auto once = filter_catalog(catalog, config);
  const auto twice = filter_catalog(once, config);
  REQUIRE(once.size() == twice.size());
  std::int64_t last = -1;
  for (std::size_t i = 0; i < once.size(); ++i) {
    CHECK(once[i].id == twice[i].id);
    CHECK(once[i].id > last);
    last = once[i].id;
  }
  CHECK(!once.empty());
  CHECK(once.size() < catalog.size());

  FilterConfig bad;
  bad.min_words = 10;
  bad.max_words = 10;
  CHECK_THROWS_AS(filter_catalog(catalog, bad), CatalogError);
}

TEST_CASE("front matter rules") {
  SUBCASE("START marker") {
    const std::string text = numbered_text(100, 30, "*** START OF THIS PROJECT GUTENBERG EBOOK ALICE ***");
    const auto out = strip_front_matter(text);
    CHECK(out.rule == FrontRule::start_marker);
    CHECK(out.text.rfind("line 31\n", 0) == 0);
    CHECK(out.text.size() < text.size());
  }
  SUBCASE("THE variant") {
    const auto out = strip_front_matter(numbered_text(10, 2, "*** START OF THE PROJECT GUTENBERG EBOOK X ***"));
    CHECK(out.rule == FrontRule::start_marker);
    CHECK(out.text.rfind("line 3\n", 0) == 0);
  }
  SUBCASE("small print in the first half") {
    const auto out = strip_front_matter(numbered_text(100, 10, "*END*THE SMALL PRINT! FOR PUBLIC DOMAIN ETEXTS*"));
    CHECK(out.rule == FrontRule::small_print);
    CHECK(out.text.rfind("line 11\n", 0) == 0);
  }
  SUBCASE("small print in the second half is ignored") {
    const std::string text = numbered_text(100, 60, "*END*THE SMALL PRINT!");
    const auto out = strip_front_matter(text);
    CHECK(out.rule == FrontRule::none);
    CHECK(out.text == text);
  }
  SUBCASE("no marker") {
    const std::string text = numbered_text(50, 0, "");
    const auto out = strip_front_matter(text);
    CHECK(out.rule == FrontRule::none);
    CHECK(out.text == text);
  }
  SUBCASE("matching is case sensitive") {
    CHECK(strip_front_matter(numbered_text(10, 2, "start of this project gutenberg ebook")).rule == FrontRule::none);
  }
}

TEST_CASE("back matter rules") {
  SUBCASE("END marker anywhere, any case") {
    const std::string text = numbered_text(100, 95, "*** END OF THIS PROJECT GUTENBERG EBOOK ALICE ***");
    const auto out = strip_back_matter(text);
    CHECK(out.rule == BackRule::end_marker);
    CHECK(out.text == numbered_text(94, 0, ""));

    CHECK(strip_back_matter(numbered_text(100, 40, "end of the project gutenberg ebook")).rule == BackRule::end_marker);
  }
  SUBCASE("END and PROJECT GUTENBERG in the last quarter") {
    const std::string text = numbered_text(100, 90, "End of the Project Gutenberg Etext of Persuasion");
    const auto out = strip_back_matter(text);
    CHECK(out.rule == BackRule::end_project_gutenberg);
    CHECK(out.text == numbered_text(89, 0, ""));
    CHECK(strip_back_matter(numbered_text(100, 60, "End of the Project Gutenberg Etext")).rule == BackRule::none);
  }
  SUBCASE("the END OF PROJECT GUTENBERG phrase belongs to the first rule") {
    CHECK(strip_back_matter(numbered_text(100, 90, "End of Project Gutenberg's Persuasion")).rule ==
          BackRule::end_marker);
  }
  SUBCASE("THE END in the last tenth, exact case") {
    const std::string text = numbered_text(100, 95, "THE END");
    const auto out = strip_back_matter(text);
    CHECK(out.rule == BackRule::the_end);
    CHECK(out.text == numbered_text(94, 0, ""));
    CHECK(strip_back_matter(numbered_text(100, 95, "The End")).rule == BackRule::none);
    CHECK(strip_back_matter(numbered_text(100, 50, "THE END")).rule == BackRule::none);
  }
  SUBCASE("no marker") {
    const std::string text = numbered_text(30, 0, "");
    CHECK(strip_back_matter(text).text == text);
  }
}

TEST_CASE("stripping never grows text and cleaned fixtures stay nonempty") {
  const std::string text = "header\n*** START OF THIS PROJECT GUTENBERG EBOOK X ***\nIt was a dark night.\n" +
                           numbered_text(40, 0, "") + "*** END OF THIS PROJECT GUTENBERG EBOOK X ***\nlicense\n";
  const auto cleaned = clean_text(text);
  CHECK(cleaned.front_rule == FrontRule::start_marker);
  CHECK(cleaned.back_rule == BackRule::end_marker);
  CHECK(cleaned.text.size() < text.size());
  CHECK_FALSE(cleaned.text.empty());
  CHECK(cleaned.text.rfind("It was a dark night.", 0) == 0);
}

TEST_CASE("tokenize") {
  CHECK(tokenize("Alice's Adventures, Ch. 1") == std::vector<std::string>{"alice's", "adventures", "ch", "1"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("  \n\t ").empty());
  CHECK(tokenize("--well, well-known \"quote\"") == std::vector<std::string>{"well", "well-known", "quote"});
  CHECK(tokenize("\xE2\x80\x9CHello,\xE2\x80\x9D said\xC2\xA0she\xE2\x80\xA6") ==
        std::vector<std::string>{"hello", "said", "she"});
  CHECK(tokenize("... !!! --") .empty());
}

TEST_CASE("tokenize keeping punctuation") {
  CHECK(tokenize_keep_punctuation("go , said the King.") ==
        std::vector<std::string>{"go", ",", "said", "the", "king", "."});
  CHECK(tokenize_keep_punctuation("\"Yes!\"") == std::vector<std::string>{"\"", "yes", "!", "\""});
  CHECK(tokenize_keep_punctuation("--") == std::vector<std::string>{"-", "-"});
}

TEST_CASE("tokenize is idempotent on its own output") {
  Rng rng(5);
  const std::string alphabet = "abcXYZ'-.,;:!? \n\"()";
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    const auto len = rng.index(80);
    for (std::size_t i = 0; i < len; ++i) text.push_back(alphabet[rng.index(alphabet.size())]);
    const auto tokens = tokenize(text);
    for (const auto& t : tokens) {
      CHECK(tokenize(t) == std::vector<std::string>{t});
    }
    std::string joined;
    for (const auto& t : tokens) joined += t + " ";
    CHECK(tokenize(joined) == tokens);
  }
}

TEST_CASE("catalog files") {
  const fs::path dir = temp_dir("catalog");
  SUBCASE("comma separated with quoting") {
    std::ofstream(dir / "catalog.csv") << "id,title,language,loc_classes,downloads,word_count\n"
                                       << "11,\"Alice's Adventures, in Wonderland\",en,PR;PZ,3000,26000\n"
                                       << "12,Night,en,PS,50,\n";
    const auto entries = read_catalog(dir / "catalog.csv");
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].title == "Alice's Adventures, in Wonderland");
    CHECK(entries[0].loc_classes == std::set<std::string>{"PR", "PZ"});
    CHECK(entries[0].word_count == 26000u);
    CHECK_FALSE(entries[1].word_count);

    write_catalog(dir / "copy.csv", entries);
    const auto again = read_catalog(dir / "copy.csv");
    CHECK(again[0].title == entries[0].title);
    CHECK(again[0].loc_classes == entries[0].loc_classes);
  }
  SUBCASE("tab separated") {
    std::ofstream(dir / "catalog.tsv") << "id\ttitle\tlanguage\tloc_classes\tdownloads\n"
                                       << "5\tA, B\ten\tPR\t7\n";
    const auto entries = read_catalog(dir / "catalog.tsv");
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].title == "A, B");
  }
  SUBCASE("directory of JSON records") {
    fs::create_directories(dir / "meta");
    std::ofstream(dir / "meta" / "b.json")
        << R"({"id": 9, "title": "T", "language": "en", "loc_classes": ["PS"], "downloads": 41})";
    std::ofstream(dir / "meta" / "a.json")
        << R"({"id": 20, "title": "U", "language": "en", "loc_classes": "PR PZ", "downloads": 3, "word_count": 21000})";
    const auto entries = read_catalog(dir / "meta");
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].id == 9);
    CHECK(entries[1].loc_classes.size() == 2);
  }
  SUBCASE("duplicate ids and missing columns") {
    std::ofstream(dir / "dup.csv") << "id,title,language,loc_classes,downloads\n1,a,en,PR,5\n1,b,en,PR,6\n";
    CHECK_THROWS_AS(read_catalog(dir / "dup.csv"), CatalogError);
    std::ofstream(dir / "cols.csv") << "id,title\n1,a\n";
    CHECK_THROWS_AS(read_catalog(dir / "cols.csv"), CatalogError);
    std::ofstream(dir / "wide.csv") << "id,title,language,loc_classes,downloads\n1,a,en,PR,5,20000\n";
    CHECK_THROWS_AS(read_catalog(dir / "wide.csv"), CatalogError);
    std::ofstream(dir / "neg.csv") << "id,title,language,loc_classes,downloads\n1,a,en,PR,-5\n";
    CHECK_THROWS_AS(read_catalog(dir / "neg.csv"), CatalogError);
  }
}
