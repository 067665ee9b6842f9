#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "storyarcs/pipeline.hpp"
#include "support/synthetic.hpp"

using namespace storyarcs;
using namespace storyarcs::testing;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

// 24 shaped books (ids 1..24, downloads 10 * id) plus, optionally, extra
// catalog rows written by the caller.
PipelineConfig small_corpus(const std::string& name, const std::string& extra_rows = "") {
  const fs::path root = fs::temp_directory_path() / ("storyarcs_pipeline_" + name);
  fs::remove_all(root);
  fs::create_directories(root / "texts");
  write_lexicon_file(root / "lexicon.tsv");
  std::ofstream catalog(root / "catalog.csv");
  catalog << "id,title,language,loc_classes,downloads,word_count\n";
  for (int id = 1; id <= 24; ++id) {
    const Shape shape = kShapes[id % 4];
    std::ofstream(root / "texts" / (std::to_string(id) + ".txt"))
        << gutenberg_text("Book " + std::to_string(id), shaped_book(shape, 3000, 0.4, std::uint64_t(id)));
    catalog << id << ",Book " << id << ",en,PS," << 10 * id << ",\n";
  }
  catalog << extra_rows;
  catalog.close();

  PipelineConfig config;
  config.catalog = root / "catalog.csv";
  config.texts = root / "texts";
  config.lexicon = root / "lexicon.tsv";
  config.output = root / "runs";
  config.name = "a";
  config.filter.min_words = 1000;
  config.filter.min_downloads = 0;
  config.lexicon_options.neutral_band.reset();
  config.window_size = 300;
  config.arc_points = 20;
  config.report_modes = 5;
  config.top_k = 3;
  config.cuts = {2, 3, 4, 5};
  config.dendrogram_clusters = 6;
  config.som.rows = 4;
  config.som.cols = 4;
  config.som.total_steps = 2000;
  config.min_fractions = {0.1, 0.02};
  return config;
}

std::vector<fs::path> relative_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), dir));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("full pipeline writes every artifact") {
  const auto config = small_corpus("full");
  run_pipeline(config);
  const fs::path run = config.run_dir();
  for (const char* file :
       {"manifest.json", "ingest/books.csv", "ingest/excluded.csv", "ingest/tokens/1.tok", "arcs/arcs.csv",
        "arcs/arcs_raw.csv", "arcs/arcs.bin", "svd/modes.csv", "svd/spectrum.csv", "svd/assignments.csv",
        "svd/top_books.csv", "svd/summary.json", "cluster/merges.csv", "cluster/cuts.csv", "cluster/silhouette.csv",
        "cluster/summary.json", "som/nodes.csv", "som/winners.csv", "som/bmatrix.csv", "som/summary.json",
        "null/salad/arcs.csv", "null/salad/svd/summary.json", "null/salad/cluster/summary.json",
        "null/salad/som/bmatrix.csv", "null/markov/arcs.csv", "null/markov/svd/summary.json",
        "report/histogram_edges.csv", "report/summary.json"}) {
    CHECK_MESSAGE(fs::exists(run / file), file);
  }
  const json manifest = read_json(run / "manifest.json");
  CHECK(manifest["stages"]["ingest"]["books"] == 24);
  CHECK(manifest["stages"]["arcs"]["rows"] == 24);
  CHECK(manifest["config_hash"] == config_hash(config));
  for (const char* stage : {"ingest", "arcs", "svd", "cluster", "som", "null", "report"}) {
    CHECK_MESSAGE(manifest["stages"].contains(stage), stage);
  }

  const auto arcs = read_arcs_csv(run / "arcs" / "arcs.csv", true);
  REQUIRE(arcs.size() == 24);
  CHECK(arcs[0].values.size() == 20);
  const auto bin = read_arcs_binary(run / "arcs" / "arcs.bin");
  CHECK(bin.rows() == 24);
  for (Eigen::Index c = 0; c < 20; ++c) CHECK(bin(3, c) == arcs[3].values[std::size_t(c)]);

  const json svd = read_json(run / "svd" / "summary.json");
  CHECK(svd["variance_explained"].size() == 20);
  const json cluster = read_json(run / "cluster" / "summary.json");
  CHECK(cluster["cuts"].size() == 4);
}

TEST_CASE("reruns are byte identical") {
  auto config = small_corpus("rerun");
  run_pipeline(config);
  config.name = "b";
  run_pipeline(config);
  const fs::path a = config.output / "a", b = config.output / "b";
  const auto files = relative_files(a);
  REQUIRE(files == relative_files(b));
  for (const auto& f : files) {
    if (f == "manifest.json") continue;
    CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f.string());
  }
  auto ma = read_json(a / "manifest.json"), mb = read_json(b / "manifest.json");
  ma["config"].erase("name");
  mb["config"].erase("name");
  CHECK(ma == mb);
}

TEST_CASE("raising the download threshold never adds books") {
  auto config = small_corpus("threshold");
  std::size_t previous = SIZE_MAX;
  for (const std::uint64_t threshold : {10, 20, 40, 80, 160}) {
    config.filter.min_downloads = threshold;
    config.name = "t" + std::to_string(threshold);
    run_ingest(config);
    const auto books = read_json(config.run_dir() / "manifest.json")["stages"]["ingest"]["books"].get<std::size_t>();
    CHECK(books <= previous);
    CHECK(books == std::size_t(24 - threshold / 10));
    previous = books;
  }
}

TEST_CASE("stage failures name the books involved") {
  SUBCASE("missing raw text") {
    auto config = small_corpus("missing", "99,Ghost,en,PS,500,50000\n");
    try {
      run_ingest(config);
      FAIL("expected a pipeline error");
    } catch (const PipelineError& e) {
      CHECK(e.stage() == "ingest");
      CHECK(e.book_ids() == std::vector<std::int64_t>{99});
    }
  }
  SUBCASE("book too short for the windows") {
    auto config = small_corpus("short", "77,Brief,en,PS,500,50000\n");
    std::ofstream(config.texts / "77.txt") << gutenberg_text("Brief", shaped_book(Shape::rise, 200, 0.4, 1));
    run_ingest(config);
    try {
      run_arcs(config);
      FAIL("expected a pipeline error");
    } catch (const PipelineError& e) {
      CHECK(e.stage() == "arcs");
      CHECK(e.book_ids() == std::vector<std::int64_t>{77});
    }
  }
  SUBCASE("later stage without its inputs") {
    auto config = small_corpus("order");
    CHECK_THROWS_AS(run_svd(config), PipelineError);
  }
}

TEST_CASE("unmatched front matter is excluded unless asked for") {
  auto config = small_corpus("unmatched", "50,Bare,en,PS,500,\n");
  std::ofstream(config.texts / "50.txt") << "joy1 gloom2 filler3\n";
  config.filter.min_words = 1;
  run_ingest(config);
  CHECK(slurp(config.run_dir() / "ingest" / "excluded.csv").find("50,") != std::string::npos);
  CHECK(read_json(config.run_dir() / "manifest.json")["stages"]["ingest"]["books"] == 24);
  config.include_unmatched = true;
  config.name = "b";
  run_ingest(config);
  CHECK(read_json(config.run_dir() / "manifest.json")["stages"]["ingest"]["books"] == 25);
}

TEST_CASE("configuration keys round trip") {
  PipelineConfig config;
  config.som.alpha = -0.2;
  config.cuts = {3, 7};
  config.null_kinds = {NullKind::markov2};
  config.lexicon_options.neutral_band.reset();
  PipelineConfig copy;
  for (const auto& [key, value] : config_entries(config)) set_config_value(copy, key, value);
  CHECK(config_entries(copy) == config_entries(config));
  CHECK(config_hash(copy) == config_hash(config));

  copy.name = "other";
  copy.output = "elsewhere";
  CHECK(config_hash(copy) == config_hash(config));
  copy.window_size = 5;
  CHECK(config_hash(copy) != config_hash(config));

  CHECK_THROWS_AS(set_config_value(copy, "no_such_key", "1"), Error);
  CHECK_THROWS_AS(set_config_value(copy, "window", "ten"), Error);

  const fs::path file = fs::temp_directory_path() / "storyarcs_config.txt";
  std::ofstream(file) << "# test\nwindow = 123\n\nsom_alpha = -0.3  # comment\nnull_kinds = salad\n";
  PipelineConfig loaded;
  load_config_file(loaded, file);
  CHECK(loaded.window_size == 123);
  CHECK(loaded.som.alpha == -0.3);
  CHECK(loaded.null_kinds == std::vector<NullKind>{NullKind::salad});
}
