#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "storyarcs/arcs.hpp"
#include "storyarcs/clustering.hpp"
#include "storyarcs/corpus.hpp"
#include "storyarcs/error.hpp"
#include "storyarcs/lexicon.hpp"
#include "storyarcs/nullgen.hpp"
#include "storyarcs/report.hpp"
#include "storyarcs/som.hpp"

namespace storyarcs {

class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const std::string& what, std::vector<std::int64_t> book_ids = {});
  const std::string& stage() const { return stage_; }
  const std::vector<std::int64_t>& book_ids() const { return book_ids_; }

 private:
  std::string stage_;
  std::vector<std::int64_t> book_ids_;
};

struct PipelineConfig {
  std::filesystem::path catalog;
  std::filesystem::path texts;  // directory holding <id>.txt
  std::filesystem::path lexicon;
  std::filesystem::path output = "run";
  std::string name;  // run directory under `output`

  FilterConfig filter;
  // Keep books whose front matter matched no rule (text used unchanged).
  bool include_unmatched = false;

  LexiconOptions lexicon_options;
  std::size_t window_size = kDefaultWindowSize;
  std::size_t arc_points = kDefaultArcPoints;

  std::size_t report_modes = 12;  // modes listed in rankings and variance summaries
  std::size_t top_k = 10;
  std::vector<std::size_t> cuts{2, 3, 4, 5, 6, 7, 8, 9};
  std::size_t dendrogram_clusters = 60;
  WardInput ward_input = WardInput::squared;

  SomConfig som;

  std::vector<NullKind> null_kinds{NullKind::salad, NullKind::markov2};
  std::uint64_t null_seed = 20'160'906;
  std::size_t null_replicas = 1;  // replica 0 feeds the null analyses
  bool null_som = true;

  HistogramSpec histogram;
  std::vector<double> min_fractions{0.025, 0.005};

  std::filesystem::path run_dir() const { return output / name; }
};

// Every configurable key, in canonical order, with its current value.
std::vector<std::pair<std::string, std::string>> config_entries(const PipelineConfig& config);
std::vector<std::string> config_keys();
void set_config_value(PipelineConfig& config, std::string_view key, std::string_view value);
// "key = value" lines; '#' starts a comment.
void load_config_file(PipelineConfig& config, const std::filesystem::path& path);
// FNV-1a over the canonical entries, excluding output location and name.
std::string config_hash(const PipelineConfig& config);

void run_ingest(const PipelineConfig& config);
void run_arcs(const PipelineConfig& config);
void run_svd(const PipelineConfig& config);
void run_cluster(const PipelineConfig& config);
void run_som(const PipelineConfig& config);
void run_null(const PipelineConfig& config);
void run_report(const PipelineConfig& config);
void run_pipeline(const PipelineConfig& config);

// Analysis artifacts for one arc set, written into `dir`. Shared by the real
// and null corpora.
void write_svd_artifacts(const std::filesystem::path& dir, std::span<const EmotionalArc> arcs,
                         const PipelineConfig& config);
void write_cluster_artifacts(const std::filesystem::path& dir, std::span<const EmotionalArc> arcs,
                             const PipelineConfig& config);
void write_som_artifacts(const std::filesystem::path& dir, std::span<const EmotionalArc> arcs,
                         const PipelineConfig& config);

std::vector<std::string> read_tokens(const std::filesystem::path& path);
void write_tokens(const std::filesystem::path& path, std::span<const std::string> tokens);

}  // namespace storyarcs
