#include "storyarcs/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "storyarcs/modes.hpp"
#include "storyarcs/table_io.hpp"

namespace storyarcs {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string join_ids(const std::vector<std::int64_t>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < 20; ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(ids[i]);
  }
  if (ids.size() > 20) out += ", ...";
  return out;
}

std::string trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> items;
  std::string current;
  for (char c : value) {
    if (c == ',') {
      if (!trim(current).empty()) items.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!trim(current).empty()) items.push_back(trim(current));
  return items;
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw Error("config '" + std::string(key) + "': cannot parse '" + s + "'");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  const std::string s = to_lower_ascii(trim(text));
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw Error("config '" + std::string(key) + "': expected a boolean, got '" + s + "'");
}

template <class Range, class Fn>
std::string join(const Range& items, Fn&& fn) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += ',';
    out += fn(item);
  }
  return out;
}

std::string identity(const std::string& s) { return s; }

// ---- manifest -------------------------------------------------------------

fs::path manifest_path(const PipelineConfig& config) { return config.run_dir() / "manifest.json"; }

json load_manifest(const PipelineConfig& config) {
  std::ifstream in(manifest_path(config));
  if (!in) return json::object();
  return json::parse(in);
}

void update_manifest(const PipelineConfig& config, const std::string& stage, json counts) {
  json manifest = load_manifest(config);
  json cfg = json::object();
  for (const auto& [key, value] : config_entries(config)) cfg[key] = value;
  manifest["config"] = cfg;
  manifest["config_hash"] = config_hash(config);
  manifest["seeds"] = {{"som", config.som.seed}, {"null", config.null_seed}};
  manifest["stages"][stage] = std::move(counts);
  std::ofstream out(manifest_path(config), std::ios::binary);
  out << manifest.dump(2) << '\n';
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// ---- ingest artifacts -----------------------------------------------------

struct IngestedBook {
  CatalogEntry entry;
  FrontRule front = FrontRule::none;
  BackRule back = BackRule::none;
};

fs::path token_dir(const PipelineConfig& config) { return config.run_dir() / "ingest" / "tokens"; }
fs::path text_path(const PipelineConfig& config, std::int64_t id) {
  return config.texts / (std::to_string(id) + ".txt");
}

void write_books(const fs::path& path, const std::vector<IngestedBook>& books) {
  TableWriter out(path);
  out.header({"id", "title", "language", "loc_classes", "downloads", "word_count", "front_rule", "back_rule"});
  for (const auto& b : books) {
    std::string classes;
    for (const auto& c : b.entry.loc_classes) classes += (classes.empty() ? "" : ";") + c;
    out.row({std::to_string(b.entry.id), b.entry.title, b.entry.language, classes,
             std::to_string(b.entry.downloads), std::to_string(b.entry.word_count.value_or(0)),
             std::to_string(static_cast<int>(b.front)), std::to_string(static_cast<int>(b.back))});
  }
}

std::vector<IngestedBook> read_books(const PipelineConfig& config) {
  const fs::path path = config.run_dir() / "ingest" / "books.csv";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PipelineError("arcs", "missing " + path.string() + "; run ingest first");
  const auto rows = read_rows(in, ',');
  std::vector<IngestedBook> books;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    IngestedBook b;
    b.entry.id = std::stoll(row.at(0));
    b.entry.title = row.at(1);
    b.entry.language = row.at(2);
    std::string cls;
    for (char c : row.at(3) + ";") {
      if (c == ';') {
        if (!cls.empty()) b.entry.loc_classes.insert(cls);
        cls.clear();
      } else {
        cls.push_back(c);
      }
    }
    b.entry.downloads = std::stoull(row.at(4));
    b.entry.word_count = std::stoull(row.at(5));
    b.front = static_cast<FrontRule>(std::stoi(row.at(6)));
    b.back = static_cast<BackRule>(std::stoi(row.at(7)));
    books.push_back(std::move(b));
  }
  return books;
}

std::vector<EmotionalArc> read_centered_arcs(const fs::path& path, const std::string& stage) {
  if (!fs::exists(path)) throw PipelineError(stage, "missing " + path.string() + "; run arcs first");
  return read_arcs_csv(path, true);
}

std::vector<EmotionalArc> compute_arcs(const std::string& stage,
                                       const std::vector<std::pair<std::int64_t, std::vector<std::string>>>& books,
                                       const Lexicon& lexicon, const PipelineConfig& config) {
  std::vector<EmotionalArc> arcs;
  std::vector<std::int64_t> failed;
  std::string first_error;
  for (const auto& [id, tokens] : books) {
    try {
      arcs.push_back(emotional_arc(id, tokens, lexicon, config.window_size, config.arc_points));
    } catch (const Error& e) {
      if (failed.empty()) first_error = e.what();
      failed.push_back(id);
    }
  }
  if (!failed.empty()) {
    throw PipelineError(stage, std::to_string(failed.size()) + " book(s) failed (" + first_error + ")", failed);
  }
  return arcs;
}

std::vector<EmotionalArc> centered(std::vector<EmotionalArc> arcs) {
  for (auto& arc : arcs) arc = mean_center(std::move(arc));
  return arcs;
}

Eigen::MatrixXd arc_values(std::span<const EmotionalArc> arcs) { return ArcMatrix::from_arcs(arcs).values; }

std::vector<std::string> id_labels(std::span<const std::int64_t> ids) {
  std::vector<std::string> labels;
  for (const auto id : ids) labels.push_back(std::to_string(id));
  return labels;
}

std::vector<std::string> numbered_header(const std::string& first, const std::string& prefix,
                                         std::size_t count, std::size_t start = 0) {
  std::vector<std::string> header{first};
  for (std::size_t i = 0; i < count; ++i) header.push_back(prefix + std::to_string(i + start));
  return header;
}

}  // namespace

PipelineError::PipelineError(std::string stage, const std::string& what, std::vector<std::int64_t> book_ids)
    : Error("stage '" + stage + "': " + what + (book_ids.empty() ? "" : " [books: " + join_ids(book_ids) + "]")),
      stage_(std::move(stage)),
      book_ids_(std::move(book_ids)) {}

// ---- configuration --------------------------------------------------------

std::vector<std::pair<std::string, std::string>> config_entries(const PipelineConfig& c) {
  const auto num = [](auto v) { return std::to_string(v); };
  const auto real = [](double v) { return format_double(v); };
  const auto band = c.lexicon_options.neutral_band;
  return {
      {"catalog", c.catalog.string()},
      {"texts", c.texts.string()},
      {"lexicon", c.lexicon.string()},
      {"output", c.output.string()},
      {"name", c.name},
      {"min_words", num(c.filter.min_words)},
      {"max_words", num(c.filter.max_words)},
      {"min_downloads", num(c.filter.min_downloads)},
      {"languages", join(c.filter.languages, identity)},
      {"loc_classes", join(c.filter.loc_classes, identity)},
      {"title_blacklist", join(c.filter.title_blacklist, identity)},
      {"include_unmatched", c.include_unmatched ? "true" : "false"},
      {"neutral_band", band ? real(band->low) + "," + real(band->high) : "off"},
      {"score_column", num(c.lexicon_options.score_column)},
      {"window", num(c.window_size)},
      {"points", num(c.arc_points)},
      {"report_modes", num(c.report_modes)},
      {"top_k", num(c.top_k)},
      {"cuts", join(c.cuts, [](std::size_t k) { return std::to_string(k); })},
      {"dendrogram_clusters", num(c.dendrogram_clusters)},
      {"ward_input", c.ward_input == WardInput::squared ? "squared" : "raw"},
      {"som_rows", num(c.som.rows)},
      {"som_cols", num(c.som.cols)},
      {"som_alpha", real(c.som.alpha)},
      {"som_beta", real(c.som.beta)},
      {"som_steps", num(c.som.total_steps)},
      {"som_seed", num(c.som.seed)},
      {"som_amplitude", real(c.som.init_amplitude)},
      {"null_kinds", join(c.null_kinds, [](NullKind k) { return std::string(to_string(k)); })},
      {"null_seed", num(c.null_seed)},
      {"null_replicas", num(c.null_replicas)},
      {"null_som", c.null_som ? "true" : "false"},
      {"hist_low", real(c.histogram.low)},
      {"hist_high", real(c.histogram.high)},
      {"hist_bins", num(c.histogram.bins)},
      {"min_fractions", join(c.min_fractions, real)},
  };
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [key, value] : config_entries(PipelineConfig{})) keys.push_back(key);
  return keys;
}

void set_config_value(PipelineConfig& c, std::string_view key, std::string_view raw) {
  const std::string value = trim(raw);
  const auto size = [&] { return parse_number<std::size_t>(key, value); };
  const auto u64 = [&] { return parse_number<std::uint64_t>(key, value); };
  const auto real = [&] { return parse_number<double>(key, value); };
  const auto set_of = [&] {
    const auto items = split_list(value);
    return std::set<std::string>(items.begin(), items.end());
  };

  if (key == "catalog") c.catalog = value;
  else if (key == "texts") c.texts = value;
  else if (key == "lexicon") c.lexicon = value;
  else if (key == "output") c.output = value;
  else if (key == "name") c.name = value;
  else if (key == "min_words") c.filter.min_words = u64();
  else if (key == "max_words") c.filter.max_words = u64();
  else if (key == "min_downloads") c.filter.min_downloads = u64();
  else if (key == "languages") c.filter.languages = set_of();
  else if (key == "loc_classes") c.filter.loc_classes = set_of();
  else if (key == "title_blacklist") c.filter.title_blacklist = split_list(value);
  else if (key == "include_unmatched") c.include_unmatched = parse_bool(key, value);
  else if (key == "neutral_band") {
    if (to_lower_ascii(value) == "off" || value.empty()) {
      c.lexicon_options.neutral_band.reset();
    } else {
      const auto parts = split_list(value);
      if (parts.size() != 2) throw Error("config 'neutral_band': expected 'low,high' or 'off'");
      c.lexicon_options.neutral_band =
          NeutralBand{parse_number<double>(key, parts[0]), parse_number<double>(key, parts[1])};
    }
  }
  else if (key == "score_column") c.lexicon_options.score_column = size();
  else if (key == "window") c.window_size = size();
  else if (key == "points") c.arc_points = size();
  else if (key == "report_modes") c.report_modes = size();
  else if (key == "top_k") c.top_k = size();
  else if (key == "cuts") {
    c.cuts.clear();
    for (const auto& item : split_list(value)) c.cuts.push_back(parse_number<std::size_t>(key, item));
  }
  else if (key == "dendrogram_clusters") c.dendrogram_clusters = size();
  else if (key == "ward_input") {
    if (value == "squared") c.ward_input = WardInput::squared;
    else if (value == "raw") c.ward_input = WardInput::raw;
    else throw Error("config 'ward_input': expected 'squared' or 'raw'");
  }
  else if (key == "som_rows") c.som.rows = size();
  else if (key == "som_cols") c.som.cols = size();
  else if (key == "som_alpha") c.som.alpha = real();
  else if (key == "som_beta") c.som.beta = real();
  else if (key == "som_steps") c.som.total_steps = u64();
  else if (key == "som_seed") c.som.seed = u64();
  else if (key == "som_amplitude") c.som.init_amplitude = real();
  else if (key == "null_kinds") {
    c.null_kinds.clear();
    for (const auto& item : split_list(value)) c.null_kinds.push_back(parse_null_kind(item));
  }
  else if (key == "null_seed") c.null_seed = u64();
  else if (key == "null_replicas") c.null_replicas = size();
  else if (key == "null_som") c.null_som = parse_bool(key, value);
  else if (key == "hist_low") c.histogram.low = real();
  else if (key == "hist_high") c.histogram.high = real();
  else if (key == "hist_bins") c.histogram.bins = size();
  else if (key == "min_fractions") {
    c.min_fractions.clear();
    for (const auto& item : split_list(value)) c.min_fractions.push_back(parse_number<double>(key, item));
  }
  else throw Error("unknown config key '" + std::string(key) + "'");
}

void load_config_file(PipelineConfig& config, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    set_config_value(config, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

std::string config_hash(const PipelineConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [key, value] : config_entries(config)) {
    if (key == "output" || key == "name") continue;
    for (const char c : key + "=" + value + "\n") {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---- token files ----------------------------------------------------------

std::vector<std::string> read_tokens(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) tokens.push_back(std::move(line));
  }
  return tokens;
}

void write_tokens(const fs::path& path, std::span<const std::string> tokens) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& t : tokens) out << t << '\n';
}

// ---- stages ---------------------------------------------------------------

void run_ingest(const PipelineConfig& config) {
  const std::string stage = "ingest";
  if (config.name.empty()) throw PipelineError(stage, "run name is empty");
  const fs::path dir = config.run_dir() / "ingest";
  fs::create_directories(token_dir(config));

  std::vector<CatalogEntry> catalog;
  try {
    catalog = read_catalog(config.catalog);
  } catch (const Error& e) {
    throw PipelineError(stage, e.what());
  }

  // Fill in missing word counts from the cleaned text, where one exists.
  std::size_t counted = 0;
  for (auto& entry : catalog) {
    if (entry.word_count) continue;
    const fs::path path = text_path(config, entry.id);
    if (!fs::exists(path)) continue;
    entry.word_count = tokenize(clean_text(read_text_file(path)).text).size();
    ++counted;
  }

  std::vector<CatalogEntry> kept;
  try {
    kept = filter_catalog(catalog, config.filter);
  } catch (const Error& e) {
    throw PipelineError(stage, e.what());
  }

  std::vector<IngestedBook> books;
  std::vector<std::int64_t> missing;
  std::size_t front_matched = 0, back_matched = 0, both_matched = 0;
  TableWriter excluded(dir / "excluded.csv");
  excluded.header({"id", "reason"});
  for (const auto& entry : kept) {
    const fs::path path = text_path(config, entry.id);
    if (!fs::exists(path)) {
      missing.push_back(entry.id);
      continue;
    }
    const BookRecord book = make_book(entry, read_text_file(path));
    front_matched += book.front_rule != FrontRule::none;
    back_matched += book.back_rule != BackRule::none;
    both_matched += book.front_rule != FrontRule::none && book.back_rule != BackRule::none;
    if (book.front_rule == FrontRule::none && !config.include_unmatched) {
      excluded.row({std::to_string(entry.id), "no front matter rule matched"});
      continue;
    }
    if (book.tokens.empty()) {
      excluded.row({std::to_string(entry.id), "empty after cleaning"});
      continue;
    }
    write_tokens(token_dir(config) / (std::to_string(entry.id) + ".tok"), book.tokens);
    CatalogEntry stored = entry;
    if (!stored.word_count) stored.word_count = book.tokens.size();
    books.push_back({std::move(stored), book.front_rule, book.back_rule});
  }
  if (!missing.empty()) throw PipelineError(stage, "raw text missing", missing);
  write_books(dir / "books.csv", books);

  update_manifest(config, stage,
                  {{"catalog_entries", catalog.size()},
                   {"word_counts_computed", counted},
                   {"passed_filter", kept.size()},
                   {"front_matched", front_matched},
                   {"back_matched", back_matched},
                   {"both_matched", both_matched},
                   {"excluded", kept.size() - books.size()},
                   {"books", books.size()}});
}

void run_arcs(const PipelineConfig& config) {
  const std::string stage = "arcs";
  const auto books = read_books(config);
  if (books.empty()) throw PipelineError(stage, "no books survived ingest");
  Lexicon lexicon = [&] {
    try {
      return Lexicon::load_file(config.lexicon, config.lexicon_options);
    } catch (const Error& e) {
      throw PipelineError(stage, e.what());
    }
  }();

  std::vector<std::pair<std::int64_t, std::vector<std::string>>> tokens;
  tokens.reserve(books.size());
  for (const auto& b : books) {
    tokens.emplace_back(b.entry.id, read_tokens(token_dir(config) / (std::to_string(b.entry.id) + ".tok")));
  }
  const auto raw = compute_arcs(stage, tokens, lexicon, config);
  const auto arcs = centered(raw);

  const fs::path dir = config.run_dir() / "arcs";
  fs::create_directories(dir);
  write_arcs_csv(dir / "arcs_raw.csv", raw);
  write_arcs_csv(dir / "arcs.csv", arcs);
  write_arcs_binary(dir / "arcs.bin", arc_values(arcs));

  update_manifest(config, stage,
                  {{"rows", arcs.size()},
                   {"points", config.arc_points},
                   {"window", config.window_size},
                   {"lexicon_entries", lexicon.size()},
                   {"lexicon_excluded", lexicon.excluded_count()}});
}

void write_svd_artifacts(const fs::path& dir, std::span<const EmotionalArc> arcs, const PipelineConfig& config) {
  fs::create_directories(dir);
  const ModeDecomposition d = decompose(ArcMatrix::from_arcs(arcs));
  const std::size_t k = d.mode_count();
  const auto labels = id_labels(d.book_ids);

  std::vector<std::string> mode_labels;
  for (std::size_t j = 0; j < k; ++j) mode_labels.push_back(std::to_string(j + 1));
  write_labeled_matrix(dir / "modes.csv", numbered_header("mode", "t", static_cast<std::size_t>(d.modes.cols())),
                       mode_labels, d.modes);
  write_labeled_matrix(dir / "coefficients.csv", numbered_header("book_id", "mode", k, 1), labels, d.coefficients);
  write_labeled_matrix(dir / "coefficients_normalized.csv", numbered_header("book_id", "mode", k, 1), labels,
                       d.normalized);

  json curve = json::array();
  {
    TableWriter spectrum(dir / "spectrum.csv");
    spectrum.header({"mode", "singular_value", "variance_explained"});
    for (std::size_t j = 0; j < k; ++j) {
      const double ve = variance_explained(d, j + 1);
      curve.push_back(ve);
      spectrum.row({std::to_string(j + 1), format_double(d.singular_values(static_cast<Eigen::Index>(j))),
                    format_double(ve)});
    }
  }
  {
    TableWriter assignments(dir / "assignments.csv");
    assignments.header({"book_id", "mode", "polarity", "label"});
    for (std::size_t r = 0; r < d.book_ids.size(); ++r) {
      const SignedMode m = assign_mode(d, r);
      assignments.row({labels[r], std::to_string(m.mode + 1),
                       m.polarity == Polarity::positive ? "+" : "-", m.label()});
    }
  }
  {
    TableWriter top(dir / "top_books.csv");
    top.header({"label", "rank", "book_id", "coefficient"});
    for (std::size_t j = 0; j < std::min(k, config.report_modes); ++j) {
      for (const Polarity p : {Polarity::positive, Polarity::negative}) {
        const auto ranked = rank_books_for_mode(d, j, p, config.top_k);
        for (std::size_t i = 0; i < ranked.size(); ++i) {
          top.row({SignedMode{j, p}.label(), std::to_string(i + 1), std::to_string(ranked[i].book_id),
                   format_double(ranked[i].coefficient)});
        }
      }
    }
  }
  const std::size_t head = std::min(k, config.report_modes);
  write_json(dir / "summary.json",
             {{"rows", d.book_ids.size()},
              {"points", d.modes.cols()},
              {"modes", k},
              {"report_modes", head},
              {"variance_explained_report_modes", head ? curve[head - 1].get<double>() : 0.0},
              {"variance_explained", curve},
              {"singular_values", std::vector<double>(d.singular_values.data(), d.singular_values.data() + k)}});
}

void write_cluster_artifacts(const fs::path& dir, std::span<const EmotionalArc> arcs, const PipelineConfig& config) {
  fs::create_directories(dir);
  const DistanceMatrix d = distance_matrix(arcs);
  const ClusterTree tree = ward_linkage(d, config.ward_input);
  const std::size_t n = d.size();

  {
    TableWriter merges(dir / "merges.csv");
    merges.header({"step", "a", "b", "height", "size"});
    for (std::size_t s = 0; s < tree.merges.size(); ++s) {
      const Merge& m = tree.merges[s];
      merges.row({std::to_string(s), std::to_string(m.a), std::to_string(m.b), format_double(m.height),
                  std::to_string(m.size)});
    }
  }

  std::vector<std::size_t> cuts;
  for (const std::size_t k : config.cuts) {
    if (k >= 1 && k <= n) cuts.push_back(k);
  }
  std::vector<std::vector<std::size_t>> labels;
  std::vector<Silhouette> silhouettes;
  for (const std::size_t k : cuts) {
    labels.push_back(cut(tree, k));
    silhouettes.push_back(k >= 2 ? silhouette(labels.back(), d) : Silhouette{std::vector<double>(n, 0.0), 0.0});
  }

  std::vector<std::string> header{"book_id"};
  for (const std::size_t k : cuts) header.push_back("k" + std::to_string(k));
  {
    std::ofstream cut_out(dir / "cuts.csv", std::ios::binary);
    std::ofstream sil_out(dir / "silhouette.csv", std::ios::binary);
    write_row(cut_out, header);
    write_row(sil_out, header);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::string> cut_row{std::to_string(d.book_ids[i])};
      std::vector<std::string> sil_row{std::to_string(d.book_ids[i])};
      for (std::size_t c = 0; c < cuts.size(); ++c) {
        cut_row.push_back(std::to_string(labels[c][i]));
        sil_row.push_back(format_double(silhouettes[c].values[i]));
      }
      write_row(cut_out, cut_row);
      write_row(sil_out, sil_row);
    }
  }

  json cut_summary = json::array();
  for (std::size_t c = 0; c < cuts.size(); ++c) {
    json clusters = json::array();
    for (std::size_t label = 0; label < cuts[c]; ++label) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < n; ++i) {
        if (labels[c][i] == label) members.push_back(i);
      }
      std::vector<double> mean(arcs.front().values.size(), 0.0);
      for (const std::size_t i : members) {
        for (std::size_t t = 0; t < mean.size(); ++t) mean[t] += arcs[i].values[t];
      }
      for (double& v : mean) v /= static_cast<double>(members.size());
      clusters.push_back({{"label", label},
                          {"size", members.size()},
                          {"central_book", d.book_ids[central_book(members, d)]},
                          {"mean_arc", mean}});
    }
    cut_summary.push_back({{"k", cuts[c]}, {"mean_silhouette", silhouettes[c].mean}, {"clusters", clusters}});
  }

  const DendrogramTop top = dendrogram_top(tree, d, config.dendrogram_clusters);
  json top_clusters = json::array();
  for (std::size_t i = 0; i < top.node_ids.size(); ++i) {
    top_clusters.push_back({{"node", top.node_ids[i]},
                            {"size", top.members[i].size()},
                            {"central_book", d.book_ids[top.central_rows[i]]}});
  }
  json top_merges = json::array();
  for (const Merge& m : top.merges) {
    top_merges.push_back({{"a", m.a}, {"b", m.b}, {"height", m.height}, {"size", m.size}});
  }

  write_json(dir / "summary.json",
             {{"leaves", n},
              {"final_linkage_cost", tree.merges.empty() ? 0.0 : tree.merges.back().height},
              {"ward_input", config.ward_input == WardInput::squared ? "squared" : "raw"},
              {"cuts", cut_summary},
              {"dendrogram", {{"clusters", top_clusters}, {"merges", top_merges}}}});
}

void write_som_artifacts(const fs::path& dir, std::span<const EmotionalArc> arcs, const PipelineConfig& config) {
  fs::create_directories(dir);
  const std::size_t n = arcs.front().values.size();
  const SomGrid grid = train(init_grid(config.som, n), arcs, config.som);
  const WinnerMap map = winners(grid, arcs);
  const Eigen::MatrixXd b = b_matrix(grid);

  std::vector<std::string> node_labels;
  for (std::size_t k = 0; k < grid.node_count(); ++k) node_labels.push_back(std::to_string(k));
  write_labeled_matrix(dir / "nodes.csv", numbered_header("node", "t", n), node_labels, grid.nodes);

  std::vector<std::string> row_labels;
  for (std::size_t r = 0; r < grid.rows; ++r) row_labels.push_back(std::to_string(r));
  Eigen::MatrixXd counts(static_cast<Eigen::Index>(grid.rows), static_cast<Eigen::Index>(grid.cols));
  for (std::size_t k = 0; k < grid.node_count(); ++k) {
    const auto [r, c] = grid.coords(k);
    counts(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = static_cast<double>(map.nodes[k].count);
  }
  write_labeled_matrix(dir / "winners.csv", numbered_header("row", "col", grid.cols), row_labels, counts);
  write_labeled_matrix(dir / "bmatrix.csv", numbered_header("row", "col", grid.cols), row_labels, b);

  {
    TableWriter members(dir / "members.csv");
    members.header({"node", "row", "col", "book_id"});
    for (std::size_t k = 0; k < grid.node_count(); ++k) {
      const auto [r, c] = grid.coords(k);
      for (const std::size_t i : map.nodes[k].members) {
        members.row({std::to_string(k), std::to_string(r), std::to_string(c), std::to_string(arcs[i].book_id)});
      }
    }
  }

  std::vector<std::size_t> order(grid.node_count());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t c) { return map.nodes[a].count > map.nodes[c].count; });
  json top = json::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(9, order.size()); ++i) {
    const std::size_t k = order[i];
    std::vector<std::int64_t> ids;
    for (const std::size_t m : map.nodes[k].members) ids.push_back(arcs[m].book_id);
    top.push_back({{"node", k}, {"count", map.nodes[k].count}, {"books", ids}});
  }
  write_json(dir / "summary.json",
             {{"corpus", arcs.size()},
              {"rows", grid.rows},
              {"cols", grid.cols},
              {"steps", config.som.total_steps},
              {"seed", config.som.seed},
              {"occupied_nodes", std::count_if(map.nodes.begin(), map.nodes.end(),
                                               [](const NodeWinners& w) { return w.count > 0; })},
              {"top_nodes", top}});
}

void run_svd(const PipelineConfig& config) {
  const auto arcs = read_centered_arcs(config.run_dir() / "arcs" / "arcs.csv", "svd");
  try {
    write_svd_artifacts(config.run_dir() / "svd", arcs, config);
  } catch (const Error& e) {
    throw PipelineError("svd", e.what());
  }
  update_manifest(config, "svd", {{"rows", arcs.size()}});
}

void run_cluster(const PipelineConfig& config) {
  const auto arcs = read_centered_arcs(config.run_dir() / "arcs" / "arcs.csv", "cluster");
  try {
    write_cluster_artifacts(config.run_dir() / "cluster", arcs, config);
  } catch (const Error& e) {
    throw PipelineError("cluster", e.what());
  }
  update_manifest(config, "cluster", {{"leaves", arcs.size()}});
}

void run_som(const PipelineConfig& config) {
  const auto arcs = read_centered_arcs(config.run_dir() / "arcs" / "arcs.csv", "som");
  try {
    write_som_artifacts(config.run_dir() / "som", arcs, config);
  } catch (const Error& e) {
    throw PipelineError("som", e.what());
  }
  update_manifest(config, "som", {{"corpus", arcs.size()}, {"steps", config.som.total_steps}});
}

void run_null(const PipelineConfig& config) {
  const std::string stage = "null";
  if (config.null_replicas < 1) throw PipelineError(stage, "null_replicas must be at least 1");
  const auto books = read_books(config);
  const Lexicon lexicon = Lexicon::load_file(config.lexicon, config.lexicon_options);
  json counts = json::object();

  for (const NullKind kind : config.null_kinds) {
    const std::string tag(to_string(kind));
    const fs::path dir = config.run_dir() / "null" / tag;
    fs::create_directories(dir);
    NullSpec spec{kind, config.null_seed, config.null_replicas};

    std::vector<std::vector<std::pair<std::int64_t, std::vector<std::string>>>> per_replica(spec.replicas);
    for (const auto& b : books) {
      const std::int64_t id = b.entry.id;
      std::vector<std::string> source;
      if (kind == NullKind::salad) {
        source = read_tokens(token_dir(config) / (std::to_string(id) + ".tok"));
      } else {
        const fs::path raw = text_path(config, id);
        if (!fs::exists(raw)) throw PipelineError(stage, "raw text missing", {id});
        source = tokenize_keep_punctuation(clean_text(read_text_file(raw)).text);
      }
      auto replicas = null_replicas(source, id, spec);
      for (std::size_t r = 0; r < replicas.size(); ++r) {
        write_tokens(token_dir(config) / (std::to_string(id) + "." + tag + "." + std::to_string(r) + ".tok"),
                     replicas[r]);
        std::vector<std::string> words;
        if (kind == NullKind::salad) {
          words = std::move(replicas[r]);
        } else {
          // Punctuation marks were only needed to train the chain.
          for (const auto& t : replicas[r]) {
            auto w = tokenize(t);
            words.insert(words.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
          }
        }
        per_replica[r].emplace_back(id, std::move(words));
      }
    }

    std::vector<EmotionalArc> analysis_arcs;
    for (std::size_t r = 0; r < spec.replicas; ++r) {
      auto arcs = centered(compute_arcs(stage, per_replica[r], lexicon, config));
      write_arcs_csv(dir / ("arcs_r" + std::to_string(r) + ".csv"), arcs);
      if (r == 0) analysis_arcs = std::move(arcs);
    }
    write_arcs_csv(dir / "arcs.csv", analysis_arcs);

    try {
      write_svd_artifacts(dir / "svd", analysis_arcs, config);
      write_cluster_artifacts(dir / "cluster", analysis_arcs, config);
      if (config.null_som) write_som_artifacts(dir / "som", analysis_arcs, config);
    } catch (const Error& e) {
      throw PipelineError(stage, tag + ": " + e.what());
    }
    counts[tag] = {{"books", books.size()}, {"replicas", spec.replicas}};
  }
  update_manifest(config, stage, counts);
}

void run_report(const PipelineConfig& config) {
  const std::string stage = "report";
  const auto books = read_books(config);
  std::map<std::int64_t, std::uint64_t> downloads;
  for (const auto& b : books) downloads[b.entry.id] = b.entry.downloads;

  const fs::path assignments_path = config.run_dir() / "svd" / "assignments.csv";
  std::ifstream in(assignments_path, std::ios::binary);
  if (!in) throw PipelineError(stage, "missing " + assignments_path.string() + "; run svd first");
  const auto rows = read_rows(in, ',');
  std::vector<SignedMode> modes;
  std::vector<std::uint64_t> counts;
  std::vector<std::int64_t> unknown;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::int64_t id = std::stoll(rows[r].at(0));
    const auto it = downloads.find(id);
    if (it == downloads.end()) {
      unknown.push_back(id);
      continue;
    }
    modes.push_back({std::stoul(rows[r].at(1)) - 1, rows[r].at(2) == "-" ? Polarity::negative : Polarity::positive});
    counts.push_back(it->second);
  }
  if (!unknown.empty()) throw PipelineError(stage, "books in SVD output but not in ingest output", unknown);

  const fs::path dir = config.run_dir() / "report";
  fs::create_directories(dir);
  {
    TableWriter edges(dir / "histogram_edges.csv");
    edges.header({"bin", "log10_lower", "log10_upper"});
    for (std::size_t i = 0; i < config.histogram.bins; ++i) {
      edges.row({std::to_string(i), format_double(config.histogram.lower_edge(i)),
                 format_double(config.histogram.lower_edge(i + 1))});
    }
  }
  json variants = json::array();
  for (const double fraction : config.min_fractions) {
    const DownloadReport report = download_stats(modes, counts, fraction, config.histogram);
    std::vector<std::string> header{"label", "members", "fraction", "median_downloads", "mean_downloads",
                                    "below_range", "above_range"};
    for (std::size_t i = 0; i < config.histogram.bins; ++i) header.push_back("bin" + std::to_string(i));
    std::ofstream out(dir / ("downloads_" + format_double(fraction) + ".csv"), std::ios::binary);
    write_row(out, header);
    json groups = json::array();
    for (const auto& s : report.kept) {
      std::vector<std::string> row{s.mode.label(),
                                   std::to_string(s.members),
                                   format_double(s.fraction),
                                   format_double(s.median_downloads),
                                   format_double(s.mean_downloads),
                                   std::to_string(s.below_range),
                                   std::to_string(s.above_range)};
      for (const auto h : s.histogram) row.push_back(std::to_string(h));
      write_row(out, row);
      groups.push_back({{"label", s.mode.label()},
                        {"members", s.members},
                        {"median_downloads", s.median_downloads},
                        {"mean_downloads", s.mean_downloads}});
    }
    variants.push_back({{"min_fraction", fraction}, {"groups", groups}, {"dropped_groups", report.dropped.size()}});
  }
  write_json(dir / "summary.json", {{"corpus", modes.size()}, {"variants", variants}});

  // Stage counts must agree from ingest through every analysis.
  const json manifest = load_manifest(config);
  json reconcile = {{"books", books.size()}, {"svd_rows", modes.size()}};
  bool consistent = modes.size() == books.size();
  const auto check = [&](const char* stage_name, const char* field) {
    if (manifest.contains("stages") && manifest["stages"].contains(stage_name)) {
      const auto v = manifest["stages"][stage_name][field].get<std::size_t>();
      reconcile[std::string(stage_name) + "_" + field] = v;
      consistent = consistent && v == books.size();
    }
  };
  check("arcs", "rows");
  check("cluster", "leaves");
  check("som", "corpus");
  reconcile["consistent"] = consistent;
  update_manifest(config, stage, reconcile);
  if (!consistent) throw PipelineError(stage, "stage counts do not reconcile");
}

void run_pipeline(const PipelineConfig& config) {
  run_ingest(config);
  run_arcs(config);
  run_svd(config);
  run_cluster(config);
  run_som(config);
  if (!config.null_kinds.empty()) run_null(config);
  run_report(config);
}

}  // namespace storyarcs
