#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "storyarcs/corpus.hpp"
#include "storyarcs/table_io.hpp"

namespace storyarcs {
namespace {

std::set<std::string> split_classes(std::string_view field) {
  std::set<std::string> classes;
  std::string current;
  for (char c : field) {
    if (c == ';' || c == '|' || c == ' ' || c == ',') {
      if (!current.empty()) classes.insert(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) classes.insert(current);
  return classes;
}

std::uint64_t parse_count(const std::string& field, const std::string& what, std::int64_t id) {
  try {
    std::size_t used = 0;
    const long long value = std::stoll(field, &used);
    if (used != field.size() || value < 0) throw std::invalid_argument(field);
    return static_cast<std::uint64_t>(value);
  } catch (const std::exception&) {
    throw CatalogError("catalog entry " + std::to_string(id) + ": bad " + what + " '" + field + "'");
  }
}

std::vector<CatalogEntry> read_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CatalogError("cannot open catalog " + path.string());
  std::string first_line;
  std::getline(in, first_line);
  in.clear();
  in.seekg(0);
  const auto rows = read_rows(in, detect_delimiter(first_line));
  if (rows.empty()) return {};

  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < rows[0].size(); ++i) column[rows[0][i]] = i;
  for (const char* required : {"id", "title", "language", "loc_classes", "downloads"}) {
    if (!column.count(required)) {
      throw CatalogError(std::string("catalog is missing column '") + required + "'");
    }
  }
  const auto word_col = column.find("word_count");

  std::vector<CatalogEntry> entries;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() > rows[0].size()) {
      throw CatalogError("catalog row " + std::to_string(r + 1) + " has more fields than the header");
    }
    const auto get = [&](const std::string& name) -> const std::string& {
      const std::size_t c = column.at(name);
      if (c >= row.size()) {
        throw CatalogError("catalog row " + std::to_string(r + 1) + " is missing '" + name + "'");
      }
      return row[c];
    };
    CatalogEntry e;
    try {
      e.id = std::stoll(get("id"));
    } catch (const std::exception&) {
      throw CatalogError("catalog row " + std::to_string(r + 1) + ": bad id");
    }
    e.title = get("title");
    e.language = get("language");
    e.loc_classes = split_classes(get("loc_classes"));
    e.downloads = parse_count(get("downloads"), "downloads", e.id);
    if (word_col != column.end() && word_col->second < row.size() && !row[word_col->second].empty()) {
      e.word_count = parse_count(row[word_col->second], "word_count", e.id);
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

CatalogEntry entry_from_json(const nlohmann::json& j, const std::filesystem::path& source) {
  try {
    CatalogEntry e;
    e.id = j.at("id").get<std::int64_t>();
    e.title = j.at("title").get<std::string>();
    e.language = j.at("language").get<std::string>();
    const auto& classes = j.at("loc_classes");
    if (classes.is_array()) {
      for (const auto& c : classes) e.loc_classes.insert(c.get<std::string>());
    } else {
      e.loc_classes = split_classes(classes.get<std::string>());
    }
    const auto downloads = j.at("downloads").get<std::int64_t>();
    if (downloads < 0) throw CatalogError("negative downloads");
    e.downloads = static_cast<std::uint64_t>(downloads);
    if (j.contains("word_count") && !j["word_count"].is_null()) {
      e.word_count = j["word_count"].get<std::uint64_t>();
    }
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw CatalogError(source.string() + ": " + ex.what());
  }
}

std::vector<CatalogEntry> read_directory(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& item : std::filesystem::directory_iterator(dir)) {
    if (item.is_regular_file() && item.path().extension() == ".json") files.push_back(item.path());
  }
  std::vector<CatalogEntry> entries;
  for (const auto& file : files) {
    std::ifstream in(file);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& ex) {
      throw CatalogError(file.string() + ": " + ex.what());
    }
    entries.push_back(entry_from_json(j, file));
  }
  std::sort(entries.begin(), entries.end(),
            [](const CatalogEntry& a, const CatalogEntry& b) { return a.id < b.id; });
  return entries;
}

}  // namespace

std::vector<CatalogEntry> read_catalog(const std::filesystem::path& path) {
  auto entries = std::filesystem::is_directory(path) ? read_directory(path) : read_table(path);
  std::unordered_set<std::int64_t> ids;
  for (const auto& e : entries) {
    if (!ids.insert(e.id).second) {
      throw CatalogError("duplicate catalog id " + std::to_string(e.id));
    }
  }
  return entries;
}

void write_catalog(const std::filesystem::path& path, std::span<const CatalogEntry> catalog) {
  TableWriter out(path);
  out.header({"id", "title", "language", "loc_classes", "downloads", "word_count"});
  for (const auto& e : catalog) {
    std::string classes;
    for (const auto& c : e.loc_classes) {
      if (!classes.empty()) classes += ';';
      classes += c;
    }
    out.row({std::to_string(e.id), e.title, e.language, classes, std::to_string(e.downloads),
             e.word_count ? std::to_string(*e.word_count) : std::string()});
  }
}

}  // namespace storyarcs
