#include "storyarcs/arcs.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "storyarcs/table_io.hpp"

namespace storyarcs {

WindowPlan plan_windows(std::size_t book_length, std::size_t window_size, std::size_t points) {
  if (points < 1) throw Error("an arc needs at least one point");
  if (window_size < 1) throw Error("window size must be positive");
  if (book_length <= window_size + points) {
    throw BookTooShortError(book_length, window_size, points);
  }
  WindowPlan plan;
  plan.book_length = book_length;
  plan.window_size = window_size;
  plan.points = points;
  const std::size_t span = book_length - window_size - 1;
  plan.stride = static_cast<double>(span) / static_cast<double>(points);
  plan.starts.reserve(points);
  for (std::size_t i = 0; i < points; ++i) {
    plan.starts.push_back(static_cast<std::size_t>(static_cast<std::uint64_t>(i) * span / points));
  }
  return plan;
}

EmotionalArc emotional_arc(std::int64_t book_id, std::span<const std::string> tokens,
                           const Lexicon& lexicon, std::size_t window_size, std::size_t points) {
  const WindowPlan plan = plan_windows(tokens.size(), window_size, points);

  constexpr std::size_t kMissing = static_cast<std::size_t>(-1);
  std::vector<std::size_t> ids(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) ids[i] = lexicon.index_of(tokens[i]).value_or(kMissing);

  // Counts for the current window [lo, hi), slid forward from window to
  // window rather than rebuilt.
  std::vector<std::uint32_t> counts(lexicon.size(), 0);
  std::size_t lo = 0;
  std::size_t hi = 0;
  EmotionalArc arc{book_id, {}, false};
  arc.values.reserve(points);
  for (std::size_t w = 0; w < points; ++w) {
    const std::size_t start = plan.starts[w];
    const std::size_t end = start + window_size;
    for (std::size_t i = lo; i < std::min(start, hi); ++i) {
      if (ids[i] != kMissing) --counts[ids[i]];
    }
    for (std::size_t i = std::max(start, hi); i < end; ++i) {
      if (ids[i] != kMissing) ++counts[ids[i]];
    }
    lo = start;
    hi = end;
    try {
      arc.values.push_back(lexicon.average(counts, window_size).score);
    } catch (const ZeroCoverageError&) {
      throw ArcError(book_id, w, "no lexicon words in window");
    }
  }
  return arc;
}

EmotionalArc emotional_arc(const BookRecord& book, const Lexicon& lexicon, std::size_t window_size,
                           std::size_t points) {
  return emotional_arc(book.entry.id, book.tokens, lexicon, window_size, points);
}

EmotionalArc mean_center(EmotionalArc arc) {
  if (!arc.values.empty()) {
    const double mean = std::accumulate(arc.values.begin(), arc.values.end(), 0.0) /
                        static_cast<double>(arc.values.size());
    for (double& v : arc.values) v -= mean;
  }
  arc.centered = true;
  return arc;
}

double arc_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("arc length mismatch");
  if (a.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) total += std::abs(a[t] - b[t]);
  return total / static_cast<double>(a.size());
}

void write_arcs_csv(const std::filesystem::path& path, std::span<const EmotionalArc> arcs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  const std::size_t n = arcs.empty() ? 0 : arcs.front().values.size();
  std::vector<std::string> fields{"book_id"};
  for (std::size_t t = 0; t < n; ++t) fields.push_back("t" + std::to_string(t));
  write_row(out, fields);
  for (const auto& arc : arcs) {
    if (arc.values.size() != n) throw Error("arcs in one table must share a length");
    fields.assign({std::to_string(arc.book_id)});
    for (double v : arc.values) fields.push_back(format_double(v));
    write_row(out, fields);
  }
}

std::vector<EmotionalArc> read_arcs_csv(const std::filesystem::path& path, bool centered) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  const auto rows = read_rows(in, ',');
  std::vector<EmotionalArc> arcs;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    EmotionalArc arc{std::stoll(rows[r].at(0)), {}, centered};
    for (std::size_t c = 1; c < rows[r].size(); ++c) arc.values.push_back(parse_double_field(rows[r][c]));
    arcs.push_back(std::move(arc));
  }
  return arcs;
}

namespace {

constexpr char kMagic[4] = {'A', 'R', 'C', 'M'};
constexpr std::uint32_t kBinaryVersion = 1;

template <class T>
void put_le(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw Error("truncated arc matrix file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_arcs_binary(const std::filesystem::path& path, const Eigen::MatrixXd& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, kBinaryVersion);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(values.rows()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(values.cols()));
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) put_le<double>(out, values(r, c));
  }
}

Eigen::MatrixXd read_arcs_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw Error("not an arc matrix file");
  if (get_le<std::uint32_t>(in) != kBinaryVersion) throw Error("unsupported arc matrix version");
  const auto rows = get_le<std::uint64_t>(in);
  const auto cols = get_le<std::uint64_t>(in);
  Eigen::MatrixXd values(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) values(r, c) = get_le<double>(in);
  }
  return values;
}

}  // namespace storyarcs
