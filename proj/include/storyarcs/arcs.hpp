#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "storyarcs/corpus.hpp"
#include "storyarcs/error.hpp"
#include "storyarcs/lexicon.hpp"

namespace storyarcs {

constexpr std::size_t kDefaultWindowSize = 10'000;
constexpr std::size_t kDefaultArcPoints = 200;

class BookTooShortError : public Error {
 public:
  BookTooShortError(std::size_t book_length, std::size_t window_size, std::size_t points)
      : Error("book of " + std::to_string(book_length) + " words is too short for " +
              std::to_string(points) + " windows of " + std::to_string(window_size) + " words") {}
};

class ArcError : public Error {
 public:
  ArcError(std::int64_t book_id, std::size_t window, const std::string& why)
      : Error("book " + std::to_string(book_id) + ", window " + std::to_string(window) + ": " + why),
        book_id_(book_id), window_(window) {}
  std::int64_t book_id() const { return book_id_; }
  std::size_t window() const { return window_; }

 private:
  std::int64_t book_id_;
  std::size_t window_;
};

struct WindowPlan {
  std::size_t book_length = 0;
  std::size_t window_size = 0;
  std::size_t points = 0;
  // Words advanced per point, (N - (Nw + 1)) / n. Informational; the
  // integer starts below are what gets used.
  double stride = 0.0;
  std::vector<std::size_t> starts;
};

// start_i = floor(i * (N - Nw - 1) / n); window i is [start_i, start_i + Nw).
// Requires N > Nw + n.
WindowPlan plan_windows(std::size_t book_length, std::size_t window_size, std::size_t points);

struct EmotionalArc {
  std::int64_t book_id = 0;
  std::vector<double> values;
  bool centered = false;
};

EmotionalArc emotional_arc(std::int64_t book_id, std::span<const std::string> tokens,
                           const Lexicon& lexicon, std::size_t window_size = kDefaultWindowSize,
                           std::size_t points = kDefaultArcPoints);
EmotionalArc emotional_arc(const BookRecord& book, const Lexicon& lexicon,
                           std::size_t window_size = kDefaultWindowSize,
                           std::size_t points = kDefaultArcPoints);

EmotionalArc mean_center(EmotionalArc arc);

// Mean absolute difference between two equal-length arcs. This is the arc
// metric shared by clustering and the SOM.
double arc_distance(std::span<const double> a, std::span<const double> b);

// Arc table: header "book_id,t0,...", one row per arc, shortest round-trip
// decimals.
void write_arcs_csv(const std::filesystem::path& path, std::span<const EmotionalArc> arcs);
std::vector<EmotionalArc> read_arcs_csv(const std::filesystem::path& path, bool centered);

// Compact binary: "ARCM", u32 version (1), u64 rows, u64 cols, then rows*cols
// IEEE-754 doubles in row-major order. Every field little-endian.
void write_arcs_binary(const std::filesystem::path& path, const Eigen::MatrixXd& values);
Eigen::MatrixXd read_arcs_binary(const std::filesystem::path& path);

}  // namespace storyarcs
