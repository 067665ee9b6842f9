#pragma once

// Synthetic fixtures shared by the unit and acceptance suites: planted arc
// corpora, a toy lexicon, and Gutenberg-style raw texts.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "storyarcs/arcs.hpp"
#include "storyarcs/lexicon.hpp"
#include "storyarcs/random.hpp"

namespace storyarcs::testing {

enum class Shape { rise, fall, fall_rise, rise_fall };
inline constexpr Shape kShapes[] = {Shape::rise, Shape::fall, Shape::fall_rise, Shape::rise_fall};

inline double shape_at(Shape s, double t) {
  switch (s) {
    case Shape::rise: return t - 0.5;
    case Shape::fall: return 0.5 - t;
    case Shape::fall_rise: return std::cos(2 * std::numbers::pi * t);
    case Shape::rise_fall: return -std::cos(2 * std::numbers::pi * t);
  }
  return 0.0;
}

// Template sampled at n points, centered and scaled to unit standard deviation.
inline std::vector<double> template_arc(Shape s, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = shape_at(s, n == 1 ? 0.0 : double(i) / double(n - 1));
  double mean = 0;
  for (double x : v) mean += x;
  mean /= double(n);
  double var = 0;
  for (double& x : v) {
    x -= mean;
    var += x * x;
  }
  const double sd = std::sqrt(var / double(n));
  for (double& x : v) x /= sd;
  return v;
}

inline double gaussian(Rng& rng) {
  // Box-Muller; u1 in (0, 1].
  const double u1 = 1.0 - rng.uniform01();
  const double u2 = rng.uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2 * std::numbers::pi * u2);
}

struct PlantedCorpus {
  std::vector<EmotionalArc> arcs;  // mean-centered
  std::vector<std::size_t> labels;
};

// `per_shape` arcs of each of the four shapes, unit-sd signal plus Gaussian
// noise of sd 1/snr. Arcs are interleaved by shape.
inline PlantedCorpus planted_corpus(std::size_t per_shape, std::size_t n, double snr, std::uint64_t seed) {
  Rng rng(seed);
  PlantedCorpus c;
  for (std::size_t i = 0; i < per_shape; ++i) {
    for (std::size_t s = 0; s < 4; ++s) {
      auto values = template_arc(kShapes[s], n);
      for (double& v : values) v += gaussian(rng) / snr;
      c.arcs.push_back(mean_center(EmotionalArc{std::int64_t(c.arcs.size()), values, false}));
      c.labels.push_back(s);
    }
  }
  return c;
}

inline double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::map<std::pair<std::size_t, std::size_t>, double> joint;
  std::map<std::size_t, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1;
    ra[a[i]] += 1;
    rb[b[i]] += 1;
  }
  const auto c2 = [](double x) { return x * (x - 1) / 2; };
  double sum_joint = 0, sum_a = 0, sum_b = 0;
  for (const auto& [k, v] : joint) sum_joint += c2(v);
  for (const auto& [k, v] : ra) sum_a += c2(v);
  for (const auto& [k, v] : rb) sum_b += c2(v);
  const double expected = sum_a * sum_b / c2(double(a.size()));
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (sum_joint - expected) / (max_index - expected);
}

// 20 positive words (7.0..8.9), 20 negative words (1.2..3.1); filler words
// "fillerNN" are not in the lexicon.
inline std::vector<std::pair<std::string, double>> toy_lexicon_entries() {
  std::vector<std::pair<std::string, double>> entries;
  for (int i = 0; i < 20; ++i) {
    entries.emplace_back("joy" + std::to_string(i), 7.0 + 0.1 * i);
    entries.emplace_back("gloom" + std::to_string(i), 1.2 + 0.1 * i);
  }
  return entries;
}

inline void write_lexicon_file(const std::filesystem::path& path) {
  std::ofstream out(path);
  out << "word\thappiness_average\n";
  for (const auto& [w, s] : toy_lexicon_entries()) out << w << '\t' << s << '\n';
}

// Book of `length` words whose happy-word probability follows `shape`
// (amplitude `amp` around 0.5); half the tokens are filler.
inline std::vector<std::string> shaped_book(Shape shape, std::size_t length, double amp, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> words;
  words.reserve(length);
  for (std::size_t i = 0; i < length; ++i) {
    if (rng.uniform01() < 0.5) {
      words.push_back("filler" + std::to_string(rng.index(30)));
      continue;
    }
    const double t = double(i) / double(length);
    const double p_happy = 0.5 + amp * shape_at(shape, t) / (shape == Shape::rise || shape == Shape::fall ? 0.5 : 1.0);
    const std::string stem = rng.uniform01() < p_happy ? "joy" : "gloom";
    words.push_back(stem + std::to_string(rng.index(20)));
  }
  return words;
}

// Raw Gutenberg-style text: license header, START marker, body with
// sentence punctuation, END marker, license footer.
inline std::string gutenberg_text(const std::string& title, const std::vector<std::string>& words) {
  std::string text = "The Project Gutenberg EBook of " + title + "\n\nThis eBook is for the use of anyone.\n\n";
  text += "*** START OF THIS PROJECT GUTENBERG EBOOK " + title + " ***\n\n";
  for (std::size_t i = 0; i < words.size(); ++i) {
    std::string w = words[i];
    if (i % 12 == 0) w[0] = char(std::toupper(static_cast<unsigned char>(w[0])));
    text += w;
    if (i % 12 == 11) {
      text += ".\n";
    } else if (i % 7 == 3) {
      text += ", ";
    } else {
      text += ' ';
    }
  }
  text += "\n\n*** END OF THIS PROJECT GUTENBERG EBOOK " + title + " ***\n\nLicense text follows.\n";
  return text;
}

}  // namespace storyarcs::testing
