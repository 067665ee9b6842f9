#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "storyarcs/arcs.hpp"
#include "storyarcs/error.hpp"

namespace storyarcs {

class SomError : public Error {
 public:
  using Error::Error;
};

struct SomConfig {
  std::size_t rows = 8;
  std::size_t cols = 8;
  double alpha = -0.15;  // neighborhood radius exponent
  double beta = -0.15;   // learning rate exponent
  std::uint64_t total_steps = 1'000'000;  // single-arc presentations
  std::uint64_t seed = 1;
  double init_amplitude = 0.05;

  std::size_t node_count() const { return rows * cols; }
  void validate() const;
};

struct SomGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Eigen::MatrixXd nodes;  // node_count x arc length, node k at (k / cols, k % cols)

  std::size_t node_count() const { return rows * cols; }
  std::pair<std::size_t, std::size_t> coords(std::size_t node) const { return {node / cols, node % cols}; }
  double grid_distance(std::size_t a, std::size_t b) const;
};

SomGrid init_grid(const SomConfig& config, std::size_t arc_length);

// sqrt(node count) * (step + 1)^alpha.
double neighborhood_radius(const SomConfig& config, std::uint64_t step);
// (step + 1)^beta.
double learning_rate(const SomConfig& config, std::uint64_t step);

// Nodes whose grid distance to `winner` is strictly below the radius at
// `step`, ascending. Always contains the winner.
std::vector<std::size_t> neighborhood(const SomConfig& config, std::size_t winner, std::uint64_t step);

// Node nearest to `arc` under arc_distance; lowest index on ties.
std::size_t best_matching_node(const SomGrid& grid, std::span<const double> arc);

// Presents one arc per step, in a seeded order reshuffled every pass over
// the corpus, and pulls the winner's neighborhood toward it by the learning
// rate. Bit-identical for identical (grid, arcs, config).
SomGrid train(SomGrid grid, std::span<const EmotionalArc> arcs, const SomConfig& config);

struct NodeWinners {
  std::size_t count = 0;
  std::vector<std::size_t> members;  // arc rows
};

struct WinnerMap {
  std::vector<NodeWinners> nodes;        // per node
  std::vector<std::size_t> arc_winner;   // per arc
};

WinnerMap winners(const SomGrid& grid, std::span<const EmotionalArc> arcs);

// Per node, the mean arc_distance to its (up to 8) adjacent grid nodes.
// Returned as rows x cols.
Eigen::MatrixXd b_matrix(const SomGrid& grid);

}  // namespace storyarcs
