#include "storyarcs/som.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "storyarcs/random.hpp"

namespace storyarcs {
namespace {

double node_distance(const SomGrid& grid, std::size_t node, std::span<const double> arc) {
  const auto row = grid.nodes.row(static_cast<Eigen::Index>(node));
  double total = 0.0;
  for (std::size_t t = 0; t < arc.size(); ++t) total += std::abs(row(static_cast<Eigen::Index>(t)) - arc[t]);
  return total / static_cast<double>(arc.size());
}

}  // namespace

void SomConfig::validate() const {
  if (rows == 0 || cols == 0) throw SomError("SOM grid needs at least one node");
  if (!(alpha < 0)) throw SomError("neighborhood exponent must be negative");
  if (!(beta < 0)) throw SomError("learning exponent must be negative");
  if (!(init_amplitude >= 0)) throw SomError("initial amplitude must be nonnegative");
}

double SomGrid::grid_distance(std::size_t a, std::size_t b) const {
  const auto [ra, ca] = coords(a);
  const auto [rb, cb] = coords(b);
  const double dr = static_cast<double>(ra) - static_cast<double>(rb);
  const double dc = static_cast<double>(ca) - static_cast<double>(cb);
  return std::sqrt(dr * dr + dc * dc);
}

SomGrid init_grid(const SomConfig& config, std::size_t arc_length) {
  config.validate();
  SomGrid grid{config.rows, config.cols, Eigen::MatrixXd(static_cast<Eigen::Index>(config.node_count()),
                                                         static_cast<Eigen::Index>(arc_length))};
  Rng rng(config.seed);
  for (Eigen::Index k = 0; k < grid.nodes.rows(); ++k) {
    for (Eigen::Index t = 0; t < grid.nodes.cols(); ++t) {
      grid.nodes(k, t) = rng.uniform(-config.init_amplitude, config.init_amplitude);
    }
  }
  return grid;
}

double neighborhood_radius(const SomConfig& config, std::uint64_t step) {
  return std::sqrt(static_cast<double>(config.node_count())) *
         std::pow(static_cast<double>(step) + 1.0, config.alpha);
}

double learning_rate(const SomConfig& config, std::uint64_t step) {
  return std::pow(static_cast<double>(step) + 1.0, config.beta);
}

std::vector<std::size_t> neighborhood(const SomConfig& config, std::size_t winner, std::uint64_t step) {
  const SomGrid shape{config.rows, config.cols, {}};
  if (winner >= shape.node_count()) throw SomError("winner outside the grid");
  const double radius = neighborhood_radius(config, step);
  std::vector<std::size_t> nodes;
  for (std::size_t j = 0; j < shape.node_count(); ++j) {
    if (shape.grid_distance(winner, j) < radius) nodes.push_back(j);
  }
  return nodes;
}

std::size_t best_matching_node(const SomGrid& grid, std::span<const double> arc) {
  if (arc.size() != static_cast<std::size_t>(grid.nodes.cols())) throw SomError("arc length does not match SOM");
  std::size_t best = 0;
  double best_distance = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.node_count(); ++k) {
    const double dist = node_distance(grid, k, arc);
    if (dist < best_distance) {
      best_distance = dist;
      best = k;
    }
  }
  return best;
}

SomGrid train(SomGrid grid, std::span<const EmotionalArc> arcs, const SomConfig& config) {
  config.validate();
  if (arcs.empty()) throw SomError("cannot train a SOM on no arcs");
  if (grid.node_count() != config.node_count()) throw SomError("grid shape does not match config");
  const auto n = static_cast<std::size_t>(grid.nodes.cols());
  for (const auto& arc : arcs) {
    if (arc.values.size() != n) throw SomError("arc length does not match SOM");
  }

  const std::size_t nodes = grid.node_count();
  std::vector<double> grid_d(nodes * nodes);
  for (std::size_t a = 0; a < nodes; ++a) {
    for (std::size_t b = 0; b < nodes; ++b) grid_d[a * nodes + b] = grid.grid_distance(a, b);
  }

  Rng rng(derive_seed(config.seed, 0x736f6d));  // separate stream from init_grid
  std::vector<std::size_t> order(arcs.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();
  for (std::uint64_t step = 0; step < config.total_steps; ++step) {
    if (cursor == order.size()) {
      rng.shuffle(std::span<std::size_t>(order));
      cursor = 0;
    }
    const auto& x = arcs[order[cursor++]].values;
    const std::size_t winner = best_matching_node(grid, x);
    const double radius = neighborhood_radius(config, step);
    const double rate = learning_rate(config, step);
    const Eigen::Map<const Eigen::RowVectorXd> target(x.data(), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < nodes; ++j) {
      if (!(grid_d[winner * nodes + j] < radius)) continue;
      auto v = grid.nodes.row(static_cast<Eigen::Index>(j));
      v += rate * (target - v);
    }
  }
  return grid;
}

WinnerMap winners(const SomGrid& grid, std::span<const EmotionalArc> arcs) {
  WinnerMap map;
  map.nodes.resize(grid.node_count());
  map.arc_winner.reserve(arcs.size());
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    const std::size_t k = best_matching_node(grid, arcs[i].values);
    map.arc_winner.push_back(k);
    ++map.nodes[k].count;
    map.nodes[k].members.push_back(i);
  }
  return map;
}

Eigen::MatrixXd b_matrix(const SomGrid& grid) {
  Eigen::MatrixXd b(static_cast<Eigen::Index>(grid.rows), static_cast<Eigen::Index>(grid.cols));
  const auto arc_len = static_cast<std::size_t>(grid.nodes.cols());
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      const std::size_t k = r * grid.cols + c;
      const auto vk = grid.nodes.row(static_cast<Eigen::Index>(k));
      double total = 0.0;
      std::size_t count = 0;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const auto rr = static_cast<std::ptrdiff_t>(r) + dr;
          const auto cc = static_cast<std::ptrdiff_t>(c) + dc;
          if (rr < 0 || cc < 0 || rr >= static_cast<std::ptrdiff_t>(grid.rows) ||
              cc >= static_cast<std::ptrdiff_t>(grid.cols)) {
            continue;
          }
          const auto vj = grid.nodes.row(static_cast<Eigen::Index>(static_cast<std::size_t>(rr) * grid.cols +
                                                                   static_cast<std::size_t>(cc)));
          total += arc_len == 0 ? 0.0 : (vk - vj).cwiseAbs().sum() / static_cast<double>(arc_len);
          ++count;
        }
      }
      b(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = count ? total / static_cast<double>(count) : 0.0;
    }
  }
  return b;
}

}  // namespace storyarcs
