#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "storyarcs/arcs.hpp"
#include "storyarcs/error.hpp"

namespace storyarcs {

class ClusteringError : public Error {
 public:
  using Error::Error;
};

struct DistanceMatrix {
  Eigen::MatrixXd values;
  std::vector<std::int64_t> book_ids;

  std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
};

// Pairwise arc_distance over equal-length arcs.
DistanceMatrix distance_matrix(std::span<const EmotionalArc> arcs);

// How input dissimilarities enter the Ward recurrence. `squared` runs the
// Lance-Williams update on D^2 and reports sqrt of the merged value as the
// height; `raw` runs it on D directly and reports the value as is.
enum class WardInput { squared, raw };

// Leaves are 0..N-1; the cluster formed by merge s gets id N + s, so the
// root is 2(N - 1).
struct Merge {
  std::size_t a = 0;  // smaller id
  std::size_t b = 0;
  double height = 0.0;
  std::size_t size = 0;
};

struct ClusterTree {
  std::size_t leaves = 0;
  std::vector<Merge> merges;
};

// Exhaustive Ward agglomeration. Among equal costs the pair with the smallest
// (lower id, higher id) wins, so the tree is a pure function of D.
ClusterTree ward_linkage(const DistanceMatrix& d, WardInput input = WardInput::squared);

// Partition left after undoing the last k - 1 merges. Labels 0..k-1 are
// ordered by cluster size (largest first), then by smallest member.
std::vector<std::size_t> cut(const ClusterTree& tree, std::size_t k);

struct Silhouette {
  std::vector<double> values;
  double mean = 0.0;
};

// s(i) = (b - a) / max(a, b). Members of singleton clusters, and points with
// a = b = 0, score 0.
Silhouette silhouette(std::span<const std::size_t> labels, const DistanceMatrix& d);

// Member with the smallest total distance to the rest of its cluster; the
// smallest row index wins ties. Returns a row index.
std::size_t central_book(std::span<const std::size_t> members, const DistanceMatrix& d);

// The top of a dendrogram: the `clusters` groups alive before the final
// `clusters - 1` merges, and those merges. Asking for more clusters than
// leaves gives one per leaf.
struct DendrogramTop {
  std::vector<std::size_t> node_ids;
  std::vector<std::vector<std::size_t>> members;  // rows, ascending
  std::vector<std::size_t> central_rows;
  std::vector<Merge> merges;
};

DendrogramTop dendrogram_top(const ClusterTree& tree, const DistanceMatrix& d, std::size_t clusters);

}  // namespace storyarcs
