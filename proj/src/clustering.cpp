#include "storyarcs/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace storyarcs {
namespace {

// Union-find over leaves that also tracks the tree node id of each root.
class LeafSets {
 public:
  explicit LeafSets(std::size_t n) : parent_(n), node_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
    std::iota(node_.begin(), node_.end(), 0);
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void join(std::size_t x, std::size_t y, std::size_t new_node) {
    const std::size_t rx = find(x);
    const std::size_t ry = find(y);
    parent_[ry] = rx;
    node_[rx] = new_node;
  }

  std::size_t node_of(std::size_t x) { return node_[find(x)]; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> node_;
};

// Leaf sets after the first `count` merges.
LeafSets replay(const ClusterTree& tree, std::size_t count) {
  const std::size_t n = tree.leaves;
  LeafSets sets(n);
  // Any leaf of a node serves as its handle.
  std::vector<std::size_t> handle(2 * n, 0);
  std::iota(handle.begin(), handle.begin() + static_cast<std::ptrdiff_t>(n), 0);
  for (std::size_t s = 0; s < count; ++s) {
    const Merge& m = tree.merges[s];
    sets.join(handle[m.a], handle[m.b], n + s);
    handle[n + s] = handle[m.a];
  }
  return sets;
}

}  // namespace

DistanceMatrix distance_matrix(std::span<const EmotionalArc> arcs) {
  const std::size_t n = arcs.size();
  DistanceMatrix d;
  d.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  d.book_ids.reserve(n);
  for (const auto& arc : arcs) d.book_ids.push_back(arc.book_id);
  for (const auto& arc : arcs) {
    if (arc.values.size() != arcs.front().values.size()) {
      throw ClusteringError("arc for book " + std::to_string(arc.book_id) + " has a different length");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = arc_distance(arcs[i].values, arcs[j].values);
      d.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      d.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  return d;
}

ClusterTree ward_linkage(const DistanceMatrix& d, WardInput input) {
  const std::size_t n = d.size();
  if (n < 2) throw ClusteringError("Ward linkage needs at least two items");

  // Working dissimilarities between live clusters, indexed by slot. A merge
  // of slots (p, q), p < q, stores the new cluster in p and retires q.
  std::vector<double> work(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = d(i, j);
      work[i * n + j] = input == WardInput::squared ? v * v : v;
    }
  }
  std::vector<std::size_t> node(n);
  std::iota(node.begin(), node.end(), 0);
  std::vector<std::size_t> size(n, 1);
  std::vector<std::size_t> live(n);
  std::iota(live.begin(), live.end(), 0);

  ClusterTree tree;
  tree.leaves = n;
  tree.merges.reserve(n - 1);
  for (std::size_t step = 0; step + 1 < n; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bp = 0, bq = 0;
    std::pair<std::size_t, std::size_t> best_ids{std::numeric_limits<std::size_t>::max(), 0};
    for (std::size_t x = 0; x < live.size(); ++x) {
      const std::size_t p = live[x];
      const double* row = &work[p * n];
      for (std::size_t y = x + 1; y < live.size(); ++y) {
        const std::size_t q = live[y];
        const double v = row[q];
        if (v > best) continue;
        const std::pair<std::size_t, std::size_t> ids(std::minmax(node[p], node[q]));
        if (v < best || ids < best_ids) {
          best = v;
          best_ids = ids;
          bp = p;
          bq = q;
        }
      }
    }

    const double sp = static_cast<double>(size[bp]);
    const double sq = static_cast<double>(size[bq]);
    for (const std::size_t k : live) {
      if (k == bp || k == bq) continue;
      const double sk = static_cast<double>(size[k]);
      double v = ((sp + sk) * work[bp * n + k] + (sq + sk) * work[bq * n + k] - sk * best) /
                 (sp + sq + sk);
      // Ward is monotone; this only absorbs rounding below the merged cost.
      v = std::max(v, best);
      work[bp * n + k] = v;
      work[k * n + bp] = v;
    }

    const double height = input == WardInput::squared ? std::sqrt(best) : best;
    tree.merges.push_back({best_ids.first, best_ids.second, height, size[bp] + size[bq]});
    node[bp] = n + step;
    size[bp] += size[bq];
    live.erase(std::find(live.begin(), live.end(), bq));
  }
  return tree;
}

std::vector<std::size_t> cut(const ClusterTree& tree, std::size_t k) {
  const std::size_t n = tree.leaves;
  if (k < 1 || k > n) {
    throw ClusteringError("cannot cut " + std::to_string(n) + " items into " + std::to_string(k) + " clusters");
  }
  LeafSets sets = replay(tree, n - k);

  std::map<std::size_t, std::vector<std::size_t>> groups;  // root -> leaves ascending
  for (std::size_t i = 0; i < n; ++i) groups[sets.find(i)].push_back(i);
  std::vector<const std::vector<std::size_t>*> ordered;
  for (const auto& [root, members] : groups) ordered.push_back(&members);
  std::sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
    if (a->size() != b->size()) return a->size() > b->size();
    return a->front() < b->front();
  });
  std::vector<std::size_t> labels(n);
  for (std::size_t label = 0; label < ordered.size(); ++label) {
    for (const std::size_t leaf : *ordered[label]) labels[leaf] = label;
  }
  return labels;
}

Silhouette silhouette(std::span<const std::size_t> labels, const DistanceMatrix& d) {
  const std::size_t n = labels.size();
  if (n != d.size()) throw ClusteringError("labels and distance matrix differ in size");
  if (n == 0) throw ClusteringError("silhouette of an empty set");
  const std::size_t k = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::size_t> cluster_size(k, 0);
  for (const std::size_t l : labels) ++cluster_size[l];
  const auto nonempty = std::count_if(cluster_size.begin(), cluster_size.end(),
                                      [](std::size_t s) { return s > 0; });
  if (nonempty < 2) throw ClusteringError("silhouette is undefined for a single cluster");

  Silhouette result;
  result.values.assign(n, 0.0);
  std::vector<double> sums(k);
  for (std::size_t i = 0; i < n; ++i) {
    if (cluster_size[labels[i]] == 1) continue;
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sums[labels[j]] += d(i, j);
    }
    const double a = sums[labels[i]] / static_cast<double>(cluster_size[labels[i]] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c == labels[i] || cluster_size[c] == 0) continue;
      b = std::min(b, sums[c] / static_cast<double>(cluster_size[c]));
    }
    const double scale = std::max(a, b);
    result.values[i] = scale > 0 ? (b - a) / scale : 0.0;
  }
  result.mean = std::accumulate(result.values.begin(), result.values.end(), 0.0) / static_cast<double>(n);
  return result;
}

std::size_t central_book(std::span<const std::size_t> members, const DistanceMatrix& d) {
  if (members.empty()) throw ClusteringError("central book of an empty cluster");
  std::size_t best = members.front();
  double best_total = std::numeric_limits<double>::infinity();
  for (const std::size_t i : members) {
    double total = 0.0;
    for (const std::size_t j : members) total += d(i, j);
    if (total < best_total || (total == best_total && i < best)) {
      best_total = total;
      best = i;
    }
  }
  return best;
}

DendrogramTop dendrogram_top(const ClusterTree& tree, const DistanceMatrix& d, std::size_t clusters) {
  const std::size_t n = tree.leaves;
  if (clusters == 0) throw ClusteringError("dendrogram needs at least one cluster");
  clusters = std::min(clusters, n);
  LeafSets sets = replay(tree, n - clusters);
  std::map<std::size_t, std::vector<std::size_t>> by_node;
  for (std::size_t i = 0; i < n; ++i) by_node[sets.node_of(i)].push_back(i);

  DendrogramTop top;
  for (auto& [node_id, members] : by_node) {
    top.node_ids.push_back(node_id);
    top.central_rows.push_back(central_book(members, d));
    top.members.push_back(std::move(members));
  }
  top.merges.assign(tree.merges.end() - static_cast<std::ptrdiff_t>(clusters - 1), tree.merges.end());
  return top;
}

}  // namespace storyarcs
