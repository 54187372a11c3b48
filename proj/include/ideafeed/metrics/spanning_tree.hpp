#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <numeric>
#include <span>
#include <tuple>
#include <vector>

#include "ideafeed/text/embedding.hpp"

namespace ideafeed::metrics {

struct WeightedEdge {
  double weight = 0.0;
  std::size_t lo = 0;  // lo < hi
  std::size_t hi = 0;

  friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

/// Strict total order used by Kruskal: (weight, lower id, higher id).
inline bool edge_before(const WeightedEdge& a, const WeightedEdge& b) noexcept {
  return std::tie(a.weight, a.lo, a.hi) < std::tie(b.weight, b.lo, b.hi);
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<unsigned char> rank_;
};

struct SpanningTree {
  std::vector<WeightedEdge> edges;  // in acceptance order (non-decreasing weight)
  double total = 0.0;               // summed in acceptance order
};

/// Kruskal over the complete graph on n nodes. `weight(i, j)` is queried once
/// per unordered pair with i < j. Ties resolve by node ids, so the tree and the
/// summation order are fully determined by the weights.
template <class WeightFn>
  requires std::regular_invocable<WeightFn&, std::size_t, std::size_t>
SpanningTree minimum_spanning_tree(std::size_t n, WeightFn&& weight) {
  SpanningTree tree;
  if (n < 2) return tree;
  std::vector<WeightedEdge> edges;
  edges.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.push_back({static_cast<double>(weight(i, j)), i, j});
  std::sort(edges.begin(), edges.end(), edge_before);

  DisjointSets sets(n);
  tree.edges.reserve(n - 1);
  for (const auto& e : edges) {
    if (!sets.unite(e.lo, e.hi)) continue;
    tree.edges.push_back(e);
    tree.total += e.weight;
    if (tree.edges.size() == n - 1) break;
  }
  return tree;
}

/// Symmetric matrix of pairwise angular distances with zero diagonal.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;

  explicit DistanceMatrix(std::span<const text::EmbeddingVector> points)
      : n_(points.size()), d_(n_ * n_, 0.0) {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j) set(i, j, text::angular_distance(points[i], points[j]));
  }

  /// Copy of this matrix with one more point appended as the last row/column.
  DistanceMatrix extended(std::span<const text::EmbeddingVector> points, const text::EmbeddingVector& extra) const {
    DistanceMatrix out;
    out.n_ = n_ + 1;
    out.d_.assign(out.n_ * out.n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j) out.set(i, j, (*this)(i, j));
    for (std::size_t i = 0; i < n_; ++i) out.set(i, n_, text::angular_distance(points[i], extra));
    return out;
  }

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return d_[i * n_ + j]; }

 private:
  void set(std::size_t i, std::size_t j, double v) {
    d_[i * n_ + j] = v;
    d_[j * n_ + i] = v;
  }

  std::size_t n_ = 0;
  std::vector<double> d_;
};

inline SpanningTree minimum_spanning_tree(const DistanceMatrix& m) {
  return minimum_spanning_tree(m.size(), [&](std::size_t i, std::size_t j) { return m(i, j); });
}

}  // namespace ideafeed::metrics
