#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ideafeed/condition.hpp"
#include "ideafeed/metrics/spanning_tree.hpp"
#include "ideafeed/text/embedding.hpp"

namespace ideafeed::corpus {

/// One stored prior ideation. Seed messages carry iteration 0 and no scores.
struct CorpusEntry {
  std::string id;
  std::string text;
  Condition condition = Condition::N;
  int iteration = 0;
  std::optional<std::string> parent;
  std::optional<double> quality_pct;
  std::optional<double> diversity_pct;
  std::string ts;
  std::uint64_t version = 1;  // snapshot version that introduced this entry

  friend bool operator==(const CorpusEntry&, const CorpusEntry&) = default;
};

/// Linear-interpolated percentile (q in [0, 1]) of a non-empty sample.
inline double percentile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

/// Immutable view of one condition's prior ideations with their embeddings
/// and the cached geometry every diversity computation needs.
class CorpusSnapshot {
 public:
  CorpusSnapshot(Condition condition, std::uint64_t version, std::vector<CorpusEntry> entries,
                 std::vector<text::EmbeddingVector> points)
      : condition_(condition), version_(version), entries_(std::move(entries)), points_(std::move(points)),
        distances_(points_) {
    finish();
  }

  /// Snapshot at version + 1 with one more entry.
  CorpusSnapshot with_appended(CorpusEntry entry, text::EmbeddingVector point) const {
    CorpusSnapshot next(*this);
    next.version_ = version_ + 1;
    entry.version = next.version_;
    next.distances_ = distances_.extended(points_, point);
    next.entries_.push_back(std::move(entry));
    next.points_.push_back(std::move(point));
    next.finish();
    return next;
  }

  Condition condition() const noexcept { return condition_; }
  std::uint64_t version() const noexcept { return version_; }
  const std::vector<CorpusEntry>& entries() const noexcept { return entries_; }
  const std::vector<text::EmbeddingVector>& points() const noexcept { return points_; }
  const metrics::DistanceMatrix& distances() const noexcept { return distances_; }
  std::size_t size() const noexcept { return entries_.size(); }

  /// MST sum of edge weights over the prior points (radians).
  double mst_sum() const noexcept { return mst_sum_; }

  /// 75th percentile of prior pairwise distances; pi when there are no pairs.
  double corpus_radius() const noexcept { return corpus_radius_; }

 private:
  void finish() {
    mst_sum_ = metrics::minimum_spanning_tree(distances_).total;
    std::vector<double> pairs;
    for (std::size_t i = 0; i < distances_.size(); ++i)
      for (std::size_t j = i + 1; j < distances_.size(); ++j) pairs.push_back(distances_(i, j));
    corpus_radius_ = pairs.empty() ? std::numbers::pi : percentile(std::move(pairs), 0.75);
  }

  Condition condition_;
  std::uint64_t version_;
  std::vector<CorpusEntry> entries_;
  std::vector<text::EmbeddingVector> points_;
  metrics::DistanceMatrix distances_;
  double mst_sum_ = 0.0;
  double corpus_radius_ = std::numbers::pi;
};

}  // namespace ideafeed::corpus
