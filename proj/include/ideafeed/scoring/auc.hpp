#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include "ideafeed/error.hpp"

namespace ideafeed::scoring {

/// Area under the ROC curve via the rank-sum (Mann-Whitney) statistic.
/// Tied scores receive their average rank, i.e. a tie counts as half a win.
inline double roc_auc(std::span<const double> scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) throw Error(Errc::invalid_argument, "scores/labels length mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }

  double positives = 0.0, rank_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!labels[i]) continue;
    positives += 1.0;
    rank_sum += rank[i];
  }
  const double negatives = static_cast<double>(n) - positives;
  if (positives == 0.0 || negatives == 0.0) throw Error(Errc::single_class, "AUC needs both classes");
  return (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

}  // namespace ideafeed::scoring
