#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ideafeed/error.hpp"
#include "ideafeed/metrics/spanning_tree.hpp"
#include "ideafeed/random.hpp"
#include "ideafeed/text/embedding.hpp"

namespace ideafeed::metrics {

using PointSet = std::span<const text::EmbeddingVector>;

enum class MetricKind { dispersion_sum, dispersion_mean, disparity, repeller_chamfer };

constexpr std::string_view metric_name(MetricKind m) noexcept {
  switch (m) {
    case MetricKind::dispersion_sum: return "dispersion_sum";
    case MetricKind::dispersion_mean: return "dispersion_mean";
    case MetricKind::disparity: return "disparity";
    case MetricKind::repeller_chamfer: return "repeller_chamfer";
  }
  return "unknown";
}

struct Dispersion {
  double sum = 0.0;   // MST sum of edge weights
  double mean = 0.0;  // sum / (n - 1)
};

inline Dispersion dispersion(PointSet points) {
  if (points.size() < 2) throw Error(Errc::too_few_points, "dispersion needs at least 2 points");
  const auto tree = minimum_spanning_tree(DistanceMatrix(points));
  return {tree.total, tree.total / static_cast<double>(points.size() - 1)};
}

/// Mean angular distance over all unordered pairs.
inline double disparity(PointSet points) {
  if (points.size() < 2) throw Error(Errc::too_few_points, "disparity needs at least 2 points");
  double sum = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) sum += text::angular_distance(points[i], points[j]);
  const double pairs = static_cast<double>(points.size() * (points.size() - 1) / 2);
  return sum / pairs;
}

/// Mean over new points of the distance to the nearest prior point.
inline double repeller_chamfer(PointSet new_points, PointSet prior_points) {
  if (new_points.empty() || prior_points.empty())
    throw Error(Errc::empty_set, "repeller chamfer needs non-empty new and prior sets");
  double sum = 0.0;
  for (const auto& p : new_points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : prior_points) best = std::min(best, text::angular_distance(p, q));
    sum += best;
  }
  return sum / static_cast<double>(new_points.size());
}

inline double evaluate(MetricKind metric, PointSet points, PointSet prior = {}) {
  switch (metric) {
    case MetricKind::dispersion_sum: return dispersion(points).sum;
    case MetricKind::dispersion_mean: return dispersion(points).mean;
    case MetricKind::disparity: return disparity(points);
    case MetricKind::repeller_chamfer: return repeller_chamfer(points, prior);
  }
  throw Error(Errc::invalid_argument, "unknown metric");
}

struct BootstrapSummary {
  std::size_t n_samples = 0;
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation of the bootstrap statistics
  std::uint64_t seed = 0;
};

struct MetricReport {
  MetricKind metric = MetricKind::dispersion_sum;
  double value = 0.0;
  std::size_t n_points = 0;
  std::optional<BootstrapSummary> bootstrap;
};

struct BootstrapOptions {
  std::size_t n_samples = 50;
  std::uint64_t seed = 0;
  /// Texts drawn per resample; 0 means the corpus size.
  std::size_t sample_size = 0;
};

/// Bootstrap a metric over a set of texts. Each resample draws texts with
/// replacement and embeds them; since embedding is a pure function of the
/// text, each distinct text is embedded once up front. For repeller_chamfer
/// only `texts` is resampled and `prior_texts` stays fixed.
inline MetricReport bootstrap(MetricKind metric, std::span<const std::string> texts,
                              std::span<const std::string> prior_texts, const text::Embedder& embedder,
                              const BootstrapOptions& opts = {}) {
  if (opts.n_samples == 0) throw Error(Errc::invalid_argument, "bootstrap needs n_samples >= 1");
  const auto points = embedder.embed_batch(texts);
  const auto prior = embedder.embed_batch(prior_texts);

  MetricReport report;
  report.metric = metric;
  report.n_points = points.size();
  report.value = evaluate(metric, points, prior);

  const std::size_t draw = opts.sample_size == 0 ? points.size() : opts.sample_size;
  Rng rng(opts.seed);
  std::vector<double> stats;
  stats.reserve(opts.n_samples);
  std::vector<text::EmbeddingVector> sample(draw);
  for (std::size_t s = 0; s < opts.n_samples; ++s) {
    for (auto& slot : sample) slot = points[static_cast<std::size_t>(rng.below(points.size()))];
    stats.push_back(evaluate(metric, sample, prior));
  }

  BootstrapSummary summary;
  summary.n_samples = stats.size();
  summary.seed = opts.seed;
  double sum = 0.0;
  for (double v : stats) sum += v;
  summary.mean = sum / static_cast<double>(stats.size());
  if (stats.size() > 1) {
    double sq = 0.0;
    for (double v : stats) sq += (v - summary.mean) * (v - summary.mean);
    summary.std_error = std::sqrt(sq / static_cast<double>(stats.size() - 1));
  }
  report.bootstrap = summary;
  return report;
}

}  // namespace ideafeed::metrics
