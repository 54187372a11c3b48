#pragma once

#include <algorithm>
#include <memory>
#include <numbers>
#include <string_view>

#include "ideafeed/corpus/snapshot.hpp"
#include "ideafeed/error.hpp"
#include "ideafeed/metrics/spanning_tree.hpp"
#include "ideafeed/scoring/quality_model.hpp"
#include "ideafeed/text/embedding.hpp"

namespace ideafeed::scoring {

/// Quality and diversity scores of one message, both as percentages.
struct ScorePair {
  double quality_pct = 0.0;
  double diversity_pct = 0.0;          // 100 * diversity_raw / pi; may be negative
  double diversity_raw = 0.0;          // MST-sum increase, radians
  double display_diversity_pct = 0.0;  // diversity_pct clamped to [0, 100]
  bool degenerate = false;             // embedding fell back to e_1
};

constexpr double diversity_pct_from_raw(double raw) noexcept { return 100.0 * raw / std::numbers::pi; }

struct DiversityScore {
  double raw = 0.0;
  double pct = 0.0;
  double display_pct = 0.0;
};

/// Increase of the MST edge-weight sum when `point` joins the prior corpus.
inline DiversityScore diversity_score(const text::EmbeddingVector& point, const corpus::CorpusSnapshot& prior) {
  if (prior.size() < 2)
    throw Error(Errc::empty_corpus, "diversity needs at least 2 prior ideations, snapshot has " +
                                        std::to_string(prior.size()));
  const auto grown = prior.distances().extended(prior.points(), point);
  DiversityScore s;
  s.raw = metrics::minimum_spanning_tree(grown).total - prior.mst_sum();
  s.pct = diversity_pct_from_raw(s.raw);
  s.display_pct = std::clamp(s.pct, 0.0, 100.0);
  return s;
}

inline DiversityScore diversity_score(std::string_view message, const corpus::CorpusSnapshot& prior,
                                      const text::Embedder& embedder) {
  return diversity_score(embedder.embed(message), prior);
}

/// The score function s(x) handed to every explainer: one embedding, both
/// scores. Holds shared immutable state, so copies are cheap and can be used
/// from several threads.
class Scorer {
 public:
  Scorer(std::shared_ptr<const QualityModel> model, std::shared_ptr<const text::Embedder> embedder,
         std::shared_ptr<const corpus::CorpusSnapshot> corpus)
      : model_(std::move(model)), embedder_(std::move(embedder)), corpus_(std::move(corpus)) {
    if (!model_ || !embedder_ || !corpus_) throw Error(Errc::invalid_argument, "scorer needs model, embedder, corpus");
    if (model_->dim != embedder_->dimension())
      throw Error(Errc::dimension_mismatch, "model dim " + std::to_string(model_->dim) + " != embedder dim " +
                                                std::to_string(embedder_->dimension()));
  }

  ScorePair operator()(std::string_view message) const {
    const auto embedding = embedder_->embed(message);
    const auto quality = predict_quality(*model_, embedding, message_length(message));
    const auto diversity = diversity_score(embedding, *corpus_);
    return {quality.quality_pct, diversity.pct, diversity.raw, diversity.display_pct, quality.degenerate};
  }

  const QualityModel& model() const noexcept { return *model_; }
  const text::Embedder& embedder() const noexcept { return *embedder_; }
  const corpus::CorpusSnapshot& corpus() const noexcept { return *corpus_; }
  std::shared_ptr<const corpus::CorpusSnapshot> corpus_ptr() const noexcept { return corpus_; }

 private:
  std::shared_ptr<const QualityModel> model_;
  std::shared_ptr<const text::Embedder> embedder_;
  std::shared_ptr<const corpus::CorpusSnapshot> corpus_;
};

}  // namespace ideafeed::scoring
