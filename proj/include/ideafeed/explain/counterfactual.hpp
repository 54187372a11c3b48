#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ideafeed/explain/attribution.hpp"
#include "ideafeed/explain/score_function.hpp"
#include "ideafeed/kg/knowledge_graph.hpp"
#include "ideafeed/text/embedding.hpp"
#include "ideafeed/text/lemmatizer.hpp"
#include "ideafeed/text/tokenizer.hpp"

namespace ideafeed::explain {

struct SuggestionConfig {
  /// Max mean angular distance from a candidate to the prior ideations.
  /// Unset: use the corpus default (75th percentile of prior pairwise distances).
  std::optional<double> corpus_radius;
  /// Max distance from a candidate to its nearest anchor term (radians).
  double anchor_radius = 1.2;
  /// Candidates must raise the explained score by more than this (percent points).
  double min_gain = 0.0;
  std::size_t top_k = 3;
  /// Source words with fewer related terms than this get no suggestions.
  std::size_t min_related = 10;
  std::vector<std::string> anchor_terms = {"exercise", "physical activity"};
  kg::RelationFilter relations;
};

struct Suggestion {
  std::string source_token;
  std::string replacement_term;
  std::string relation;
  double delta_quality_pct = 0.0;
  double delta_diversity_pct = 0.0;
  double gain = 0.0;  // change of the explained score
  double anchor_distance = 0.0;
  double corpus_distance = 0.0;

  double best_delta() const noexcept { return std::max(delta_quality_pct, delta_diversity_pct); }
};

using SuggestionMap = std::map<std::string, std::vector<Suggestion>>;

struct SuggestionContext {
  const kg::KnowledgeGraph& graph;
  const text::Embedder& embedder;
  std::span<const text::EmbeddingVector> prior;
  double default_corpus_radius;
};

/// Related terms for a source word: the lemma is looked up first, the surface
/// form only when the lemma is unknown to the graph.
inline std::vector<kg::RelatedTerm> related_terms_for(const kg::KnowledgeGraph& graph, std::string_view token,
                                                      const kg::RelationFilter& filter) {
  const auto lemma = text::lemmatize(token);
  auto related = graph.related_words(lemma, filter);
  if (related.empty() && lemma != token) related = graph.related_words(token, filter);
  return related;
}

inline double mean_distance(const text::EmbeddingVector& v, std::span<const text::EmbeddingVector> points) {
  if (points.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& p : points) sum += text::angular_distance(v, p);
  return sum / static_cast<double>(points.size());
}

inline double min_distance(const text::EmbeddingVector& v, std::span<const text::EmbeddingVector> points) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : points) best = std::min(best, text::angular_distance(v, p));
  return best;
}

/// Counterfactual word substitutions for every highlighted word. Each related
/// term is filtered for relevance (corpus and anchor distance), substituted
/// for all occurrences of the word, and kept if it raises the explained score
/// by more than min_gain with at least one positive projected delta.
template <ScoreFunction F>
SuggestionMap suggest(std::string_view message, const AttributionSet& attribution, const F& score_fn,
                      const SuggestionContext& ctx, const SuggestionConfig& cfg = {}) {
  const double corpus_radius = cfg.corpus_radius.value_or(ctx.default_corpus_radius);
  std::vector<text::EmbeddingVector> anchors;
  for (const auto& a : cfg.anchor_terms) anchors.push_back(ctx.embedder.embed(a));

  const auto tokens = text::tokenize(message);
  const ScorePair base = score_fn(message);
  SuggestionMap out;
  for (const auto& token : attribution.highlighted) {
    auto& list = out[token];
    const auto related = related_terms_for(ctx.graph, token, cfg.relations);
    if (related.size() < cfg.min_related) continue;
    const auto lemma = text::lemmatize(token);
    const auto spans = text::occurrences(tokens, token);

    for (const auto& candidate : related) {
      if (candidate.term == token || candidate.term == lemma) continue;
      const auto z = ctx.embedder.embed(candidate.term);
      const double corpus_distance = mean_distance(z, ctx.prior);
      if (corpus_distance > corpus_radius) continue;
      const double anchor_distance = anchors.empty() ? 0.0 : min_distance(z, anchors);
      if (anchor_distance > cfg.anchor_radius) continue;

      const ScorePair projected = score_fn(text::replace_spans(message, spans, candidate.term));
      Suggestion s{token,
                   candidate.term,
                   candidate.relation,
                   projected.quality_pct - base.quality_pct,
                   projected.diversity_pct - base.diversity_pct,
                   component(projected, attribution.score_kind) - component(base, attribution.score_kind),
                   anchor_distance,
                   corpus_distance};
      if (s.gain > cfg.min_gain && s.best_delta() > 0.0) list.push_back(std::move(s));
    }
    std::sort(list.begin(), list.end(), [](const Suggestion& a, const Suggestion& b) {
      return a.best_delta() != b.best_delta() ? a.best_delta() > b.best_delta()
                                              : a.replacement_term < b.replacement_term;
    });
    if (list.size() > cfg.top_k) list.resize(cfg.top_k);
  }
  return out;
}

}  // namespace ideafeed::explain
