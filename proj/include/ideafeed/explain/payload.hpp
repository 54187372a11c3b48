#pragma once

#include <nlohmann/json.hpp>

#include "ideafeed/condition.hpp"
#include "ideafeed/explain/attribution.hpp"
#include "ideafeed/explain/contrastive.hpp"
#include "ideafeed/explain/counterfactual.hpp"

namespace ideafeed::explain {

inline nlohmann::json scores_json(const ScorePair& s) {
  return {{"quality_pct", s.quality_pct}, {"diversity_pct", s.display_diversity_pct}};
}

/// One entry per highlighted word (first occurrence), strongest first.
inline nlohmann::json highlights_json(const AttributionSet& a) {
  auto out = nlohmann::json::array();
  for (const auto& token : a.highlighted) {
    const auto* e = a.find(token);
    if (!e || e->spans.empty()) continue;
    out.push_back({{"token", e->token},
                   {"span", {e->spans.front().begin, e->spans.front().end}},
                   {"sub_score", e->sub_score()}});
  }
  return out;
}

/// Full attribution table (CLI `explain`).
inline nlohmann::json attribution_json(const AttributionSet& a) {
  auto entries = nlohmann::json::array();
  for (const auto& e : a.entries) {
    auto spans = nlohmann::json::array();
    for (const auto& s : e.spans) spans.push_back({s.begin, s.end});
    entries.push_back({{"token", e.token},
                       {"spans", spans},
                       {"raw", e.raw},
                       {"change_priority", e.change_priority},
                       {"sub_score", e.sub_score()}});
  }
  return {{"score_kind", score_kind_name(a.score_kind)},
          {"base_score", a.base_score},
          {"entries", entries},
          {"highlighted", a.highlighted}};
}

inline nlohmann::json edits_json(const ContrastResult& c) {
  auto out = nlohmann::json::array();
  for (const auto& e : c.edits)
    out.push_back({{"kind", edit_kind_name(e.kind)}, {"token", e.token}, {"benefit", e.benefit}});
  return out;
}

inline nlohmann::json contrast_json(const ContrastResult& c) {
  nlohmann::json edits = nlohmann::json::array();
  for (const auto& e : c.edits)
    edits.push_back({{"kind", edit_kind_name(e.kind)},
                     {"token", e.token},
                     {"raw_benefit", e.raw_benefit},
                     {"benefit", e.benefit},
                     {"iteration_from", e.iteration_from},
                     {"iteration_to", e.iteration_to}});
  return {{"score_kind", score_kind_name(c.score_kind)},
          {"score_from", c.score_from},
          {"score_to", c.score_to},
          {"delta", c.delta},
          {"edits", edits}};
}

inline nlohmann::json suggestions_json(const SuggestionMap& m) {
  auto out = nlohmann::json::object();
  for (const auto& [token, list] : m) {
    auto items = nlohmann::json::array();
    for (const auto& s : list)
      items.push_back({{"term", s.replacement_term},
                       {"relation", s.relation},
                       {"dq", s.delta_quality_pct},
                       {"dd", s.delta_diversity_pct}});
    out[token] = items;
  }
  return out;
}

struct Explanations {
  ScoreKind score_kind = ScoreKind::diversity;
  ScorePair scores;
  std::optional<AttributionSet> attribution;
  std::optional<ContrastResult> contrast;
  std::optional<SuggestionMap> suggestions;
};

/// Explanation payload restricted to what the condition may show:
///   N    {}
///   S    {scores}
///   SA   {score_kind, scores, highlights}
///   SAX  SA + {edits}
///   SAC  SA + {suggestions}
///   SAXC SA + {edits, suggestions}
/// A permitted explanation that was not computed is emitted empty.
inline nlohmann::json make_payload(const Explanations& x, FeedbackFlags flags) {
  nlohmann::json p = nlohmann::json::object();
  if (flags.show_scores) p["scores"] = scores_json(x.scores);
  if (flags.show_attribution) {
    p["score_kind"] = score_kind_name(x.score_kind);
    p["highlights"] = x.attribution ? highlights_json(*x.attribution) : nlohmann::json::array();
  }
  if (flags.show_contrastive) p["edits"] = x.contrast ? edits_json(*x.contrast) : nlohmann::json::array();
  if (flags.show_counterfactual)
    p["suggestions"] = x.suggestions ? suggestions_json(*x.suggestions) : nlohmann::json::object();
  return p;
}

}  // namespace ideafeed::explain
