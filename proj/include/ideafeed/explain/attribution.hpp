#pragma once

#include <algorithm>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "ideafeed/error.hpp"
#include "ideafeed/explain/score_function.hpp"
#include "ideafeed/text/tokenizer.hpp"

namespace ideafeed::explain {

inline constexpr std::size_t kMaxHighlights = 3;

struct AttributionEntry {
  std::string token;
  std::vector<text::TextSpan> spans;  // every occurrence in the message
  double raw = 0.0;                   // s(x \ token) - s(x)
  double change_priority = 0.0;       // raw - min raw; >= 0

  /// Value shown to the user: non-positive, most negative = change first.
  double sub_score() const noexcept { return -change_priority; }
};

struct AttributionSet {
  ScoreKind score_kind = ScoreKind::diversity;
  double base_score = 0.0;  // component(s(x), score_kind)
  std::vector<AttributionEntry> entries;  // distinct content tokens, first-appearance order
  std::vector<std::string> highlighted;   // by descending change_priority

  const AttributionEntry* find(std::string_view token) const {
    for (const auto& e : entries)
      if (e.token == token) return &e;
    return nullptr;
  }
};

/// Top-k tokens by change priority; equal priorities fall back to
/// lexicographic token order. Depends only on the ordering of the values, so
/// adding a constant to every entry leaves the result unchanged.
inline std::vector<std::string> top_highlights(std::vector<AttributionEntry> entries, std::size_t k = kMaxHighlights) {
  std::sort(entries.begin(), entries.end(), [](const AttributionEntry& a, const AttributionEntry& b) {
    return a.change_priority != b.change_priority ? a.change_priority > b.change_priority : a.token < b.token;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < entries.size() && i < k; ++i) out.push_back(entries[i].token);
  return out;
}

/// Word attributions by ablation: each distinct content token is removed (all
/// occurrences at once) and the message rescored. The token whose removal
/// raises the score the most gets the highest change priority.
template <ScoreFunction F>
AttributionSet attribute(std::string_view message, const F& score_fn, ScoreKind kind,
                         std::size_t max_highlights = kMaxHighlights) {
  const auto tokens = text::tokenize(message);
  AttributionSet set;
  set.score_kind = kind;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!tokens.content_mask[i] || set.find(tokens.tokens[i])) continue;
    set.entries.push_back({tokens.tokens[i], text::occurrences(tokens, tokens.tokens[i]), 0.0, 0.0});
  }
  if (set.entries.empty()) throw Error(Errc::no_content_tokens, "message has no content words to attribute");

  set.base_score = component(score_fn(message), kind);
  double lowest = std::numeric_limits<double>::infinity();
  for (auto& e : set.entries) {
    const double ablated = component(score_fn(text::replace_spans(message, e.spans)), kind);
    e.raw = -(set.base_score - ablated);
    lowest = std::min(lowest, e.raw);
  }
  for (auto& e : set.entries) e.change_priority = e.raw - lowest;
  set.highlighted = top_highlights(set.entries, max_highlights);
  return set;
}

}  // namespace ideafeed::explain
