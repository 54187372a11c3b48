#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ideafeed/corpus/records.hpp"
#include "ideafeed/error.hpp"
#include "ideafeed/explain/score_function.hpp"
#include "ideafeed/text/tokenizer.hpp"

namespace ideafeed::explain {

enum class EditKind { insertion, deletion };

constexpr std::string_view edit_kind_name(EditKind k) noexcept {
  return k == EditKind::insertion ? "insertion" : "deletion";
}

struct EditAttribution {
  EditKind kind = EditKind::insertion;
  std::string token;
  double raw_benefit = 0.0;  // before calibration
  double benefit = 0.0;      // calibrated; > 0 helped, < 0 hurt
  int iteration_from = 0;
  int iteration_to = 0;
};

struct ContrastResult {
  ScoreKind score_kind = ScoreKind::diversity;
  double score_from = 0.0;
  double score_to = 0.0;
  double delta = 0.0;  // score_to - score_from
  std::vector<EditAttribution> edits;

  bool no_edits() const noexcept { return edits.empty(); }
};

/// Min-max normalizes `raw` into [0, 1] (every value 0.5 when all are equal),
/// then shifts all values by one constant so they sum to `delta`.
inline std::vector<double> calibrate(std::span<const double> raw, double delta) {
  std::vector<double> out(raw.begin(), raw.end());
  if (out.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(out.begin(), out.end());
  const double lo = *lo_it, hi = *hi_it;
  double sum = 0.0;
  for (double& v : out) {
    v = hi > lo ? (v - lo) / (hi - lo) : 0.5;
    sum += v;
  }
  const double shift = (delta - sum) / static_cast<double>(out.size());
  for (double& v : out) v += shift;
  return out;
}

struct TokenEdit {
  EditKind kind;
  std::string token;
};

/// Multiset difference of content tokens, ignoring word order. Insertions
/// follow their order in `later`, deletions their order in `earlier`.
inline std::vector<TokenEdit> diff_content_tokens(const text::TokenList& earlier, const text::TokenList& later) {
  std::map<std::string, int> balance;  // later count - earlier count
  for (const auto& t : earlier.content_tokens()) --balance[t];
  for (const auto& t : later.content_tokens()) ++balance[t];

  std::vector<TokenEdit> edits;
  auto remaining = balance;
  for (const auto& t : later.content_tokens())
    if (remaining[t] > 0) {
      edits.push_back({EditKind::insertion, t});
      --remaining[t];
    }
  for (const auto& t : earlier.content_tokens())
    if (remaining[t] < 0) {
      edits.push_back({EditKind::deletion, t});
      ++remaining[t];
    }
  return edits;
}

/// Contrastive attribution between two versions of a message. Each edit is
/// scored against the later text: an insertion by removing one occurrence of
/// the word, a deletion by appending the word back. Benefits are then
/// calibrated so they sum to the total score change.
template <ScoreFunction F>
ContrastResult contrast_texts(std::string_view earlier, std::string_view later, const F& score_fn, ScoreKind kind,
                              int iteration_from = 1, int iteration_to = 2) {
  ContrastResult result;
  result.score_kind = kind;
  result.score_from = component(score_fn(earlier), kind);
  result.score_to = component(score_fn(later), kind);
  result.delta = result.score_to - result.score_from;

  const auto later_tokens = text::tokenize(later);
  const auto edits = diff_content_tokens(text::tokenize(earlier), later_tokens);
  if (edits.empty()) return result;

  std::vector<double> raw;
  raw.reserve(edits.size());
  for (const auto& edit : edits) {
    std::string probe;
    if (edit.kind == EditKind::insertion) {
      const auto spans = text::occurrences(later_tokens, edit.token);
      probe = text::replace_spans(later, {spans.back()});
    } else {
      probe = std::string(later) + " " + edit.token;
    }
    raw.push_back(result.score_to - component(score_fn(probe), kind));
  }

  const auto calibrated = calibrate(raw, result.delta);
  for (std::size_t i = 0; i < edits.size(); ++i)
    result.edits.push_back({edits[i].kind, edits[i].token, raw[i], calibrated[i], iteration_from, iteration_to});
  return result;
}

template <ScoreFunction F>
ContrastResult contrast(const corpus::IdeationRecord& earlier, const corpus::IdeationRecord& later, const F& score_fn,
                        ScoreKind kind) {
  if (!corpus::same_lineage(earlier, later))
    throw Error(Errc::lineage_mismatch, "records " + earlier.id + " and " + later.id + " are different ideations");
  if (earlier.iteration >= later.iteration)
    throw Error(Errc::lineage_mismatch, "earlier iteration must precede the later one");
  return contrast_texts(earlier.text, later.text, score_fn, kind, earlier.iteration, later.iteration);
}

}  // namespace ideafeed::explain
