#pragma once

#include <concepts>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>

#include "ideafeed/error.hpp"
#include "ideafeed/scoring/scorer.hpp"

namespace ideafeed::explain {

using scoring::ScorePair;

/// Which score an explanation targets. Only one is explained at a time.
enum class ScoreKind { diversity, quality };

constexpr std::string_view score_kind_name(ScoreKind k) noexcept {
  return k == ScoreKind::quality ? "quality" : "diversity";
}

inline std::optional<ScoreKind> try_parse_score_kind(std::string_view s) noexcept {
  if (s == "diversity") return ScoreKind::diversity;
  if (s == "quality") return ScoreKind::quality;
  return std::nullopt;
}

inline ScoreKind parse_score_kind(std::string_view s) {
  if (auto k = try_parse_score_kind(s)) return *k;
  throw Error(Errc::invalid_argument, "score kind must be 'diversity' or 'quality', got '" + std::string(s) + "'");
}

/// Explained value of a score pair, in percent. Diversity uses the unclamped
/// percentage so negative increases still rank.
constexpr double component(const ScorePair& s, ScoreKind kind) noexcept {
  return kind == ScoreKind::quality ? s.quality_pct : s.diversity_pct;
}

/// Any callable mapping message text to a ScorePair: the full scorer, a
/// single-score adapter, or a synthetic test scorer. Explainers only ever call
/// it; they never look inside.
template <class F>
concept ScoreFunction = std::invocable<const F&, std::string_view> &&
                        std::convertible_to<std::invoke_result_t<const F&, std::string_view>, ScorePair>;

}  // namespace ideafeed::explain
