#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "ideafeed/error.hpp"

namespace ideafeed {

/// Feedback interface variants. Letters: S = scores, A = attribution,
/// X = contrastive attribution, C = counterfactual suggestions.
enum class Condition { N, S, SA, SAX, SAC, SAXC };

inline constexpr std::array kAllConditions = {Condition::N,   Condition::S,   Condition::SA,
                                              Condition::SAX, Condition::SAC, Condition::SAXC};

struct FeedbackFlags {
  bool show_scores = false;
  bool show_attribution = false;
  bool show_contrastive = false;
  bool show_counterfactual = false;

  friend constexpr bool operator==(const FeedbackFlags&, const FeedbackFlags&) = default;
};

constexpr FeedbackFlags flags_for(Condition c) noexcept {
  switch (c) {
    case Condition::N: return {false, false, false, false};
    case Condition::S: return {true, false, false, false};
    case Condition::SA: return {true, true, false, false};
    case Condition::SAX: return {true, true, true, false};
    case Condition::SAC: return {true, true, false, true};
    case Condition::SAXC: return {true, true, true, true};
  }
  return {};
}

constexpr std::string_view condition_name(Condition c) noexcept {
  switch (c) {
    case Condition::N: return "N";
    case Condition::S: return "S";
    case Condition::SA: return "SA";
    case Condition::SAX: return "SAX";
    case Condition::SAC: return "SAC";
    case Condition::SAXC: return "SAXC";
  }
  return "?";
}

constexpr std::optional<Condition> try_parse_condition(std::string_view name) noexcept {
  for (auto c : kAllConditions)
    if (condition_name(c) == name) return c;
  return std::nullopt;
}

inline Condition parse_condition(std::string_view name) {
  if (auto c = try_parse_condition(name)) return *c;
  throw Error(Errc::invalid_condition, "'" + std::string(name) + "' is not one of N, S, SA, SAX, SAC, SAXC");
}

// Explanations always imply scores; contrastive and counterfactual build on attribution.
static_assert([] {
  for (auto c : kAllConditions) {
    const auto f = flags_for(c);
    if ((f.show_attribution || f.show_contrastive || f.show_counterfactual) && !f.show_scores) return false;
    if ((f.show_contrastive || f.show_counterfactual) && !f.show_attribution) return false;
  }
  return true;
}());

}  // namespace ideafeed
