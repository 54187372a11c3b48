#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "ideafeed/condition.hpp"
#include "ideafeed/scoring/scorer.hpp"

namespace ideafeed::corpus {

inline constexpr int kMaxIterations = 3;

/// One iteration of one ideation. Iterations of the same ideation share
/// (session_id, prompt_id) and chain through `parent`.
struct IdeationRecord {
  std::string id;
  std::string session_id;
  std::size_t prompt_id = 0;
  Condition condition = Condition::N;
  int iteration = 1;  // 1 .. kMaxIterations
  std::string text;
  scoring::ScorePair scores;
  std::optional<std::string> parent;
  std::string ts;
};

inline bool same_lineage(const IdeationRecord& a, const IdeationRecord& b) {
  return a.session_id == b.session_id && a.prompt_id == b.prompt_id;
}

inline nlohmann::json to_json(const IdeationRecord& r) {
  return {{"id", r.id},
          {"session_id", r.session_id},
          {"prompt_id", r.prompt_id},
          {"condition", condition_name(r.condition)},
          {"iteration", r.iteration},
          {"text", r.text},
          {"parent", r.parent ? nlohmann::json(*r.parent) : nlohmann::json(nullptr)},
          {"quality_pct", r.scores.quality_pct},
          {"diversity_pct", r.scores.diversity_pct},
          {"diversity_raw", r.scores.diversity_raw},
          {"display_diversity_pct", r.scores.display_diversity_pct},
          {"ts", r.ts}};
}

}  // namespace ideafeed::corpus
