#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ideafeed {

enum class Errc {
  invalid_argument,
  embedding_unavailable,
  dimension_mismatch,
  insufficient_data,
  single_class,
  empty_corpus,
  no_content_tokens,
  knowledge_graph_unavailable,
  io_failure,
  all_lines_malformed,
  network_failure,
  too_few_points,
  empty_set,
  too_few_seeds,
  condition_mismatch,
  lineage_mismatch,
  prompts_exhausted,
  invalid_condition,
  iteration_out_of_order,
  text_too_long,
  not_found,
  compare_unavailable,
};

constexpr std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::embedding_unavailable: return "EmbeddingUnavailable";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::insufficient_data: return "InsufficientData";
    case Errc::single_class: return "SingleClass";
    case Errc::empty_corpus: return "EmptyCorpus";
    case Errc::no_content_tokens: return "NoContentTokens";
    case Errc::knowledge_graph_unavailable: return "KnowledgeGraphUnavailable";
    case Errc::io_failure: return "IoFailure";
    case Errc::all_lines_malformed: return "AllLinesMalformed";
    case Errc::network_failure: return "NetworkFailure";
    case Errc::too_few_points: return "TooFewPoints";
    case Errc::empty_set: return "EmptySet";
    case Errc::too_few_seeds: return "TooFewSeeds";
    case Errc::condition_mismatch: return "ConditionMismatch";
    case Errc::lineage_mismatch: return "LineageMismatch";
    case Errc::prompts_exhausted: return "PromptsExhausted";
    case Errc::invalid_condition: return "InvalidCondition";
    case Errc::iteration_out_of_order: return "IterationOutOfOrder";
    case Errc::text_too_long: return "TextTooLong";
    case Errc::not_found: return "NotFound";
    case Errc::compare_unavailable: return "CompareUnavailable";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so the
/// CLI and HTTP layers can map it to an exit code or status without parsing
/// message text.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ideafeed
