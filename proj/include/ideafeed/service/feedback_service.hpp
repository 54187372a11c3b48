#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ideafeed/condition.hpp"
#include "ideafeed/corpus/corpus_store.hpp"
#include "ideafeed/corpus/prompts.hpp"
#include "ideafeed/corpus/records.hpp"
#include "ideafeed/error.hpp"
#include "ideafeed/explain/attribution.hpp"
#include "ideafeed/explain/contrastive.hpp"
#include "ideafeed/explain/counterfactual.hpp"
#include "ideafeed/explain/payload.hpp"
#include "ideafeed/kg/knowledge_graph.hpp"
#include "ideafeed/scoring/scorer.hpp"
#include "ideafeed/service/config.hpp"

namespace ideafeed::service {

inline std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80 ? 1 : 0;
  return n;
}

enum class DefaultView { scores, attribution, contrastive };

constexpr std::string_view default_view_name(DefaultView v) noexcept {
  switch (v) {
    case DefaultView::scores: return "scores";
    case DefaultView::attribution: return "attribution";
    case DefaultView::contrastive: return "contrastive";
  }
  return "scores";
}

/// Contrastive view when it exists and there is something to compare;
/// otherwise attribution when shown; otherwise the score table.
constexpr DefaultView default_view_for(FeedbackFlags flags, int iteration) noexcept {
  if (flags.show_contrastive && iteration >= 2) return DefaultView::contrastive;
  if (flags.show_attribution) return DefaultView::attribution;
  return DefaultView::scores;
}

/// Record as returned to a client: score fields are dropped when the
/// condition hides scores. The stored record always keeps them.
inline nlohmann::json client_record_json(const corpus::IdeationRecord& r, FeedbackFlags flags) {
  auto j = corpus::to_json(r);
  if (!flags.show_scores)
    for (const char* k : {"quality_pct", "diversity_pct", "diversity_raw", "display_diversity_pct"}) j.erase(k);
  return j;
}

/// Computes whichever explanations `flags` allows for one message.
template <explain::ScoreFunction F>
explain::Explanations build_explanations(std::string_view text, const F& score_fn, explain::ScoreKind kind,
                                         FeedbackFlags flags, const explain::SuggestionContext* suggest_ctx,
                                         const explain::SuggestionConfig& suggest_cfg,
                                         const corpus::IdeationRecord* compare_from = nullptr,
                                         int iteration_to = 1) {
  explain::Explanations x;
  x.score_kind = kind;
  x.scores = score_fn(text);
  if (flags.show_attribution) {
    try {
      x.attribution = explain::attribute(text, score_fn, kind);
    } catch (const Error& e) {
      if (e.code() != Errc::no_content_tokens) throw;
    }
  }
  if (flags.show_contrastive && compare_from)
    x.contrast = explain::contrast_texts(compare_from->text, text, score_fn, kind, compare_from->iteration, iteration_to);
  if (flags.show_counterfactual && x.attribution && suggest_ctx)
    x.suggestions = explain::suggest(text, *x.attribution, score_fn, *suggest_ctx, suggest_cfg);
  return x;
}

/// The iterative prompt -> write -> score -> explain -> revise loop, independent
/// of transport. Sessions live in memory; the corpus store persists finals.
class FeedbackService {
 public:
  FeedbackService(ServiceConfig config, std::shared_ptr<const scoring::QualityModel> model,
                  std::shared_ptr<const kg::KnowledgeGraph> graph, std::shared_ptr<corpus::CorpusStore> store,
                  corpus::PromptSet prompts)
      : config_(std::move(config)), model_(std::move(model)), graph_(std::move(graph)), store_(std::move(store)),
        prompts_(std::move(prompts)), model_hash_(model_->hash()) {
    if (!graph_) throw Error(Errc::knowledge_graph_unavailable, "no knowledge graph loaded");
    if (prompts_.size() == 0) throw Error(Errc::invalid_argument, "prompt set is empty");
  }

  nlohmann::json create_session(std::string_view condition_name, std::optional<std::uint64_t> seed = std::nullopt) {
    const Condition condition = parse_condition(condition_name);
    store_->snapshot(condition);  // fails early when the corpus is missing
    const auto number = ++session_counter_;
    const std::string id = "s" + std::to_string(number);
    auto session = std::make_shared<Session>(id, condition, prompts_.size(),
                                             seed.value_or(config_.seed * 1000003ULL + number));
    const std::size_t first = session->sampler.next();
    {
      std::lock_guard lock(sessions_mutex_);
      sessions_[id] = session;
    }
    const auto f = flags_for(condition);
    return {{"session_id", id},
            {"condition", ideafeed::condition_name(condition)},
            {"flags",
             {{"show_scores", f.show_scores},
              {"show_attribution", f.show_attribution},
              {"show_contrastive", f.show_contrastive},
              {"show_counterfactual", f.show_counterfactual}}},
            {"first_prompt", prompt_json(first)}};
  }

  nlohmann::json next_prompt(const std::string& session_id) {
    auto session = find_session(session_id);
    std::lock_guard lock(session->mutex);
    return prompt_json(session->sampler.next());
  }

  nlohmann::json submit(const std::string& session_id, std::size_t prompt_id, const std::string& text, int iteration,
                        std::optional<explain::ScoreKind> score = std::nullopt) {
    auto session = find_session(session_id);
    std::lock_guard lock(session->mutex);

    if (utf8_length(text) > config_.max_text_chars)
      throw Error(Errc::text_too_long, "message exceeds " + std::to_string(config_.max_text_chars) + " characters");
    if (text.find_first_not_of(" \t\r\n") == std::string::npos)
      throw Error(Errc::invalid_argument, "message is blank");
    if (!session->sampler.was_drawn(prompt_id))
      throw Error(Errc::invalid_argument, "prompt " + std::to_string(prompt_id) + " was not drawn in this session");
    auto& lineage = session->lineages[prompt_id];
    const int expected = static_cast<int>(lineage.size()) + 1;
    if (iteration < 1 || iteration > corpus::kMaxIterations || iteration != expected)
      throw Error(Errc::iteration_out_of_order,
                  "got iteration " + std::to_string(iteration) + ", expected " +
                      (expected > corpus::kMaxIterations ? std::string("none (ideation finalized)")
                                                         : std::to_string(expected)));

    const auto snapshot = store_->snapshot(session->condition);
    const scoring::Scorer scorer(model_, embedder_ptr(), snapshot);
    const auto flags = flags_for(session->condition);
    const auto kind = score.value_or(config_.default_score);

    corpus::IdeationRecord record;
    record.id = session_id + "-p" + std::to_string(prompt_id) + "-i" + std::to_string(iteration);
    record.session_id = session_id;
    record.prompt_id = prompt_id;
    record.condition = session->condition;
    record.iteration = iteration;
    record.text = text;
    record.ts = corpus::now_iso8601();
    if (!lineage.empty()) record.parent = lineage.back().id;

    const auto ctx = suggestion_context(*snapshot);
    const auto x = build_explanations(text, scorer, kind, flags, &ctx, config_.suggestions,
                                      lineage.empty() ? nullptr : &lineage.back(), iteration);
    record.scores = x.scores;
    lineage.push_back(record);
    session->records[record.id] = record;

    nlohmann::json response{{"record", client_record_json(record, flags)},
                            {"payload", explain::make_payload(x, flags)},
                            {"default_view", default_view_name(default_view_for(flags, iteration))},
                            {"corpus_version", snapshot->version()},
                            {"finalized", false}};
    if (iteration == corpus::kMaxIterations) {
      const auto next = store_->append_ideation(session->condition, record);
      response["finalized"] = true;
      response["corpus_version"] = next->version();
      if (session->sampler.remaining() > 0) response["next_prompt"] = prompt_json(session->sampler.next());
    }
    return response;
  }

  nlohmann::json feedback(const std::string& session_id, const std::string& ideation_id, explain::ScoreKind kind,
                          std::optional<int> compare = std::nullopt) {
    auto session = find_session(session_id);
    std::lock_guard lock(session->mutex);
    auto it = session->records.find(ideation_id);
    if (it == session->records.end()) throw Error(Errc::not_found, "no ideation " + ideation_id);
    const auto& record = it->second;
    const auto flags = flags_for(session->condition);

    const corpus::IdeationRecord* earlier = nullptr;
    if (compare) {
      if (!flags.show_contrastive)
        throw Error(Errc::compare_unavailable,
                    "condition " + std::string(condition_name(session->condition)) + " has no contrastive view");
      if (*compare < 1 || *compare >= record.iteration)
        throw Error(Errc::compare_unavailable, "compare target must be an earlier iteration (1.." +
                                                   std::to_string(record.iteration - 1) + ")");
      earlier = &session->lineages[record.prompt_id][static_cast<std::size_t>(*compare - 1)];
    }

    const auto snapshot = store_->snapshot(session->condition);
    const scoring::Scorer scorer(model_, embedder_ptr(), snapshot);
    const auto ctx = suggestion_context(*snapshot);
    const auto x = build_explanations(record.text, scorer, kind, flags, &ctx, config_.suggestions, earlier,
                                      record.iteration);
    return {{"ideation_id", record.id},
            {"iteration", record.iteration},
            {"compare", compare ? nlohmann::json(*compare) : nlohmann::json(nullptr)},
            {"corpus_version", snapshot->version()},
            {"payload", explain::make_payload(x, flags)}};
  }

  nlohmann::json health() const {
    return {{"status", "ok"}, {"corpus_versions", store_->versions()}, {"model_hash", model_hash_}};
  }

  const ServiceConfig& config() const noexcept { return config_; }

 private:
  struct Session {
    Session(std::string id_, Condition c, std::size_t prompt_count, std::uint64_t seed)
        : id(std::move(id_)), condition(c), sampler(prompt_count, seed) {}
    std::string id;
    Condition condition;
    corpus::PromptSampler sampler;
    std::map<std::size_t, std::vector<corpus::IdeationRecord>> lineages;
    std::map<std::string, corpus::IdeationRecord> records;
    std::mutex mutex;
  };

  std::shared_ptr<Session> find_session(const std::string& id) const {
    std::lock_guard lock(sessions_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(Errc::not_found, "no session " + id);
    return it->second;
  }

  std::shared_ptr<const text::Embedder> embedder_ptr() const {
    return std::shared_ptr<const text::Embedder>(store_, &store_->embedder());
  }

  explain::SuggestionContext suggestion_context(const corpus::CorpusSnapshot& snapshot) const {
    return {*graph_, store_->embedder(), snapshot.points(), snapshot.corpus_radius()};
  }

  nlohmann::json prompt_json(std::size_t id) const { return {{"prompt_id", id}, {"text", prompts_.phrases.at(id)}}; }

  ServiceConfig config_;
  std::shared_ptr<const scoring::QualityModel> model_;
  std::shared_ptr<const kg::KnowledgeGraph> graph_;
  std::shared_ptr<corpus::CorpusStore> store_;
  corpus::PromptSet prompts_;
  std::string model_hash_;
  std::atomic<std::uint64_t> session_counter_{0};
  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace ideafeed::service
