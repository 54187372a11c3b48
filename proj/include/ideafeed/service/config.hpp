#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "ideafeed/error.hpp"
#include "ideafeed/explain/counterfactual.hpp"
#include "ideafeed/explain/score_function.hpp"
#include "ideafeed/scoring/quality_model.hpp"
#include "ideafeed/text/embedding.hpp"

namespace ideafeed::service {

/// Every tunable threshold in one place; mirrors data/config.json.
struct ServiceConfig {
  text::EmbedderConfig embedder;
  scoring::TrainOptions training;
  explain::SuggestionConfig suggestions;
  std::size_t corpus_size = 50;
  std::size_t max_text_chars = 2000;
  explain::ScoreKind default_score = explain::ScoreKind::diversity;
  std::uint64_t seed = 7;

  nlohmann::json to_json() const {
    auto opt = [](const auto& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    return {
        {"embedder",
         {{"backend", embedder.backend == text::EmbedderBackend::external_service ? "external-service" : "reference-hash"},
          {"dimension", embedder.dimension},
          {"hash_probes", embedder.hash_probes},
          {"service_endpoint", opt(embedder.service_endpoint)},
          {"cache_path", opt(embedder.cache_path)}}},
        {"quality",
         {{"hidden", training.hidden},
          {"folds", training.folds},
          {"epochs", training.epochs},
          {"learning_rate", training.learning_rate},
          {"l2", training.l2},
          {"threshold", training.threshold}}},
        {"suggestions",
         {{"corpus_radius", opt(suggestions.corpus_radius)},
          {"anchor_radius", suggestions.anchor_radius},
          {"min_gain", suggestions.min_gain},
          {"top_k", suggestions.top_k},
          {"min_related", suggestions.min_related},
          {"anchor_terms", suggestions.anchor_terms},
          {"excluded_relations", suggestions.relations.excluded}}},
        {"corpus", {{"initial_size", corpus_size}}},
        {"service", {{"max_text_chars", max_text_chars}, {"default_score", explain::score_kind_name(default_score)}}},
        {"seed", seed}};
  }

  static ServiceConfig from_json(const nlohmann::json& j) {
    ServiceConfig c;
    try {
      if (auto e = j.find("embedder"); e != j.end()) {
        const auto backend = e->value("backend", "reference-hash");
        if (backend == "external-service")
          c.embedder.backend = text::EmbedderBackend::external_service;
        else if (backend != "reference-hash")
          throw Error(Errc::invalid_argument, "unknown embedder backend " + backend);
        c.embedder.dimension = e->value("dimension", c.embedder.dimension);
        c.embedder.hash_probes = e->value("hash_probes", c.embedder.hash_probes);
        if (e->contains("service_endpoint") && (*e)["service_endpoint"].is_string())
          c.embedder.service_endpoint = (*e)["service_endpoint"].get<std::string>();
        if (e->contains("cache_path") && (*e)["cache_path"].is_string())
          c.embedder.cache_path = (*e)["cache_path"].get<std::string>();
      }
      if (auto q = j.find("quality"); q != j.end()) {
        c.training.hidden = q->value("hidden", c.training.hidden);
        c.training.folds = q->value("folds", c.training.folds);
        c.training.epochs = q->value("epochs", c.training.epochs);
        c.training.learning_rate = q->value("learning_rate", c.training.learning_rate);
        c.training.l2 = q->value("l2", c.training.l2);
        c.training.threshold = q->value("threshold", c.training.threshold);
      }
      if (auto s = j.find("suggestions"); s != j.end()) {
        if (s->contains("corpus_radius") && (*s)["corpus_radius"].is_number())
          c.suggestions.corpus_radius = (*s)["corpus_radius"].get<double>();
        c.suggestions.anchor_radius = s->value("anchor_radius", c.suggestions.anchor_radius);
        c.suggestions.min_gain = s->value("min_gain", c.suggestions.min_gain);
        c.suggestions.top_k = s->value("top_k", c.suggestions.top_k);
        c.suggestions.min_related = s->value("min_related", c.suggestions.min_related);
        c.suggestions.anchor_terms = s->value("anchor_terms", c.suggestions.anchor_terms);
        if (s->contains("excluded_relations"))
          c.suggestions.relations.excluded = (*s)["excluded_relations"].get<std::set<std::string, std::less<>>>();
      }
      if (auto k = j.find("corpus"); k != j.end()) c.corpus_size = k->value("initial_size", c.corpus_size);
      if (auto v = j.find("service"); v != j.end()) {
        c.max_text_chars = v->value("max_text_chars", c.max_text_chars);
        c.default_score = explain::parse_score_kind(v->value("default_score", "diversity"));
      }
      c.seed = j.value("seed", c.seed);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::invalid_argument, std::string("malformed config: ") + e.what());
    }
    c.embedder.validate();
    return c;
  }

  static ServiceConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_failure, "cannot read config " + path.string());
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(Errc::invalid_argument, "config is not JSON: " + path.string());
    return from_json(j);
  }
};

}  // namespace ideafeed::service
