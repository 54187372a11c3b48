#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ideafeed/text/embedding.hpp"

namespace ideafeed::text {

/// Splits "http://host:port/prefix" into ("http://host:port", "/prefix").
inline std::pair<std::string, std::string> split_base_url(const std::string& url) {
  const auto scheme = url.find("://");
  const auto path_start = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start == std::string::npos) return {url, ""};
  std::string path = url.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {url.substr(0, path_start), path};
}

/// Append-only JSONL cache of embeddings, one {"backend","text","vector"}
/// record per line, keyed by (backend id, text). Thread-safe.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto rec = nlohmann::json::parse(line, nullptr, false);
      if (rec.is_discarded() || !rec.contains("vector")) continue;  // torn tail write
      entries_[{rec.value("backend", ""), rec.value("text", "")}] = rec["vector"].get<std::vector<double>>();
    }
  }

  std::optional<std::vector<double>> find(const std::string& backend, const std::string& text) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find({backend, text});
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void put(const std::string& backend, const std::string& text, const std::vector<double>& vector) {
    std::lock_guard lock(mutex_);
    if (!entries_.emplace(std::pair{backend, text}, vector).second) return;
    std::ofstream out(path_, std::ios::app);
    if (!out) throw Error(Errc::io_failure, "cannot append to embedding cache " + path_.string());
    out << nlohmann::json{{"backend", backend}, {"text", text}, {"vector", vector}}.dump() << '\n';
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
  }

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::map<std::pair<std::string, std::string>, std::vector<double>> entries_;
};

/// Client for an external sentence-encoder service speaking
///   POST /embed  {"texts": [...]}  ->  {"vectors": [[...], ...], "dim": D}
/// Returned vectors are L2-normalized here; inputs with no content tokens
/// short-circuit to the flagged fallback without a network call.
class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(const EmbedderConfig& cfg) : dimension_(cfg.dimension) {
    cfg.validate();
    std::tie(base_url_, path_prefix_) = split_base_url(*cfg.service_endpoint);
    if (cfg.cache_path) cache_ = std::make_unique<EmbeddingCache>(*cfg.cache_path);
  }

  EmbeddingVector embed(std::string_view text) const override {
    const std::string key(text);
    return embed_batch(std::span<const std::string>(&key, 1)).front();
  }

  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override {
    std::vector<EmbeddingVector> out(texts.size());
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (tokenize(texts[i]).content_count() == 0) {
        out[i] = fallback_embedding(dimension_);
      } else if (auto hit = cache_ ? cache_->find(backend_id(), texts[i]) : std::nullopt) {
        out[i] = normalize(std::move(*hit));
      } else {
        pending.push_back(i);
      }
    }
    if (pending.empty()) return out;

    nlohmann::json request{{"texts", nlohmann::json::array()}};
    for (auto i : pending) request["texts"].push_back(texts[i]);

    httplib::Client client(base_url_);
    client.set_connection_timeout(5);
    client.set_read_timeout(30);
    auto res = client.Post(path_prefix_ + "/embed", request.dump(), "application/json");
    if (!res) throw Error(Errc::embedding_unavailable, "embedding service unreachable at " + base_url_);
    if (res->status != 200)
      throw Error(Errc::embedding_unavailable, "embedding service returned HTTP " + std::to_string(res->status));

    auto body = nlohmann::json::parse(res->body, nullptr, false);
    if (body.is_discarded() || !body.contains("vectors") || !body["vectors"].is_array() ||
        body["vectors"].size() != pending.size())
      throw Error(Errc::embedding_unavailable, "malformed embedding service response");
    if (body.value("dim", std::size_t{0}) != dimension_)
      throw Error(Errc::dimension_mismatch, "service dim " + body.value("dim", nlohmann::json()).dump() +
                                                " != configured " + std::to_string(dimension_));

    for (std::size_t k = 0; k < pending.size(); ++k) {
      auto values = body["vectors"][k].get<std::vector<double>>();
      if (values.size() != dimension_) throw Error(Errc::dimension_mismatch, "service vector has wrong length");
      const auto& text = texts[pending[k]];
      if (cache_) cache_->put(backend_id(), text, values);
      out[pending[k]] = normalize(std::move(values));
    }
    return out;
  }

  std::size_t dimension() const noexcept override { return dimension_; }
  std::string backend_id() const override { return "external-service:" + base_url_ + path_prefix_; }

 private:
  std::size_t dimension_;
  std::string base_url_;
  std::string path_prefix_;
  std::unique_ptr<EmbeddingCache> cache_;
};

inline std::shared_ptr<const Embedder> make_embedder(const EmbedderConfig& cfg) {
  cfg.validate();
  if (cfg.backend == EmbedderBackend::external_service) return std::make_shared<RemoteEmbedder>(cfg);
  return std::make_shared<HashEmbedder>(cfg);
}

}  // namespace ideafeed::text
