#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ideafeed/error.hpp"
#include "ideafeed/kg/knowledge_graph.hpp"
#include "ideafeed/text/remote_embedder.hpp"

namespace ideafeed::kg {

/// "/c/en/musical_time/n" -> "musical time". Empty for non-English nodes.
inline std::string term_from_node_uri(std::string_view uri) {
  constexpr std::string_view prefix = "/c/en/";
  if (uri.substr(0, prefix.size()) != prefix) return {};
  auto rest = uri.substr(prefix.size());
  rest = rest.substr(0, rest.find('/'));
  std::string term(rest);
  std::replace(term.begin(), term.end(), '_', ' ');
  return to_lower_ascii(term);
}

/// Edges from a ConceptNet-style lookup response:
/// {"edges": [{"rel": {"label"}, "start": {"term"|"@id"}, "end": {...}, "weight"}]}
inline std::vector<KnowledgeEdge> parse_edge_lookup(const nlohmann::json& body) {
  std::vector<KnowledgeEdge> out;
  if (!body.contains("edges") || !body["edges"].is_array()) return out;
  auto node_term = [](const nlohmann::json& node) -> std::string {
    if (!node.is_object()) return {};
    if (node.contains("term") && node["term"].is_string()) return term_from_node_uri(node["term"].get<std::string>());
    if (node.contains("@id") && node["@id"].is_string()) return term_from_node_uri(node["@id"].get<std::string>());
    return {};
  };
  for (const auto& e : body["edges"]) {
    if (!e.is_object() || !e.contains("rel")) continue;
    KnowledgeEdge edge;
    edge.relation = e["rel"].value("label", "");
    edge.start = node_term(e.value("start", nlohmann::json::object()));
    edge.end = node_term(e.value("end", nlohmann::json::object()));
    edge.weight = e.value("weight", 1.0);
    if (edge.relation.empty() || edge.start.empty() || edge.end.empty() || edge.weight < 0.0) continue;
    out.push_back(std::move(edge));
  }
  return out;
}

struct RemoteOptions {
  std::string endpoint;  // base URL, e.g. "http://api.conceptnet.io"
  /// Minimum spacing between network requests.
  std::chrono::milliseconds min_interval{1000};
  std::size_t limit = 1000;
};

/// Offline-first knowledge source. Queries are answered from the local
/// snapshot; a term missing from the snapshot is fetched once from the remote
/// edge-lookup API, appended to the snapshot file, and served locally after.
class KnowledgeSource {
 public:
  explicit KnowledgeSource(std::filesystem::path snapshot_path, std::optional<RemoteOptions> remote = std::nullopt)
      : snapshot_path_(std::move(snapshot_path)), remote_(std::move(remote)) {
    if (std::filesystem::exists(snapshot_path_))
      graph_ = std::make_shared<const KnowledgeGraph>(KnowledgeGraph::ingest_file(snapshot_path_));
    else
      graph_ = std::make_shared<const KnowledgeGraph>();
  }

  std::shared_ptr<const KnowledgeGraph> graph() const {
    std::lock_guard lock(mutex_);
    return graph_;
  }

  std::size_t network_calls() const {
    std::lock_guard lock(mutex_);
    return network_calls_;
  }

  /// Edges touching `term`, from the snapshot when present, otherwise fetched.
  std::vector<KnowledgeEdge> fetch_remote(const std::string& raw_term) {
    const std::string term = to_lower_ascii(trim(raw_term));
    std::lock_guard lock(mutex_);
    if (graph_->contains(term)) return graph_->edges_of(term);
    if (!remote_ || remote_->endpoint.empty())
      throw Error(Errc::network_failure, "'" + term + "' not in snapshot and no endpoint configured");

    if (last_call_) {
      const auto wait = *last_call_ + remote_->min_interval - std::chrono::steady_clock::now();
      if (wait > std::chrono::steady_clock::duration::zero()) std::this_thread::sleep_for(wait);
    }
    last_call_ = std::chrono::steady_clock::now();
    ++network_calls_;

    const auto [base, prefix] = text::split_base_url(remote_->endpoint);
    std::string node = term;
    std::replace(node.begin(), node.end(), ' ', '_');
    httplib::Client client(base);
    client.set_connection_timeout(5);
    client.set_read_timeout(20);
    httplib::Params params{{"node", "/c/en/" + node}, {"other", "/c/en"}, {"limit", std::to_string(remote_->limit)}};
    auto res = client.Get(prefix + "/query", params, httplib::Headers{});
    if (!res) throw Error(Errc::network_failure, "edge lookup unreachable at " + base);
    if (res->status != 200) throw Error(Errc::network_failure, "edge lookup returned HTTP " + std::to_string(res->status));
    auto body = nlohmann::json::parse(res->body, nullptr, false);
    if (body.is_discarded()) throw Error(Errc::network_failure, "edge lookup returned non-JSON body");

    auto edges = parse_edge_lookup(body);
    auto next = std::make_shared<KnowledgeGraph>(*graph_);
    std::ofstream out(snapshot_path_, std::ios::app);
    if (!out) throw Error(Errc::io_failure, "cannot append to snapshot " + snapshot_path_.string());
    for (const auto& e : edges) {
      if (!next->add(e)) continue;
      out << e.relation << '\t' << e.start << '\t' << e.end << '\t' << format_weight(e.weight) << '\n';
    }
    graph_ = std::move(next);
    return graph_->edges_of(term);
  }

 private:
  std::filesystem::path snapshot_path_;
  std::optional<RemoteOptions> remote_;
  mutable std::mutex mutex_;
  std::shared_ptr<const KnowledgeGraph> graph_;
  std::optional<std::chrono::steady_clock::time_point> last_call_;
  std::size_t network_calls_ = 0;
};

}  // namespace ideafeed::kg
