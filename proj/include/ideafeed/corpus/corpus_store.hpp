#pragma once

#include <array>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ideafeed/condition.hpp"
#include "ideafeed/corpus/records.hpp"
#include "ideafeed/corpus/snapshot.hpp"
#include "ideafeed/error.hpp"
#include "ideafeed/random.hpp"
#include "ideafeed/text/embedding.hpp"

namespace ideafeed::corpus {

inline std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::json to_json(const CorpusEntry& e) {
  auto opt = [](const auto& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"id", e.id},
          {"text", e.text},
          {"condition", condition_name(e.condition)},
          {"iteration", e.iteration},
          {"parent", opt(e.parent)},
          {"quality_pct", opt(e.quality_pct)},
          {"diversity_pct", opt(e.diversity_pct)},
          {"ts", e.ts},
          {"version", e.version}};
}

inline CorpusEntry entry_from_json(const nlohmann::json& j) {
  CorpusEntry e;
  e.id = j.at("id").get<std::string>();
  e.text = j.at("text").get<std::string>();
  e.condition = parse_condition(j.at("condition").get<std::string>());
  e.iteration = j.value("iteration", 0);
  if (j.contains("parent") && j["parent"].is_string()) e.parent = j["parent"].get<std::string>();
  if (j.contains("quality_pct") && j["quality_pct"].is_number()) e.quality_pct = j["quality_pct"].get<double>();
  if (j.contains("diversity_pct") && j["diversity_pct"].is_number()) e.diversity_pct = j["diversity_pct"].get<double>();
  e.ts = j.value("ts", "");
  e.version = j.value("version", std::uint64_t{1});
  return e;
}

/// Canonical JSONL rendering of a snapshot: one entry per line, then a
/// trailer line with the version. Equal snapshots render byte-identically.
inline std::string to_jsonl(const CorpusSnapshot& s) {
  std::string out;
  for (const auto& e : s.entries()) out += to_json(e).dump() + "\n";
  out += nlohmann::json{{"condition", condition_name(s.condition())}, {"version", s.version()}}.dump() + "\n";
  return out;
}

/// Reads a seed or prompt file: one message per line, blank lines skipped.
inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_failure, "cannot read " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line.front() == '#') continue;
    out.push_back(line);
  }
  return out;
}

/// Per-condition prior-ideation collections persisted as append-only JSONL
/// (`<dir>/<COND>.jsonl`) plus `<dir>/index.json`. Snapshots are immutable and
/// handed out as shared pointers; appends to one condition are serialized and
/// publish a new snapshot without touching readers of the old one.
class CorpusStore {
 public:
  CorpusStore(std::filesystem::path dir, std::shared_ptr<const text::Embedder> embedder)
      : dir_(std::move(dir)), embedder_(std::move(embedder)) {
    std::filesystem::create_directories(dir_);
    reload();
  }

  /// Re-reads every condition file from disk.
  void reload() {
    std::lock_guard lock(map_mutex_);
    snapshots_.clear();
    for (auto c : kAllConditions) {
      const auto path = file_for(c);
      if (!std::filesystem::exists(path)) continue;
      std::ifstream in(path);
      std::vector<CorpusEntry> entries;
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) continue;  // torn final write
        entries.push_back(entry_from_json(j));
      }
      if (entries.empty()) continue;
      std::uint64_t version = 1;
      for (const auto& e : entries) version = std::max(version, e.version);
      snapshots_[c] = build(c, version, std::move(entries));
    }
  }

  /// (Re)initializes a condition with n seed messages: the first n, or a
  /// seeded random choice of n when `shuffle_seed` is set. Version 1.
  std::shared_ptr<const CorpusSnapshot> init_corpus(Condition c, const std::vector<std::string>& seeds, std::size_t n,
                                                    std::optional<std::uint64_t> shuffle_seed = std::nullopt) {
    if (n == 0) throw Error(Errc::invalid_argument, "corpus size n must be >= 1");
    if (seeds.size() < n)
      throw Error(Errc::too_few_seeds, "need " + std::to_string(n) + " seeds, file has " + std::to_string(seeds.size()));
    std::vector<std::size_t> pick(seeds.size());
    for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
    if (shuffle_seed) {
      Rng rng(*shuffle_seed);
      rng.shuffle(pick);
    }
    pick.resize(n);

    std::lock_guard write(write_mutex_[index_of(c)]);
    const std::string ts = now_iso8601();
    std::vector<CorpusEntry> entries;
    for (std::size_t k = 0; k < n; ++k) {
      CorpusEntry e;
      e.id = "seed-" + std::string(condition_name(c)) + "-" + std::to_string(k + 1);
      e.text = seeds[pick[k]];
      e.condition = c;
      e.iteration = 0;
      e.ts = ts;
      e.version = 1;
      entries.push_back(std::move(e));
    }
    {
      std::ofstream out(file_for(c), std::ios::trunc);
      if (!out) throw Error(Errc::io_failure, "cannot write " + file_for(c).string());
      for (const auto& e : entries) out << to_json(e).dump() << '\n';
    }
    auto snap = build(c, 1, std::move(entries));
    publish(c, snap);
    return snap;
  }

  /// Adds a submitted ideation to its condition's collection.
  std::shared_ptr<const CorpusSnapshot> append_ideation(Condition c, const IdeationRecord& record) {
    if (record.condition != c)
      throw Error(Errc::condition_mismatch, "record belongs to " + std::string(condition_name(record.condition)) +
                                                ", not " + std::string(condition_name(c)));
    std::lock_guard write(write_mutex_[index_of(c)]);
    const auto current = snapshot(c);
    CorpusEntry e;
    e.id = record.id;
    e.text = record.text;
    e.condition = c;
    e.iteration = record.iteration;
    e.parent = record.parent;
    e.quality_pct = record.scores.quality_pct;
    e.diversity_pct = record.scores.diversity_pct;
    e.ts = record.ts.empty() ? now_iso8601() : record.ts;
    e.version = current->version() + 1;
    {
      std::ofstream out(file_for(c), std::ios::app);
      if (!out) throw Error(Errc::io_failure, "cannot append to " + file_for(c).string());
      out << to_json(e).dump() << '\n';
      out.flush();
    }
    auto next = std::make_shared<const CorpusSnapshot>(current->with_appended(e, embedder_->embed(e.text)));
    publish(c, next);
    return next;
  }

  bool has(Condition c) const {
    std::lock_guard lock(map_mutex_);
    return snapshots_.contains(c);
  }

  std::shared_ptr<const CorpusSnapshot> snapshot(Condition c) const {
    std::lock_guard lock(map_mutex_);
    auto it = snapshots_.find(c);
    if (it == snapshots_.end())
      throw Error(Errc::empty_corpus, "no corpus initialized for condition " + std::string(condition_name(c)));
    return it->second;
  }

  std::map<std::string, std::uint64_t> versions() const {
    std::lock_guard lock(map_mutex_);
    std::map<std::string, std::uint64_t> out;
    for (const auto& [c, s] : snapshots_) out[std::string(condition_name(c))] = s->version();
    return out;
  }

  const std::filesystem::path& directory() const noexcept { return dir_; }
  const text::Embedder& embedder() const noexcept { return *embedder_; }

 private:
  static std::size_t index_of(Condition c) { return static_cast<std::size_t>(c); }

  std::filesystem::path file_for(Condition c) const { return dir_ / (std::string(condition_name(c)) + ".jsonl"); }

  std::shared_ptr<const CorpusSnapshot> build(Condition c, std::uint64_t version, std::vector<CorpusEntry> entries) const {
    std::vector<std::string> texts;
    texts.reserve(entries.size());
    for (const auto& e : entries) texts.push_back(e.text);
    return std::make_shared<const CorpusSnapshot>(c, version, std::move(entries), embedder_->embed_batch(texts));
  }

  void publish(Condition c, std::shared_ptr<const CorpusSnapshot> snap) {
    {
      std::lock_guard lock(map_mutex_);
      snapshots_[c] = std::move(snap);
    }
    write_index();
  }

  void write_index() const {
    nlohmann::json idx{{"embedder", embedder_->backend_id()}, {"conditions", nlohmann::json::object()}};
    {
      std::lock_guard lock(map_mutex_);
      for (const auto& [c, s] : snapshots_)
        idx["conditions"][std::string(condition_name(c))] = {{"version", s->version()}, {"records", s->size()}};
    }
    std::lock_guard lock(index_mutex_);
    const auto tmp = dir_ / "index.json.tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      out << idx.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, dir_ / "index.json");
  }

  std::filesystem::path dir_;
  std::shared_ptr<const text::Embedder> embedder_;
  mutable std::mutex map_mutex_;
  mutable std::mutex index_mutex_;
  std::array<std::mutex, kAllConditions.size()> write_mutex_;
  std::map<Condition, std::shared_ptr<const CorpusSnapshot>> snapshots_;
};

}  // namespace ideafeed::corpus
