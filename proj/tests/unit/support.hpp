#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "ideafeed/condition.hpp"
#include "ideafeed/corpus/corpus_store.hpp"
#include "ideafeed/corpus/snapshot.hpp"
#include "ideafeed/explain/score_function.hpp"
#include "ideafeed/random.hpp"
#include "ideafeed/scoring/scorer.hpp"
#include "ideafeed/text/embedding.hpp"
#include "ideafeed/text/tokenizer.hpp"

#ifndef IDEAFEED_DATA_DIR
#define IDEAFEED_DATA_DIR "data"
#endif
#ifndef IDEAFEED_TEST_DIR
#define IDEAFEED_TEST_DIR "tests"
#endif

namespace testsupport {

namespace fs = std::filesystem;
using namespace ideafeed;

inline fs::path data_dir() { return IDEAFEED_DATA_DIR; }
inline fs::path test_dir() { return IDEAFEED_TEST_DIR; }

class TempDir {
 public:
  explicit TempDir(std::string_view tag = "t") {
    static std::uint64_t counter = 0;
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("ideafeed-" + std::string(tag) + "-" + std::to_string(rd()) + "-" + std::to_string(++counter));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

/// s(x) = sum of per-token weights over content tokens (bag of words), both
/// components. Unknown tokens weigh `fallback`.
struct LinearScorer {
  std::map<std::string, double, std::less<>> weights;
  double fallback = 0.0;
  double bias = 0.0;

  scoring::ScorePair operator()(std::string_view msg) const {
    double s = bias;
    for (const auto& t : text::tokenize(msg).content_tokens()) {
      auto it = weights.find(t);
      s += it == weights.end() ? fallback : it->second;
    }
    return {s, 2.0 * s, 2.0 * s * std::numbers::pi / 100.0, std::clamp(2.0 * s, 0.0, 100.0), false};
  }
};

/// Only quality varies; diversity is constant.
template <class F>
struct QualityOnly {
  F inner;
  scoring::ScorePair operator()(std::string_view m) const {
    auto s = inner(m);
    s.diversity_pct = 12.5;
    s.display_diversity_pct = 12.5;
    s.diversity_raw = 12.5 * std::numbers::pi / 100.0;
    return s;
  }
};

/// Only diversity varies; quality is constant.
template <class F>
struct DiversityOnly {
  F inner;
  scoring::ScorePair operator()(std::string_view m) const {
    auto s = inner(m);
    s.quality_pct = 42.0;
    return s;
  }
};

inline std::shared_ptr<const corpus::CorpusSnapshot> snapshot_of(const std::vector<std::string>& texts,
                                                                  const text::Embedder& embedder,
                                                                  Condition c = Condition::SAXC) {
  std::vector<corpus::CorpusEntry> entries;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    corpus::CorpusEntry e;
    e.id = "seed-" + std::to_string(i + 1);
    e.text = texts[i];
    e.condition = c;
    e.ts = "2024-01-01T00:00:00Z";
    entries.push_back(e);
  }
  return std::make_shared<const corpus::CorpusSnapshot>(c, 1, std::move(entries), embedder.embed_batch(texts));
}

inline std::vector<std::string> fixture_seeds() { return corpus::read_lines(data_dir() / "seeds.txt"); }

inline text::EmbeddingVector random_unit(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return text::normalize(std::move(v));
}

/// Linearly separable training set: the positive class is exactly the
/// messages containing the token "good". Filler comes from the fixture
/// vocabulary.
inline std::vector<scoring::TrainingExample> synthetic_good_dataset(std::size_t n, std::uint64_t seed) {
  const auto vocab = corpus::read_lines(test_dir() / "fixtures" / "vocabulary.txt");
  Rng rng(seed);
  std::vector<scoring::TrainingExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const bool positive = i % 2 == 0;
    std::vector<std::string> words;
    const std::size_t len = 4 + rng.below(7);
    for (std::size_t k = 0; k < len; ++k) words.push_back(vocab[rng.below(vocab.size())]);
    if (positive) words.insert(words.begin() + static_cast<std::ptrdiff_t>(rng.below(words.size() + 1)), "good");
    std::string text;
    for (const auto& w : words) text += (text.empty() ? "" : " ") + w;
    out.push_back(scoring::make_example(text, positive ? 2.0 : 0.0));
  }
  return out;
}

// --- oracles ----------------------------------------------------------------

/// Minimum spanning-tree weight by enumerating every labelled tree on n
/// nodes (Prüfer sequences). Each tree's weight is summed in ascending edge
/// order.
inline double brute_force_mst(const std::vector<std::vector<double>>& w) {
  const std::size_t n = w.size();
  if (n < 2) return 0.0;
  if (n == 2) return w[0][1];
  const std::size_t len = n - 2;
  std::vector<std::size_t> seq(len, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    std::vector<std::size_t> degree(n, 1);
    for (auto s : seq) ++degree[s];
    std::vector<double> weights;
    for (auto s : seq) {
      std::size_t leaf = 0;
      while (degree[leaf] != 1) ++leaf;
      weights.push_back(w[leaf][s]);
      --degree[leaf];
      --degree[s];
    }
    std::size_t u = n, v = n;
    for (std::size_t i = 0; i < n; ++i)
      if (degree[i] == 1) (u == n ? u : v) = i;
    weights.push_back(w[u][v]);
    std::sort(weights.begin(), weights.end());
    double total = 0.0;
    for (double x : weights) total += x;
    best = std::min(best, total);

    std::size_t k = 0;
    while (k < len && ++seq[k] == n) seq[k++] = 0;
    if (k == len) break;
  }
  return best;
}

inline std::vector<std::vector<double>> distance_table(const std::vector<text::EmbeddingVector>& pts) {
  std::vector<std::vector<double>> w(pts.size(), std::vector<double>(pts.size(), 0.0));
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (i != j) w[i][j] = text::angular_distance(pts[i], pts[j]);
  return w;
}

/// Deletes every occurrence of `token` by rebuilding the message from the
/// remaining tokens joined with spaces.
inline std::string rejoin_without(std::string_view msg, std::string_view token) {
  const auto t = text::tokenize(msg);
  std::string out;
  for (const auto& tok : t.tokens) {
    if (tok == token) continue;
    if (!out.empty()) out += ' ';
    out += tok;
  }
  return out;
}

}  // namespace testsupport
