#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ideafeed/error.hpp"
#include "ideafeed/text/tokenizer.hpp"

namespace ideafeed::text {

/// A message or word mapped onto the unit hypersphere.
struct EmbeddingVector {
  std::vector<double> values;
  /// True when the input had no usable content and the fixed fallback basis
  /// vector e_1 was returned instead.
  bool degenerate = false;

  std::size_t dimension() const noexcept { return values.size(); }

  double norm() const {
    double sq = 0.0;
    for (double v : values) sq += v * v;
    return std::sqrt(sq);
  }

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

enum class EmbedderBackend { reference_hash, external_service };

struct EmbedderConfig {
  EmbedderBackend backend = EmbedderBackend::reference_hash;
  std::size_t dimension = 64;
  /// Signed buckets per token for the reference backend.
  std::size_t hash_probes = 4;
  std::optional<std::string> service_endpoint;
  std::optional<std::string> cache_path;

  void validate() const {
    if (dimension < 8) throw Error(Errc::invalid_argument, "embedding dimension must be >= 8");
    if (backend == EmbedderBackend::reference_hash && (hash_probes < 1 || hash_probes > dimension))
      throw Error(Errc::invalid_argument, "hash_probes must be in [1, dimension]");
    if (backend == EmbedderBackend::external_service && (!service_endpoint || service_endpoint->empty()))
      throw Error(Errc::invalid_argument, "external-service backend requires service_endpoint");
  }
};

inline constexpr double kUnitDotTolerance = 1e-9;

/// Angle between two unit vectors, in [0, pi]. Dot products within 1e-9 of
/// +/-1 snap to exactly 0 / pi so that duplicate inputs are at distance zero.
inline double angular_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error(Errc::dimension_mismatch,
                "vectors of dimension " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  if (dot >= 1.0 - kUnitDotTolerance) return 0.0;
  if (dot <= -1.0 + kUnitDotTolerance) return std::numbers::pi;
  return std::acos(dot);
}

inline double angular_distance(const EmbeddingVector& a, const EmbeddingVector& b) {
  return angular_distance(std::span<const double>(a.values), std::span<const double>(b.values));
}

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct HashProbe {
  std::size_t index;
  double sign;
};

// Probe j of a token: bucket = splitmix64(h + 2j) mod D, sign taken from the
// top bit of splitmix64(h + 2j + 1), where h = fnv1a64(token). Buckets already
// used by an earlier probe are skipped so the probes are distinct.
inline std::vector<HashProbe> token_probes(std::string_view token, std::size_t dimension, std::size_t probes) {
  std::vector<HashProbe> out;
  out.reserve(probes);
  const std::uint64_t h = fnv1a64(token);
  for (std::uint64_t j = 0; out.size() < probes; ++j) {
    const auto index = static_cast<std::size_t>(splitmix64(h + 2 * j) % dimension);
    if (std::any_of(out.begin(), out.end(), [&](const HashProbe& p) { return p.index == index; })) continue;
    const double sign = (splitmix64(h + 2 * j + 1) >> 63) ? -1.0 : 1.0;
    out.push_back({index, sign});
  }
  return out;
}

inline EmbeddingVector fallback_embedding(std::size_t dimension) {
  EmbeddingVector e;
  e.values.assign(dimension, 0.0);
  e.values[0] = 1.0;
  e.degenerate = true;
  return e;
}

/// Normalizes in place; a zero vector becomes the flagged fallback.
inline EmbeddingVector normalize(std::vector<double> values) {
  double sq = 0.0;
  for (double v : values) sq += v * v;
  if (sq == 0.0) return fallback_embedding(values.size());
  const double norm = std::sqrt(sq);
  for (double& v : values) v /= norm;
  return EmbeddingVector{std::move(values), false};
}

/// Provider interface. Implementations must be safe for concurrent calls.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual EmbeddingVector embed(std::string_view text) const = 0;
  virtual std::size_t dimension() const noexcept = 0;
  virtual std::string backend_id() const = 0;

  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed(t));
    return out;
  }
};

/// Offline, deterministic embedder: content tokens are hashed into signed
/// buckets, summed, and L2-normalized. Stop words contribute nothing.
class HashEmbedder final : public Embedder {
 public:
  explicit HashEmbedder(std::size_t dimension = 64, std::size_t probes = 4)
      : dimension_(dimension), probes_(probes) {
    EmbedderConfig cfg;
    cfg.dimension = dimension;
    cfg.hash_probes = probes;
    cfg.validate();
  }

  explicit HashEmbedder(const EmbedderConfig& cfg) : HashEmbedder(cfg.dimension, cfg.hash_probes) {}

  EmbeddingVector embed(std::string_view text) const override { return embed_tokens(tokenize(text)); }

  EmbeddingVector embed_tokens(const TokenList& tokens) const {
    std::vector<double> acc(dimension_, 0.0);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (!tokens.content_mask[i]) continue;
      for (const auto& p : token_probes(tokens.tokens[i], dimension_, probes_)) acc[p.index] += p.sign;
    }
    return normalize(std::move(acc));
  }

  std::size_t dimension() const noexcept override { return dimension_; }
  std::size_t probes() const noexcept { return probes_; }
  std::string backend_id() const override {
    return "reference-hash/d" + std::to_string(dimension_) + "/k" + std::to_string(probes_);
  }

 private:
  std::size_t dimension_;
  std::size_t probes_;
};

}  // namespace ideafeed::text
