#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ideafeed/error.hpp"
#include "ideafeed/random.hpp"
#include "ideafeed/scoring/auc.hpp"
#include "ideafeed/text/embedding.hpp"
#include "ideafeed/text/tokenizer.hpp"

namespace ideafeed::scoring {

inline constexpr double kDefaultRatingThreshold = 1.17;
inline constexpr double kLengthNormalizer = 50.0;

/// Word count / 50, capped at 1.
inline double normalized_length(std::size_t word_count) {
  return std::min(1.0, static_cast<double>(word_count) / kLengthNormalizer);
}

/// Message length in content words; stop words are not counted.
inline std::size_t message_length(std::string_view message) { return text::tokenize(message).content_count(); }

/// Model input: embedding followed by normalized length.
inline std::vector<double> quality_features(const text::EmbeddingVector& embedding, std::size_t word_count) {
  std::vector<double> f(embedding.values);
  f.push_back(normalized_length(word_count));
  return f;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Two-layer fully connected classifier: tanh hidden layer, sigmoid output.
/// Immutable after training; forward() is const and thread-safe.
struct QualityModel {
  std::size_t dim = 0;     // embedding dimension D; the input has D + 1 features
  std::size_t hidden = 0;  // H
  std::vector<double> w1;  // (D + 1) x H, row-major by input feature
  std::vector<double> b1;  // H
  std::vector<double> w2;  // H
  double b2 = 0.0;
  std::uint64_t seed = 0;
  double threshold = kDefaultRatingThreshold;
  std::string train_hash;
  std::vector<double> fold_aucs;
  std::string embedder_id;

  static QualityModel zeros(std::size_t dim, std::size_t hidden) {
    QualityModel m;
    m.dim = dim;
    m.hidden = hidden;
    m.w1.assign((dim + 1) * hidden, 0.0);
    m.b1.assign(hidden, 0.0);
    m.w2.assign(hidden, 0.0);
    return m;
  }

  std::size_t input_size() const noexcept { return dim + 1; }

  /// Probability of the high-quality class.
  double forward(std::span<const double> x) const {
    if (x.size() != input_size())
      throw Error(Errc::dimension_mismatch,
                  "model expects " + std::to_string(input_size()) + " features, got " + std::to_string(x.size()));
    double logit = b2;
    for (std::size_t h = 0; h < hidden; ++h) {
      double a = b1[h];
      for (std::size_t f = 0; f < x.size(); ++f) a += x[f] * w1[f * hidden + h];
      logit += w2[h] * std::tanh(a);
    }
    return sigmoid(logit);
  }

  nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t f = 0; f < input_size(); ++f)
      rows.push_back(std::vector<double>(w1.begin() + static_cast<std::ptrdiff_t>(f * hidden),
                                         w1.begin() + static_cast<std::ptrdiff_t>((f + 1) * hidden)));
    return {{"format", "ideafeed-quality-model"},
            {"version", 1},
            {"dim", dim},
            {"hidden", hidden},
            {"activation", "tanh"},
            {"w1", rows},
            {"b1", b1},
            {"w2", w2},
            {"b2", b2},
            {"seed", seed},
            {"threshold", threshold},
            {"train_hash", train_hash},
            {"fold_aucs", fold_aucs},
            {"embedder", embedder_id}};
  }

  static QualityModel from_json(const nlohmann::json& j) {
    try {
      QualityModel m;
      m.dim = j.at("dim").get<std::size_t>();
      m.hidden = j.at("hidden").get<std::size_t>();
      if (j.value("activation", "tanh") != "tanh")
        throw Error(Errc::invalid_argument, "unsupported activation " + j["activation"].dump());
      const auto& rows = j.at("w1");
      if (rows.size() != m.dim + 1) throw Error(Errc::invalid_argument, "w1 must have dim + 1 rows");
      for (const auto& row : rows) {
        auto r = row.get<std::vector<double>>();
        if (r.size() != m.hidden) throw Error(Errc::invalid_argument, "w1 row width != hidden");
        m.w1.insert(m.w1.end(), r.begin(), r.end());
      }
      m.b1 = j.at("b1").get<std::vector<double>>();
      m.w2 = j.at("w2").get<std::vector<double>>();
      if (m.b1.size() != m.hidden || m.w2.size() != m.hidden)
        throw Error(Errc::invalid_argument, "b1/w2 length != hidden");
      m.b2 = j.at("b2").get<double>();
      m.seed = j.value("seed", std::uint64_t{0});
      m.threshold = j.value("threshold", kDefaultRatingThreshold);
      m.train_hash = j.value("train_hash", "");
      m.fold_aucs = j.value("fold_aucs", std::vector<double>{});
      m.embedder_id = j.value("embedder", "");
      return m;
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::invalid_argument, std::string("malformed model file: ") + e.what());
    }
  }

  std::string serialize() const { return to_json().dump(2) + "\n"; }

  /// Hex FNV-1a of the serialized model.
  std::string hash() const {
    std::ostringstream os;
    os << std::hex << text::fnv1a64(serialize());
    return os.str();
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io_failure, "cannot write model file " + path.string());
    out << serialize();
  }

  static QualityModel load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_failure, "cannot read model file " + path.string());
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(Errc::invalid_argument, "model file is not JSON: " + path.string());
    return from_json(j);
  }
};

struct QualityPrediction {
  double quality_pct = 0.0;
  bool degenerate = false;
};

inline QualityPrediction predict_quality(const QualityModel& model, const text::EmbeddingVector& embedding,
                                         std::size_t word_count) {
  if (embedding.dimension() != model.dim)
    throw Error(Errc::dimension_mismatch, "embedding dimension " + std::to_string(embedding.dimension()) +
                                              " != model dimension " + std::to_string(model.dim));
  const auto x = quality_features(embedding, word_count);
  return {100.0 * model.forward(x), embedding.degenerate};
}

inline QualityPrediction predict_quality(const QualityModel& model, const text::Embedder& embedder,
                                         std::string_view message) {
  return predict_quality(model, embedder.embed(message), message_length(message));
}

// --- training ---------------------------------------------------------------

struct TrainingExample {
  std::string text;
  double rating = 0.0;  // -3 .. +3
  bool label = false;   // rating > threshold
};

inline TrainingExample make_example(std::string text, double rating, double threshold = kDefaultRatingThreshold) {
  return {std::move(text), rating, rating > threshold};
}

struct TrainOptions {
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  std::size_t hidden = 16;
  std::size_t epochs = 300;
  double learning_rate = 0.5;
  double l2 = 1e-4;
  double threshold = kDefaultRatingThreshold;
};

struct TrainingResult {
  QualityModel model;
  std::vector<double> fold_aucs;
  double mean_auc = 0.0;
};

namespace detail {

struct Dataset {
  std::vector<std::vector<double>> x;
  std::vector<bool> y;
};

// Keeps every minority-class row and a seeded random subset of the majority
// class of the same size. Output order: selected rows in ascending index order.
inline std::vector<std::size_t> balanced_subset(const std::vector<std::size_t>& rows, const std::vector<bool>& y,
                                                Rng& rng) {
  std::vector<std::size_t> pos, neg;
  for (auto r : rows) (y[r] ? pos : neg).push_back(r);
  auto& major = pos.size() > neg.size() ? pos : neg;
  const auto& minor = pos.size() > neg.size() ? neg : pos;
  rng.shuffle(major);
  major.resize(minor.size());
  std::vector<std::size_t> out(pos);
  out.insert(out.end(), neg.begin(), neg.end());
  std::sort(out.begin(), out.end());
  return out;
}

// Full-batch gradient descent on mean binary cross-entropy plus an L2 penalty
// on the weights. Xavier-uniform init drawn from `rng`.
inline QualityModel fit(const Dataset& data, const std::vector<std::size_t>& rows, std::size_t dim,
                        const TrainOptions& opts, Rng& rng) {
  const std::size_t in = dim + 1, H = opts.hidden;
  auto model = QualityModel::zeros(dim, H);
  const double r1 = std::sqrt(6.0 / static_cast<double>(in + H));
  for (auto& w : model.w1) w = rng.uniform(-r1, r1);
  const double r2 = std::sqrt(6.0 / static_cast<double>(H + 1));
  for (auto& w : model.w2) w = rng.uniform(-r2, r2);

  const double inv_n = 1.0 / static_cast<double>(rows.size());
  std::vector<double> g_w1(in * H), g_b1(H), g_w2(H), hidden(H);
  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    std::fill(g_w1.begin(), g_w1.end(), 0.0);
    std::fill(g_b1.begin(), g_b1.end(), 0.0);
    std::fill(g_w2.begin(), g_w2.end(), 0.0);
    double g_b2 = 0.0;
    for (auto r : rows) {
      const auto& x = data.x[r];
      double logit = model.b2;
      for (std::size_t h = 0; h < H; ++h) {
        double a = model.b1[h];
        for (std::size_t f = 0; f < in; ++f) a += x[f] * model.w1[f * H + h];
        hidden[h] = std::tanh(a);
        logit += model.w2[h] * hidden[h];
      }
      const double err = sigmoid(logit) - (data.y[r] ? 1.0 : 0.0);
      g_b2 += err;
      for (std::size_t h = 0; h < H; ++h) {
        g_w2[h] += err * hidden[h];
        const double delta = err * model.w2[h] * (1.0 - hidden[h] * hidden[h]);
        g_b1[h] += delta;
        for (std::size_t f = 0; f < in; ++f) g_w1[f * H + h] += delta * x[f];
      }
    }
    const double lr = opts.learning_rate;
    for (std::size_t k = 0; k < g_w1.size(); ++k) model.w1[k] -= lr * (g_w1[k] * inv_n + opts.l2 * model.w1[k]);
    for (std::size_t h = 0; h < H; ++h) {
      model.b1[h] -= lr * g_b1[h] * inv_n;
      model.w2[h] -= lr * (g_w2[h] * inv_n + opts.l2 * model.w2[h]);
    }
    model.b2 -= lr * g_b2 * inv_n;
  }
  return model;
}

}  // namespace detail

/// Hex FNV-1a over "text\trating\n" for every example, in input order.
inline std::string training_hash(std::span<const TrainingExample> examples) {
  std::string buf;
  for (const auto& e : examples) {
    std::ostringstream os;
    os.precision(17);
    os << e.text << '\t' << e.rating << '\n';
    buf += os.str();
  }
  std::ostringstream os;
  os << std::hex << text::fnv1a64(buf);
  return os.str();
}

/// Trains the quality classifier with stratified k-fold cross-validation and
/// then fits the final model on the full (class-balanced) set. Identical
/// (examples, embedder, options) produce a bit-identical model.
inline TrainingResult train_quality(std::span<const TrainingExample> examples, const text::Embedder& embedder,
                                    const TrainOptions& opts = {}) {
  if (opts.folds < 2) throw Error(Errc::invalid_argument, "folds must be >= 2");
  if (opts.hidden < 1) throw Error(Errc::invalid_argument, "hidden width must be >= 1");
  if (examples.size() < 20)
    throw Error(Errc::insufficient_data, "need at least 20 training examples, got " + std::to_string(examples.size()));

  detail::Dataset data;
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    data.x.push_back(quality_features(embedder.embed(examples[i].text), message_length(examples[i].text)));
    data.y.push_back(examples[i].label);
    (examples[i].label ? pos : neg).push_back(i);
  }
  if (pos.empty() || neg.empty()) throw Error(Errc::single_class, "training data has only one class");
  if (pos.size() < opts.folds || neg.size() < opts.folds)
    throw Error(Errc::insufficient_data, "each class needs at least `folds` examples");

  Rng rng(opts.seed);
  std::vector<std::size_t> fold_of(examples.size());
  for (auto* cls : {&pos, &neg}) {
    rng.shuffle(*cls);
    for (std::size_t k = 0; k < cls->size(); ++k) fold_of[(*cls)[k]] = k % opts.folds;
  }

  const std::size_t dim = embedder.dimension();
  TrainingResult result;
  for (std::size_t fold = 0; fold < opts.folds; ++fold) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < examples.size(); ++i) (fold_of[i] == fold ? test_rows : train_rows).push_back(i);
    const auto rows = detail::balanced_subset(train_rows, data.y, rng);
    const auto model = detail::fit(data, rows, dim, opts, rng);
    std::vector<double> scores;
    std::vector<bool> labels;
    for (auto r : test_rows) {
      scores.push_back(model.forward(data.x[r]));
      labels.push_back(data.y[r]);
    }
    result.fold_aucs.push_back(roc_auc(scores, labels));
  }
  double sum = 0.0;
  for (double a : result.fold_aucs) sum += a;
  result.mean_auc = sum / static_cast<double>(result.fold_aucs.size());

  std::vector<std::size_t> all(examples.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  result.model = detail::fit(data, detail::balanced_subset(all, data.y, rng), dim, opts, rng);
  result.model.seed = opts.seed;
  result.model.threshold = opts.threshold;
  result.model.train_hash = training_hash(examples);
  result.model.fold_aucs = result.fold_aucs;
  result.model.embedder_id = embedder.backend_id();
  return result;
}

/// Reads training JSONL: one {"text": ..., "rating": ...} object per line.
inline std::vector<TrainingExample> load_training_jsonl(const std::filesystem::path& path,
                                                        double threshold = kDefaultRatingThreshold) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_failure, "cannot read training data " + path.string());
  std::vector<TrainingExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("text") || !j.contains("rating") || !j["text"].is_string() ||
        !j["rating"].is_number())
      throw Error(Errc::invalid_argument, path.string() + ":" + std::to_string(lineno) + ": expected {text, rating}");
    out.push_back(make_example(j["text"].get<std::string>(), j["rating"].get<double>(), threshold));
  }
  return out;
}

}  // namespace ideafeed::scoring
