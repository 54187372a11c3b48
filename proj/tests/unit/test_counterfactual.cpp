#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <set>

#include "ideafeed/explain/counterfactual.hpp"
#include "ideafeed/scoring/quality_model.hpp"
#include "support.hpp"

using namespace ideafeed;
using namespace ideafeed::explain;
using Catch::Matchers::WithinAbs;

namespace {

constexpr std::size_t kDim = 8;

/// Fixed vectors for known strings; anything else goes through the hash embedder.
class TableEmbedder final : public text::Embedder {
 public:
  std::map<std::string, text::EmbeddingVector, std::less<>> table;

  text::EmbeddingVector embed(std::string_view t) const override {
    if (auto it = table.find(t); it != table.end()) return it->second;
    return fallback_.embed(t);
  }
  std::size_t dimension() const noexcept override { return kDim; }
  std::string backend_id() const override { return "table"; }

 private:
  text::HashEmbedder fallback_{kDim, 4};
};

text::EmbeddingVector unit(std::size_t i) {
  std::vector<double> v(kDim, 0.0);
  v[i] = 1.0;
  return {v, false};
}

/// cos(a) e0 + sin(a) (cos(b) e2 + sin(b) e3): angle a from e0.
text::EmbeddingVector at(double a, double b) {
  std::vector<double> v(kDim, 0.0);
  v[0] = std::cos(a);
  v[2] = std::sin(a) * std::cos(b);
  v[3] = std::sin(a) * std::sin(b);
  return {v, false};
}

double angle(const text::EmbeddingVector& x, const text::EmbeddingVector& y) {
  const double d = std::inner_product(x.values.begin(), x.values.end(), y.values.begin(), 0.0);
  return std::acos(std::clamp(d, -1.0, 1.0));
}

struct Candidate {
  const char* term;
  double a, b, weight;
};

// anchor radius 1.0, corpus radius 1.6, prior {e3}, anchor "exercise" = e0
const Candidate kToy[] = {
    {"alpha", 0.3, 0.0, 2.0},      // passes
    {"bravo", 0.6, 0.0, 1.0},      // passes
    {"charlie", 0.3, 0.0, -1.0},   // lowers the score
    {"deltas", 0.4, 0.0, 0.0},     // no change
    {"echo", 1.4, 0.0, 5.0},       // far from anchor
    {"foxtrot", 0.3, -1.5708, 5.0},  // far from corpus
    {"golf", 1.4, -1.5708, 3.0},   // both
    {"hotel", 1.05, 0.0, 4.0},     // just past the anchor radius
    {"india", 0.3, -0.2, 4.0},     // just past the corpus radius
    {"juliet", 1.2, 0.0, 1.0},
    {"kilo", 0.5, -1.0, 1.0},
    {"lima", 0.2, 0.0, -0.5},
};

struct Toy {
  kg::KnowledgeGraph graph;
  TableEmbedder embedder;
  std::vector<text::EmbeddingVector> prior{unit(3)};
  testsupport::LinearScorer scorer;
  SuggestionConfig cfg;

  Toy() {
    embedder.table["exercise"] = unit(0);
    for (const auto& c : kToy) {
      graph.add({"RelatedTo", "exercise", c.term, 1.0});
      embedder.table[c.term] = at(c.a, c.b);
      scorer.weights[c.term] = c.weight;
    }
    scorer.weights["exercise"] = 0.0;
    cfg.anchor_terms = {"exercise"};
    cfg.anchor_radius = 1.0;
    cfg.corpus_radius = 1.6;
  }
  SuggestionContext ctx() const { return {graph, embedder, prior, 3.0}; }
};

/// Exhaustive reference: every neighbor, every filter, rescored by direct
/// string substitution.
std::vector<std::string> oracle(const Toy& t, const std::string& msg, const std::string& token) {
  struct Row {
    std::string term;
    double best;
  };
  std::vector<Row> rows;
  const auto base = t.scorer(msg);
  for (const auto& c : kToy) {
    const auto z = t.embedder.embed(c.term);
    if (angle(z, t.prior[0]) > *t.cfg.corpus_radius) continue;
    if (angle(z, unit(0)) > t.cfg.anchor_radius) continue;
    std::string replaced = msg;
    for (auto pos = replaced.find(token); pos != std::string::npos; pos = replaced.find(token, pos + 1))
      replaced.replace(pos, token.size(), c.term);
    const auto s = t.scorer(replaced);
    const double gain = s.quality_pct - base.quality_pct;
    const double best = std::max(gain, s.diversity_pct - base.diversity_pct);
    if (gain > t.cfg.min_gain && best > 0.0) rows.push_back({c.term, best});
  }
  std::sort(rows.begin(), rows.end(),
            [](const Row& x, const Row& y) { return x.best != y.best ? x.best > y.best : x.term < y.term; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < rows.size() && i < t.cfg.top_k; ++i) out.push_back(rows[i].term);
  return out;
}

std::vector<std::string> terms(const std::vector<Suggestion>& s) {
  std::vector<std::string> out;
  for (const auto& x : s) out.push_back(x.replacement_term);
  return out;
}

AttributionSet highlight(std::initializer_list<std::string> tokens, ScoreKind kind = ScoreKind::quality) {
  AttributionSet a;
  a.score_kind = kind;
  a.highlighted = tokens;
  return a;
}

}  // namespace

TEST_CASE("toy graph: exactly two of twelve neighbors survive, matching the exhaustive oracle") {
  const Toy t;
  const std::string msg = "exercise daily and exercise with friends";
  REQUIRE(t.graph.related_words("exercise").size() == 12);
  const auto out = suggest(msg, highlight({"exercise"}), t.scorer, t.ctx(), t.cfg);
  const auto& list = out.at("exercise");
  CHECK(terms(list) == std::vector<std::string>{"alpha", "bravo"});
  CHECK(terms(list) == oracle(t, msg, "exercise"));
  REQUIRE(list.size() == 2);
  CHECK(list[0].delta_quality_pct == 4.0);  // two occurrences replaced
  CHECK(list[0].delta_diversity_pct == 8.0);
  CHECK(list[0].gain == 4.0);
  CHECK_THAT(list[0].anchor_distance, WithinAbs(0.3, 1e-12));
  CHECK_THAT(list[0].corpus_distance, WithinAbs(std::acos(0.0), 1e-12));
  CHECK(list[0].relation == "RelatedTo");
  CHECK(list[0].source_token == "exercise");
}

TEST_CASE("toy graph: loosening each filter admits the expected neighbors") {
  Toy t;
  const std::string msg = "exercise with friends";
  t.cfg.top_k = 20;
  t.cfg.anchor_radius = 1.5;
  CHECK(terms(suggest(msg, highlight({"exercise"}), t.scorer, t.ctx(), t.cfg).at("exercise")) == oracle(t, msg, "exercise"));
  t.cfg.corpus_radius = 2.0;
  const auto all = terms(suggest(msg, highlight({"exercise"}), t.scorer, t.ctx(), t.cfg).at("exercise"));
  CHECK(all == oracle(t, msg, "exercise"));
  CHECK(all.size() == 8);  // every positive-weight neighbor except golf
  t.cfg.min_gain = 3.0;
  CHECK(terms(suggest(msg, highlight({"exercise"}), t.scorer, t.ctx(), t.cfg).at("exercise")) ==
        std::vector<std::string>{"echo", "foxtrot", "hotel", "india"});
}

TEST_CASE("corpus radius defaults to the context value") {
  Toy t;
  t.cfg.corpus_radius.reset();
  const auto out = suggest("exercise", highlight({"exercise"}), t.scorer, t.ctx(), t.cfg);
  // default 3.0 lets the corpus-filtered neighbors through
  CHECK(terms(out.at("exercise")) == std::vector<std::string>{"foxtrot", "india", "alpha"});
}

TEST_CASE("words with no or few related terms get no suggestions") {
  Toy t;
  const auto none = suggest("exercise near the lake", highlight({"lake"}), t.scorer, t.ctx(), t.cfg);
  REQUIRE(none.contains("lake"));
  CHECK(none.at("lake").empty());

  for (int i = 0; i < 9; ++i) t.graph.add({"RelatedTo", "lake", "pond" + std::to_string(i), 1.0});
  CHECK(suggest("lake", highlight({"lake"}), t.scorer, t.ctx(), t.cfg).at("lake").empty());

  // excluded relations do not count toward the minimum
  t.graph.add({"Synonym", "lake", "loch", 1.0});
  CHECK(suggest("lake", highlight({"lake"}), t.scorer, t.ctx(), t.cfg).at("lake").empty());
  t.cfg.relations = kg::RelationFilter::allow_all();
  t.cfg.anchor_terms.clear();
  t.cfg.corpus_radius = 10.0;
  t.scorer.weights["loch"] = 1.0;
  CHECK(terms(suggest("lake", highlight({"lake"}), t.scorer, t.ctx(), t.cfg).at("lake")) ==
        std::vector<std::string>{"loch"});
}

TEST_CASE("lookup uses the lemma first") {
  Toy t;
  for (const auto& c : kToy) t.graph.add({"RelatedTo", "walk", c.term, 1.0});
  t.scorer.weights["walking"] = 0.0;
  const auto out = suggest("walking with friends", highlight({"walking"}), t.scorer, t.ctx(), t.cfg);
  CHECK(terms(out.at("walking")) == std::vector<std::string>{"alpha", "bravo"});
  CHECK(related_terms_for(t.graph, "walking", {}).size() == 12);
  CHECK(related_terms_for(t.graph, "exercises", {}).size() == 12);
}

TEST_CASE("fixture graph suggestions satisfy every filter") {
  const auto graph = kg::KnowledgeGraph::ingest_file(testsupport::data_dir() / "kg_fixture.tsv");
  auto embedder = std::make_shared<text::HashEmbedder>();
  auto model = std::make_shared<scoring::QualityModel>(
      scoring::QualityModel::load(testsupport::data_dir() / "quality_model.json"));
  const auto seeds = testsupport::fixture_seeds();
  const auto snap = testsupport::snapshot_of({seeds.begin(), seeds.begin() + 50}, *embedder);
  const scoring::Scorer scorer(model, embedder, snap);
  const SuggestionContext ctx{graph, *embedder, snap->points(), snap->corpus_radius()};
  const SuggestionConfig cfg;
  std::vector<text::EmbeddingVector> anchors;
  for (const auto& a : cfg.anchor_terms) anchors.push_back(embedder->embed(a));

  std::size_t total = 0;
  for (const auto& msg : seeds) {
    for (auto kind : {ScoreKind::quality, ScoreKind::diversity}) {
      const auto attribution = attribute(msg, scorer, kind);
      const auto out = suggest(msg, attribution, scorer, ctx, cfg);
      const auto base = scorer(msg);
      for (const auto& [token, list] : out) {
        INFO(msg << " / " << token);
        CHECK(std::find(attribution.highlighted.begin(), attribution.highlighted.end(), token) !=
              attribution.highlighted.end());
        CHECK(list.size() <= 3);
        const auto related = related_terms_for(graph, token, cfg.relations);
        for (std::size_t i = 0; i < list.size(); ++i) {
          const auto& s = list[i];
          ++total;
          CHECK(related.size() >= 10);
          CHECK_FALSE(kg::default_excluded_relations().contains(s.relation));
          CHECK(std::any_of(related.begin(), related.end(),
                            [&](const kg::RelatedTerm& r) { return r.term == s.replacement_term; }));
          const auto z = embedder->embed(s.replacement_term);
          double mean = 0.0;
          for (const auto& p : snap->points()) mean += angle(z, p);
          mean /= static_cast<double>(snap->size());
          CHECK(mean <= snap->corpus_radius() + 1e-9);
          double nearest = 10.0;
          for (const auto& a : anchors) nearest = std::min(nearest, text::angular_distance(z, a));
          CHECK(nearest <= 1.2);
          const auto projected =
              scorer(text::replace_spans(msg, text::occurrences(text::tokenize(msg), token), s.replacement_term));
          CHECK(s.delta_quality_pct == projected.quality_pct - base.quality_pct);
          CHECK(s.delta_diversity_pct == projected.diversity_pct - base.diversity_pct);
          CHECK(s.gain > 0.0);
          if (i > 0) CHECK(list[i - 1].best_delta() >= s.best_delta());
        }
      }
    }
  }
  CHECK(total > 0);
}
