#include <catch_amalgamated.hpp>

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ideafeed/kg/knowledge_graph.hpp"
#include "ideafeed/kg/remote_source.hpp"
#include "support.hpp"

using namespace ideafeed;
using namespace ideafeed::kg;

namespace {

auto code_is(Errc c) {
  return Catch::Matchers::Predicate<Error>([c](const Error& e) { return e.code() == c; }, "error code");
}

KnowledgeGraph from_text(const std::string& tsv, IngestStats* stats = nullptr) {
  std::istringstream in(tsv);
  return KnowledgeGraph::ingest(in, stats);
}

std::vector<std::string> names(const std::vector<RelatedTerm>& r) {
  std::vector<std::string> out;
  for (const auto& x : r) out.push_back(x.term);
  return out;
}

const char* kFive =
    "# relation\tstart\tend\tweight\n"
    "RelatedTo\twalk\tstroll\t2.0\n"
    "IsA\twalk\texercise\t1.5\n"
    "UsedFor\tpark\twalk\t1.0\n"
    "Synonym\twalk\tamble\t3.0\n"
    "RelatedTo\tWalk\tlegs\t1.0\n";

}  // namespace

TEST_CASE("ingests a small edge list") {
  IngestStats stats;
  const auto g = from_text(kFive, &stats);
  CHECK(stats.edges == 5);
  CHECK(stats.lines == 5);
  CHECK(stats.comments == 1);
  CHECK(stats.malformed == 0);
  CHECK(g.edge_count() == 5);
  CHECK(g.term_count() == 6);
  // both directions, excluded relations dropped, weight then term order
  CHECK(names(g.related_words("walk")) == std::vector<std::string>{"stroll", "exercise", "legs", "park"});
  CHECK(names(g.related_words("WALK ", RelationFilter::allow_all())) ==
        std::vector<std::string>{"amble", "stroll", "exercise", "legs", "park"});
  CHECK(g.related_words("park")[0] == RelatedTerm{"walk", "UsedFor", 1.0});
  CHECK(g.related_words("nowhere").empty());
}

TEST_CASE("malformed lines are skipped and counted") {
  IngestStats stats;
  const auto g = from_text(std::string(kFive) + "RelatedTo\twalk\tjog\n" + "IsA\tx\ty\tNaN\n" +
                               "IsA\tx\ty\t-1\n" + "\t\ty\t1\n" + "IsA\tx\ty\t1\textra\n",
                           &stats);
  CHECK(stats.malformed == 5);
  CHECK(stats.edges == 5);
  CHECK(g.edge_count() == 5);
  CHECK_FALSE(KnowledgeGraph::parse_line("RelatedTo\twalk\tjog"));
  CHECK(KnowledgeGraph::parse_line("RelatedTo\twalk\tjog\t0.5")->weight == 0.5);
}

TEST_CASE("empty input and all-malformed input") {
  IngestStats stats;
  const auto empty = from_text("", &stats);
  CHECK(empty.edge_count() == 0);
  CHECK(stats.lines == 0);
  CHECK(from_text("# only a comment\n\n").edge_count() == 0);
  CHECK_THROWS_MATCHES(from_text("a\tb\nc\td\te\n"), Error, code_is(Errc::all_lines_malformed));
  CHECK_THROWS_MATCHES(KnowledgeGraph::ingest_file("/nonexistent/kg.tsv"), Error, code_is(Errc::io_failure));
}

TEST_CASE("duplicate keys keep the larger weight") {
  IngestStats stats;
  const auto g = from_text("RelatedTo\ta\tb\t1\nRelatedTo\ta\tb\t4\nRelatedTo\tA\tB\t2\nIsA\ta\tb\t3\n", &stats);
  CHECK(g.edge_count() == 2);
  CHECK(stats.duplicates == 2);
  const auto r = g.related_words("a");
  REQUIRE(r.size() == 1);
  CHECK(r[0] == RelatedTerm{"b", "RelatedTo", 4.0});
}

TEST_CASE("export round-trips and is canonical") {
  const auto g = KnowledgeGraph::ingest_file(testsupport::data_dir() / "kg_fixture.tsv");
  CHECK(g.edge_count() > 400);
  const auto tsv = g.to_tsv();
  const auto again = from_text(tsv);
  CHECK(again.to_tsv() == tsv);
  CHECK(again.edges() == g.edges());

  testsupport::TempDir dir("kg");
  std::ofstream(dir.path() / "copy.tsv") << tsv;
  CHECK(KnowledgeGraph::ingest_file(dir.path() / "copy.tsv").to_tsv() == tsv);
}

TEST_CASE("related words respect arbitrary relation filters") {
  const auto g = KnowledgeGraph::ingest_file(testsupport::data_dir() / "kg_fixture.tsv");
  std::set<std::string> relations;
  for (const auto& e : g.edges()) relations.insert(e.relation);
  Rng rng(12);
  const std::vector<std::string> probes{"walk", "dog", "exercise", "quick", "sofa", "heart"};
  for (int trial = 0; trial < 50; ++trial) {
    RelationFilter f = RelationFilter::allow_all();
    for (const auto& r : relations)
      if (rng.below(3) == 0) f.excluded.insert(r);
    for (const auto& term : probes) {
      const auto got = g.related_words(term, f);
      std::map<std::string, double> best;
      for (const auto& e : g.edges()) {
        if (f.excluded.contains(e.relation)) continue;
        std::string other;
        if (e.start == term) other = e.end;
        else if (e.end == term) other = e.start;
        else continue;
        if (other == term) continue;
        best[other] = std::max(best.count(other) ? best[other] : -1.0, e.weight);
      }
      REQUIRE(got.size() == best.size());
      for (const auto& r : got) {
        CHECK_FALSE(f.excluded.contains(r.relation));
        CHECK(best.at(r.term) == r.weight);
      }
      for (std::size_t i = 1; i < got.size(); ++i)
        CHECK((got[i - 1].weight > got[i].weight || (got[i - 1].weight == got[i].weight && got[i - 1].term < got[i].term)));
    }
  }
  CHECK(g.related_words("quick").empty());
  CHECK(g.related_words("sofa").size() == 3);
}

TEST_CASE("node URIs map to plain terms") {
  CHECK(term_from_node_uri("/c/en/musical_time/n") == "musical time");
  CHECK(term_from_node_uri("/c/en/Walk") == "walk");
  CHECK(term_from_node_uri("/c/fr/marcher").empty());
  const auto edges = parse_edge_lookup(nlohmann::json::parse(R"({"edges": [
    {"rel": {"label": "RelatedTo"}, "start": {"term": "/c/en/walk"}, "end": {"term": "/c/en/brisk_walk"}, "weight": 2.5},
    {"rel": {"label": "RelatedTo"}, "start": {"@id": "/c/en/walk/n"}, "end": {"@id": "/c/de/gehen"}, "weight": 1},
    {"rel": {"label": "IsA"}, "start": {"term": "/c/en/walk"}, "end": {"term": "/c/en/motion"}}
  ]})"));
  REQUIRE(edges.size() == 2);
  CHECK(edges[0] == KnowledgeEdge{"RelatedTo", "walk", "brisk walk", 2.5});
  CHECK(edges[1].weight == 1.0);
  CHECK(parse_edge_lookup(nlohmann::json::object()).empty());
}

namespace {

struct FakeConceptNet {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<int> calls{0};
  std::string last_node;

  FakeConceptNet() {
    server.Get("/query", [this](const httplib::Request& req, httplib::Response& res) {
      ++calls;
      last_node = req.get_param_value("node");
      nlohmann::json body{{"edges", nlohmann::json::array()}};
      if (last_node == "/c/en/jump_rope") {
        body["edges"].push_back({{"rel", {{"label", "RelatedTo"}}},
                                 {"start", {{"term", "/c/en/jump_rope"}}},
                                 {"end", {{"term", "/c/en/skipping"}}},
                                 {"weight", 1.5}});
        body["edges"].push_back({{"rel", {{"label", "UsedFor"}}},
                                 {"start", {{"term", "/c/en/jump_rope/n"}}},
                                 {"end", {{"term", "/c/en/cardio"}}},
                                 {"weight", 1.0}});
      }
      res.set_content(body.dump(), "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~FakeConceptNet() {
    server.stop();
    thread.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

}  // namespace

TEST_CASE("remote lookups are cached in the local snapshot") {
  FakeConceptNet fake;
  testsupport::TempDir dir("kgremote");
  const auto path = dir.path() / "kg.tsv";
  std::ofstream(path) << kFive;

  RemoteOptions opts{fake.url(), std::chrono::milliseconds(0), 50};
  {
    KnowledgeSource src(path, opts);
    // already in the snapshot: no network
    CHECK(src.fetch_remote("walk").size() == 5);
    CHECK(src.network_calls() == 0);
    CHECK(fake.calls == 0);

    const auto edges = src.fetch_remote("Jump Rope");
    CHECK(fake.calls == 1);
    CHECK(fake.last_node == "/c/en/jump_rope");
    CHECK(edges.size() == 2);
    CHECK(names(src.graph()->related_words("jump rope")) == std::vector<std::string>{"skipping", "cardio"});

    src.fetch_remote("jump rope");
    CHECK(fake.calls == 1);
  }
  // a fresh source sees the appended edges without calling out
  KnowledgeSource reopened(path, opts);
  CHECK(reopened.graph()->edge_count() == 7);
  CHECK(reopened.fetch_remote("jump rope").size() == 2);
  CHECK(fake.calls == 1);
}

TEST_CASE("remote lookups respect the minimum request spacing") {
  FakeConceptNet fake;
  testsupport::TempDir dir("kgspacing");
  KnowledgeSource src(dir.path() / "kg.tsv", RemoteOptions{fake.url(), std::chrono::milliseconds(150), 10});
  const auto t0 = std::chrono::steady_clock::now();
  src.fetch_remote("alpha");
  src.fetch_remote("beta");
  const auto elapsed = std::chrono::steady_clock::now() - t0;
  CHECK(fake.calls == 2);
  CHECK(elapsed >= std::chrono::milliseconds(150));
}

TEST_CASE("unreachable or unconfigured remote reports a network failure") {
  testsupport::TempDir dir("kgdown");
  KnowledgeSource offline(dir.path() / "kg.tsv");
  CHECK_THROWS_MATCHES(offline.fetch_remote("walk"), Error, code_is(Errc::network_failure));

  KnowledgeSource down(dir.path() / "kg.tsv", RemoteOptions{"http://127.0.0.1:1", std::chrono::milliseconds(0), 10});
  CHECK_THROWS_MATCHES(down.fetch_remote("walk"), Error, code_is(Errc::network_failure));
  CHECK(down.network_calls() == 1);
}
