#include <catch_amalgamated.hpp>

#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ideafeed/text/embedding.hpp"
#include "ideafeed/text/remote_embedder.hpp"
#include "support.hpp"

using namespace ideafeed;
using namespace ideafeed::text;
using Catch::Matchers::WithinAbs;

TEST_CASE("hash primitives match published test vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
}

TEST_CASE("embedding is deterministic and unit norm") {
  const HashEmbedder e;
  const auto a = e.embed("Walk the dog every morning");
  const auto b = e.embed("Walk the dog every morning");
  CHECK(a == b);
  CHECK(angular_distance(a, b) == 0.0);
  CHECK_THAT(a.norm(), WithinAbs(1.0, 1e-9));
  CHECK(a.dimension() == 64);
  CHECK_FALSE(a.degenerate);
}

TEST_CASE("empty and all-stop-word text map to flagged e_1") {
  const HashEmbedder e;
  for (const char* s : {"", "the and of to", "   "}) {
    const auto v = e.embed(s);
    CHECK(v.degenerate);
    CHECK(v.values[0] == 1.0);
    CHECK(v.norm() == 1.0);
  }
}

TEST_CASE("fixture vocabulary of 100 words embeds to distinct vectors at D=64") {
  const HashEmbedder e(64, 4);
  const auto words = corpus::read_lines(testsupport::test_dir() / "fixtures" / "vocabulary.txt");
  REQUIRE(words.size() == 100);
  std::vector<EmbeddingVector> vecs;
  for (const auto& w : words) vecs.push_back(e.embed(w));
  for (std::size_t i = 0; i < vecs.size(); ++i)
    for (std::size_t j = i + 1; j < vecs.size(); ++j) {
      INFO(words[i] << " vs " << words[j]);
      CHECK(vecs[i] != vecs[j]);
      CHECK(angular_distance(vecs[i], vecs[j]) > 0.0);
    }
}

TEST_CASE("two-word text is the normalized sum of its token vectors, in any order") {
  const HashEmbedder e;
  const auto words = corpus::read_lines(testsupport::test_dir() / "fixtures" / "vocabulary.txt");
  for (std::size_t i = 0; i + 1 < words.size(); i += 7) {
    const auto& w1 = words[i];
    const auto& w2 = words[i + 1];
    std::vector<double> sum(64, 0.0);
    for (const auto& w : {w1, w2})
      for (const auto& p : token_probes(w, 64, 4)) sum[p.index] += p.sign;
    const auto expected = normalize(sum);
    const auto forward = e.embed(w1 + " " + w2);
    const auto backward = e.embed(w2 + " " + w1);
    CHECK(forward == backward);
    for (std::size_t k = 0; k < 64; ++k) CHECK_THAT(forward.values[k], WithinAbs(expected.values[k], 1e-15));
    // single-word embeddings share the same norm, so they add the same way
    const auto a = e.embed(w1), b = e.embed(w2);
    std::vector<double> ab(64);
    for (std::size_t k = 0; k < 64; ++k) ab[k] = a.values[k] + b.values[k];
    const auto via_words = normalize(ab);
    for (std::size_t k = 0; k < 64; ++k) CHECK_THAT(forward.values[k], WithinAbs(via_words.values[k], 1e-15));
  }
}

TEST_CASE("stop words do not change the embedding") {
  const HashEmbedder e;
  CHECK(e.embed("walk the dog") == e.embed("walk dog"));
}

TEST_CASE("probes are distinct buckets") {
  for (std::size_t k : {1u, 4u, 8u}) {
    const auto probes = token_probes("exercise", 16, k);
    REQUIRE(probes.size() == k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) CHECK(probes[i].index != probes[j].index);
  }
}

TEST_CASE("angular distance basics") {
  const std::vector<double> u{1, 0, 0}, v{0, 1, 0}, w{-1, 0, 0};
  CHECK(angular_distance(u, u) == 0.0);
  CHECK_THAT(angular_distance(u, v), WithinAbs(std::numbers::pi / 2, 1e-15));
  CHECK(angular_distance(u, w) == std::numbers::pi);
  CHECK(angular_distance(v, u) == angular_distance(u, v));
  // dot slightly beyond +/-1 from rounding
  const std::vector<double> over{1.0 + 1e-12, 0, 0};
  CHECK(angular_distance(u, over) == 0.0);
  const std::vector<double> under{-1.0 - 1e-12, 0, 0};
  CHECK(angular_distance(u, under) == std::numbers::pi);
  const std::vector<double> four{1, 0, 0, 0};
  CHECK_THROWS_MATCHES(angular_distance(u, four), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return e.code() == Errc::dimension_mismatch; }));
}

TEST_CASE("embedder config validation") {
  EmbedderConfig cfg;
  cfg.dimension = 4;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.dimension = 64;
  cfg.backend = EmbedderBackend::external_service;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.service_endpoint = "http://127.0.0.1:1";
  CHECK_NOTHROW(cfg.validate());
}

namespace {

struct FakeEncoder {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<int> calls{0};
  std::size_t dim = 8;

  FakeEncoder() {
    server.Post("/v1/embed", [this](const httplib::Request& req, httplib::Response& res) {
      ++calls;
      const auto body = nlohmann::json::parse(req.body);
      nlohmann::json out{{"dim", dim}, {"vectors", nlohmann::json::array()}};
      for (const auto& t : body["texts"]) {
        std::vector<double> v(dim, 0.0);
        v[t.get<std::string>().size() % dim] = 3.0;
        out["vectors"].push_back(v);
      }
      res.set_content(out.dump(), "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~FakeEncoder() {
    server.stop();
    thread.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port) + "/v1"; }
};

}  // namespace

TEST_CASE("remote embedder speaks the embed protocol and caches responses") {
  FakeEncoder fake;
  testsupport::TempDir dir("embcache");
  EmbedderConfig cfg;
  cfg.backend = EmbedderBackend::external_service;
  cfg.dimension = 8;
  cfg.service_endpoint = fake.url();
  cfg.cache_path = (dir.path() / "cache.jsonl").string();

  {
    const auto e = make_embedder(cfg);
    const auto v = e->embed("hello");
    CHECK(v.values[5] == 1.0);
    CHECK(v.norm() == 1.0);
    CHECK(fake.calls == 1);
    CHECK(e->embed("hello") == v);
    CHECK(fake.calls == 1);
    const auto d = e->embed("the");  // stop words only: no request
    CHECK(d.degenerate);
    CHECK(fake.calls == 1);
  }
  {
    const auto e = make_embedder(cfg);  // cache survives a restart
    CHECK(e->embed("hello").values[5] == 1.0);
    CHECK(fake.calls == 1);
  }
  std::ifstream in(dir.path() / "cache.jsonl");
  std::string line;
  std::getline(in, line);
  const auto rec = nlohmann::json::parse(line);
  CHECK(rec["text"] == "hello");
  CHECK(rec["backend"] == "external-service:" + fake.url());
}

TEST_CASE("remote embedder errors") {
  FakeEncoder fake;
  EmbedderConfig cfg;
  cfg.backend = EmbedderBackend::external_service;
  cfg.dimension = 16;
  cfg.service_endpoint = fake.url();
  const auto wrong_dim = make_embedder(cfg);
  CHECK_THROWS_MATCHES(wrong_dim->embed("hello"), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return e.code() == Errc::dimension_mismatch; }));

  cfg.dimension = 8;
  cfg.service_endpoint = "http://127.0.0.1:1";
  const auto down = make_embedder(cfg);
  CHECK_THROWS_MATCHES(down->embed("hello"), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return e.code() == Errc::embedding_unavailable; }));
}
