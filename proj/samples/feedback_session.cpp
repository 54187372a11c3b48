// Drives one ideation through three iterations in-process and prints each
// feedback payload. Uses a throwaway copy of the bundled corpus.
#include <filesystem>
#include <iostream>
#include <memory>

#include "ideafeed/corpus/corpus_store.hpp"
#include "ideafeed/corpus/prompts.hpp"
#include "ideafeed/service/feedback_service.hpp"
#include "ideafeed/text/remote_embedder.hpp"

#ifndef IDEAFEED_DEFAULT_DATA_DIR
#define IDEAFEED_DEFAULT_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using namespace ideafeed;

int main(int argc, char** argv) {
  const fs::path data = argc > 1 ? argv[1] : IDEAFEED_DEFAULT_DATA_DIR;
  const fs::path work = fs::temp_directory_path() / "ideafeed-sample-corpus";
  fs::remove_all(work);

  auto config = service::ServiceConfig::load(data / "config.json");
  auto embedder = text::make_embedder(config.embedder);
  auto store = std::make_shared<corpus::CorpusStore>(work, embedder);
  store->init_corpus(Condition::SAXC, corpus::read_lines(data / "seeds.txt"), config.corpus_size);

  auto model = std::make_shared<const scoring::QualityModel>(scoring::QualityModel::load(data / "quality_model.json"));
  auto graph = std::make_shared<const kg::KnowledgeGraph>(kg::KnowledgeGraph::ingest_file(data / "kg_fixture.tsv"));
  service::FeedbackService svc(config, model, graph, store, corpus::PromptSet::load(data / "prompts.txt"));

  const auto session = svc.create_session("SAXC", 1);
  const std::string sid = session["session_id"];
  const std::size_t prompt = session["first_prompt"]["prompt_id"];
  std::cout << "prompt: " << session["first_prompt"]["text"].get<std::string>() << "\n\n";

  const char* drafts[] = {
      "Walk your dog every day.",
      "Walk your dog in the park every morning and enjoy the fresh air.",
      "Take your dog for a brisk walk in the park every morning and feel your energy rise.",
  };
  for (int it = 1; it <= 3; ++it) {
    const auto r = svc.submit(sid, prompt, drafts[it - 1], it);
    std::cout << "iteration " << it << " (" << r["default_view"].get<std::string>() << ")\n"
              << r["payload"].dump(2) << "\n\n";
  }
  std::cout << svc.health().dump(2) << '\n';
  fs::remove_all(work);
}
