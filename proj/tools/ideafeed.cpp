#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ideafeed/condition.hpp"
#include "ideafeed/corpus/corpus_store.hpp"
#include "ideafeed/corpus/prompts.hpp"
#include "ideafeed/error.hpp"
#include "ideafeed/explain/attribution.hpp"
#include "ideafeed/explain/contrastive.hpp"
#include "ideafeed/explain/counterfactual.hpp"
#include "ideafeed/explain/payload.hpp"
#include "ideafeed/kg/knowledge_graph.hpp"
#include "ideafeed/metrics/diversity.hpp"
#include "ideafeed/scoring/quality_model.hpp"
#include "ideafeed/scoring/scorer.hpp"
#include "ideafeed/service/config.hpp"
#include "ideafeed/service/feedback_service.hpp"
#include "ideafeed/service/http_api.hpp"
#include "ideafeed/text/remote_embedder.hpp"

#ifndef IDEAFEED_DEFAULT_DATA_DIR
#define IDEAFEED_DEFAULT_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ideafeed;

namespace {

enum Exit { ok = 0, usage = 2, data = 3, dependency = 4 };

int exit_code_for(Errc c) {
  switch (c) {
    case Errc::invalid_argument:
    case Errc::invalid_condition: return usage;
    case Errc::embedding_unavailable:
    case Errc::knowledge_graph_unavailable:
    case Errc::network_failure: return dependency;
    default: return data;
  }
}

struct Common {
  std::string data_dir = IDEAFEED_DEFAULT_DATA_DIR;
  std::string config_path;
  std::string model_path;
  std::string kg_path;
  std::string corpus_dir;
  std::string prompts_path;
  std::optional<std::uint64_t> seed;
  std::string format = "json";

  fs::path resolve(const std::string& explicit_path, const char* name) const {
    return explicit_path.empty() ? fs::path(data_dir) / name : fs::path(explicit_path);
  }
  fs::path config() const { return resolve(config_path, "config.json"); }
  fs::path model() const { return resolve(model_path, "quality_model.json"); }
  fs::path kg() const { return resolve(kg_path, "kg_fixture.tsv"); }
  fs::path corpus() const { return resolve(corpus_dir, "corpus"); }
  fs::path prompts() const { return resolve(prompts_path, "prompts.txt"); }

  service::ServiceConfig load_config() const {
    auto cfg = fs::exists(config()) ? service::ServiceConfig::load(config()) : service::ServiceConfig{};
    if (seed) cfg.seed = *seed;
    return cfg;
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// Everything a scoring command needs, loaded from the data directory.
struct Engine {
  service::ServiceConfig config;
  std::shared_ptr<const text::Embedder> embedder;
  std::shared_ptr<corpus::CorpusStore> store;
  std::shared_ptr<const scoring::QualityModel> model;

  Engine(const Common& common, bool need_model = true)
      : config(common.load_config()), embedder(text::make_embedder(config.embedder)),
        store(std::make_shared<corpus::CorpusStore>(common.corpus(), embedder)) {
    if (need_model) model = std::make_shared<const scoring::QualityModel>(scoring::QualityModel::load(common.model()));
  }

  scoring::Scorer scorer(Condition c) const { return {model, embedder, store->snapshot(c)}; }
};

std::shared_ptr<const kg::KnowledgeGraph> load_graph(const Common& common) {
  const auto path = common.kg();
  if (!fs::exists(path)) throw Error(Errc::knowledge_graph_unavailable, "no knowledge graph at " + path.string());
  return std::make_shared<const kg::KnowledgeGraph>(kg::KnowledgeGraph::ingest_file(path));
}

void print_score_csv(const scoring::ScorePair& s) {
  std::cout << "quality_pct,diversity_pct,diversity_raw,display_diversity_pct,degenerate\n"
            << num(s.quality_pct) << ',' << num(s.diversity_pct) << ',' << num(s.diversity_raw) << ','
            << num(s.display_diversity_pct) << ',' << (s.degenerate ? "true" : "false") << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ideafeed: score ideation messages and explain the scores"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--data-dir", common.data_dir, "Directory holding config, model, graph, corpus, prompts");
  app.add_option("--config", common.config_path, "Config file (default <data-dir>/config.json)");
  app.add_option("--model", common.model_path, "Quality model file");
  app.add_option("--kg", common.kg_path, "Knowledge graph TSV");
  app.add_option("--corpus-dir", common.corpus_dir, "Corpus store directory");
  app.add_option("--prompts", common.prompts_path, "Prompt phrase file");
  app.add_option("--seed", common.seed, "Random seed");
  app.add_option("--format", common.format, "Output format")->check(CLI::IsMember({"json", "csv"}));

  std::string text_arg, score_arg = "diversity", condition_arg = "SAXC", compare_with;

  // train
  auto* train = app.add_subcommand("train", "Train the quality model with k-fold cross-validation");
  std::string train_data, train_out;
  std::optional<std::size_t> folds;
  train->add_option("--data", train_data, "Training JSONL (default <data-dir>/training_fixture.jsonl)");
  train->add_option("--out", train_out, "Model output path (default --model)");
  train->add_option("--folds", folds, "Number of folds");

  // score / explain / suggest
  auto* score = app.add_subcommand("score", "Score one message against a condition's corpus");
  score->add_option("--text", text_arg, "Message")->required();
  score->add_option("--condition", condition_arg, "Corpus condition");

  auto* explain_cmd = app.add_subcommand("explain", "Attribution (or contrastive) explanation for a message");
  explain_cmd->add_option("--text", text_arg, "Message")->required();
  explain_cmd->add_option("--score", score_arg, "diversity or quality")->check(CLI::IsMember({"diversity", "quality"}));
  explain_cmd->add_option("--condition", condition_arg, "Corpus condition");
  explain_cmd->add_option("--compare-with", compare_with, "Earlier version of the message (contrastive mode)");

  auto* suggest_cmd = app.add_subcommand("suggest", "Counterfactual word suggestions for a message");
  suggest_cmd->add_option("--text", text_arg, "Message")->required();
  suggest_cmd->add_option("--score", score_arg, "diversity or quality")->check(CLI::IsMember({"diversity", "quality"}));
  suggest_cmd->add_option("--condition", condition_arg, "Corpus condition");

  // metrics
  auto* metrics_cmd = app.add_subcommand("metrics", "Corpus diversity metrics, optionally bootstrapped");
  std::size_t boot_samples = 0;
  metrics_cmd->add_option("--condition", condition_arg, "Corpus condition")->required();
  metrics_cmd->add_option("--bootstrap", boot_samples, "Number of bootstrap samples (0 = none)");

  // ingest-kg
  auto* ingest = app.add_subcommand("ingest-kg", "Validate an edge file and write a normalized snapshot");
  std::string ingest_in, ingest_out;
  ingest->add_option("--input", ingest_in, "Edge TSV (relation, start, end, weight)")->required();
  ingest->add_option("--output", ingest_out, "Normalized TSV output");

  // init-corpus
  auto* init = app.add_subcommand("init-corpus", "Initialize per-condition corpora from seed messages");
  std::string seeds_path, init_condition = "all";
  std::optional<std::size_t> init_n;
  bool init_shuffle = false;
  init->add_option("--seeds", seeds_path, "Seed message file (default <data-dir>/seeds.txt)");
  init->add_option("--condition", init_condition, "Condition or 'all'");
  init->add_option("--n", init_n, "Number of seed messages");
  init->add_flag("--shuffle", init_shuffle, "Pick seeds at random using --seed");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP feedback service");
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ok : usage;
  }

  const bool csv = common.format == "csv";
  try {
    if (*train) {
      const auto cfg = common.load_config();
      auto opts = cfg.training;
      opts.seed = cfg.seed;
      if (folds) opts.folds = *folds;
      const auto data_path = train_data.empty() ? fs::path(common.data_dir) / "training_fixture.jsonl" : fs::path(train_data);
      const auto examples = scoring::load_training_jsonl(data_path, opts.threshold);
      const auto embedder = text::make_embedder(cfg.embedder);
      auto result = scoring::train_quality(examples, *embedder, opts);
      const auto out = train_out.empty() ? common.model() : fs::path(train_out);
      result.model.save(out);
      if (csv) {
        std::cout << "fold,auc\n";
        for (std::size_t i = 0; i < result.fold_aucs.size(); ++i) std::cout << i + 1 << ',' << num(result.fold_aucs[i]) << '\n';
        std::cout << "mean," << num(result.mean_auc) << '\n';
      } else {
        std::cout << json{{"fold_aucs", result.fold_aucs},
                          {"mean_auc", result.mean_auc},
                          {"examples", examples.size()},
                          {"model", out.string()},
                          {"model_hash", result.model.hash()}}
                         .dump(2)
                  << '\n';
      }
    } else if (*score) {
      const Engine engine(common);
      const auto s = engine.scorer(parse_condition(condition_arg))(text_arg);
      if (csv)
        print_score_csv(s);
      else
        std::cout << json{{"quality_pct", s.quality_pct},
                          {"diversity_pct", s.diversity_pct},
                          {"diversity_raw", s.diversity_raw},
                          {"display_diversity_pct", s.display_diversity_pct},
                          {"degenerate", s.degenerate}}
                         .dump(2)
                  << '\n';
    } else if (*explain_cmd) {
      const Engine engine(common);
      const auto scorer = engine.scorer(parse_condition(condition_arg));
      const auto kind = explain::parse_score_kind(score_arg);
      if (!compare_with.empty()) {
        const auto c = explain::contrast_texts(compare_with, text_arg, scorer, kind);
        if (csv) {
          std::cout << "kind,token,raw_benefit,benefit\n";
          for (const auto& e : c.edits)
            std::cout << explain::edit_kind_name(e.kind) << ',' << csv_field(e.token) << ',' << num(e.raw_benefit)
                      << ',' << num(e.benefit) << '\n';
        } else {
          std::cout << explain::contrast_json(c).dump(2) << '\n';
        }
      } else {
        const auto a = explain::attribute(text_arg, scorer, kind);
        if (csv) {
          std::cout << "token,raw,change_priority,sub_score,highlighted\n";
          for (const auto& e : a.entries) {
            const bool hl = std::find(a.highlighted.begin(), a.highlighted.end(), e.token) != a.highlighted.end();
            std::cout << csv_field(e.token) << ',' << num(e.raw) << ',' << num(e.change_priority) << ','
                      << num(e.sub_score()) << ',' << (hl ? "true" : "false") << '\n';
          }
        } else {
          std::cout << explain::attribution_json(a).dump(2) << '\n';
        }
      }
    } else if (*suggest_cmd) {
      const Engine engine(common);
      const auto graph = load_graph(common);
      const auto scorer = engine.scorer(parse_condition(condition_arg));
      const auto kind = explain::parse_score_kind(score_arg);
      const auto a = explain::attribute(text_arg, scorer, kind);
      const auto& snapshot = scorer.corpus();
      const explain::SuggestionContext ctx{*graph, *engine.embedder, snapshot.points(), snapshot.corpus_radius()};
      const auto m = explain::suggest(text_arg, a, scorer, ctx, engine.config.suggestions);
      if (csv) {
        std::cout << "token,term,relation,dq,dd,gain\n";
        for (const auto& [token, list] : m)
          for (const auto& s : list)
            std::cout << csv_field(token) << ',' << csv_field(s.replacement_term) << ',' << s.relation << ','
                      << num(s.delta_quality_pct) << ',' << num(s.delta_diversity_pct) << ',' << num(s.gain) << '\n';
      } else {
        std::cout << json{{"highlighted", a.highlighted}, {"suggestions", explain::suggestions_json(m)}}.dump(2)
                  << '\n';
      }
    } else if (*metrics_cmd) {
      const Engine engine(common, false);
      const auto condition = parse_condition(condition_arg);
      const auto snapshot = engine.store->snapshot(condition);
      std::vector<std::string> all, seeds, added;
      for (const auto& e : snapshot->entries()) {
        all.push_back(e.text);
        (e.iteration == 0 ? seeds : added).push_back(e.text);
      }
      const std::uint64_t seed = common.seed.value_or(engine.config.seed);
      std::vector<metrics::MetricReport> reports;
      for (auto metric : {metrics::MetricKind::dispersion_sum, metrics::MetricKind::dispersion_mean,
                          metrics::MetricKind::disparity, metrics::MetricKind::repeller_chamfer}) {
        const bool chamfer = metric == metrics::MetricKind::repeller_chamfer;
        if (chamfer && (added.empty() || seeds.empty())) continue;
        const std::vector<std::string>& points = chamfer ? added : all;
        const std::vector<std::string> none;
        if (boot_samples > 0) {
          reports.push_back(metrics::bootstrap(metric, points, chamfer ? seeds : none, *engine.embedder,
                                               {boot_samples, seed, 0}));
        } else {
          const auto p = engine.embedder->embed_batch(points);
          const auto q = engine.embedder->embed_batch(chamfer ? seeds : none);
          reports.push_back({metric, metrics::evaluate(metric, p, q), p.size(), std::nullopt});
        }
      }
      if (csv) {
        std::cout << "metric,condition,value,n,boot_mean,boot_stderr,seed\n";
        for (const auto& r : reports) {
          std::cout << metrics::metric_name(r.metric) << ',' << condition_name(condition) << ',' << num(r.value) << ','
                    << r.n_points << ',';
          if (r.bootstrap)
            std::cout << num(r.bootstrap->mean) << ',' << num(r.bootstrap->std_error) << ',' << r.bootstrap->seed;
          else
            std::cout << ",,";
          std::cout << '\n';
        }
      } else {
        auto out = json::array();
        for (const auto& r : reports) {
          json row{{"metric", metrics::metric_name(r.metric)},
                   {"condition", condition_name(condition)},
                   {"value", r.value},
                   {"n", r.n_points},
                   {"corpus_version", snapshot->version()}};
          if (r.bootstrap)
            row["bootstrap"] = {{"n_samples", r.bootstrap->n_samples},
                                {"mean", r.bootstrap->mean},
                                {"stderr", r.bootstrap->std_error},
                                {"seed", r.bootstrap->seed}};
          out.push_back(row);
        }
        std::cout << out.dump(2) << '\n';
      }
    } else if (*ingest) {
      kg::IngestStats stats;
      const auto graph = kg::KnowledgeGraph::ingest_file(ingest_in, &stats);
      if (!ingest_out.empty()) {
        std::ofstream out(ingest_out, std::ios::trunc);
        if (!out) throw Error(Errc::io_failure, "cannot write " + ingest_out);
        graph.export_tsv(out);
      }
      if (csv)
        std::cout << "lines,edges,malformed,duplicates,comments,terms\n"
                  << stats.lines << ',' << stats.edges << ',' << stats.malformed << ',' << stats.duplicates << ','
                  << stats.comments << ',' << graph.term_count() << '\n';
      else
        std::cout << json{{"lines", stats.lines},
                          {"edges", stats.edges},
                          {"malformed", stats.malformed},
                          {"duplicates", stats.duplicates},
                          {"comments", stats.comments},
                          {"terms", graph.term_count()}}
                         .dump(2)
                  << '\n';
    } else if (*init) {
      const Engine engine(common, false);
      const auto seeds = corpus::read_lines(seeds_path.empty() ? fs::path(common.data_dir) / "seeds.txt" : fs::path(seeds_path));
      const std::size_t n = init_n.value_or(engine.config.corpus_size);
      std::vector<Condition> targets;
      if (init_condition == "all")
        targets.assign(kAllConditions.begin(), kAllConditions.end());
      else
        targets.push_back(parse_condition(init_condition));
      std::optional<std::uint64_t> shuffle;
      if (init_shuffle) shuffle = common.seed.value_or(engine.config.seed);
      json out = json::object();
      for (auto c : targets) {
        const auto snap = engine.store->init_corpus(c, seeds, n, shuffle);
        out[std::string(condition_name(c))] = {{"records", snap->size()}, {"version", snap->version()}};
      }
      std::cout << out.dump(2) << '\n';
    } else if (*serve) {
      const Engine engine(common);
      auto svc = std::make_shared<service::FeedbackService>(engine.config, engine.model, load_graph(common),
                                                            engine.store, corpus::PromptSet::load(common.prompts()));
      httplib::Server server;
      service::mount_routes(server, svc);
      std::cerr << "listening on http://" << host << ':' << port << '\n';
      if (!server.listen(host, port)) {
        std::cerr << "error: cannot bind " << host << ':' << port << '\n';
        return dependency;
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << errc_name(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return data;
  }
  return ok;
}
