#pragma once

#include <memory>
#include <optional>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ideafeed/error.hpp"
#include "ideafeed/explain/score_function.hpp"
#include "ideafeed/service/feedback_service.hpp"

namespace ideafeed::service {

constexpr int http_status_for(Errc c) noexcept {
  switch (c) {
    case Errc::not_found: return 404;
    case Errc::iteration_out_of_order: return 409;
    case Errc::text_too_long: return 413;
    case Errc::prompts_exhausted: return 410;
    case Errc::compare_unavailable: return 400;
    case Errc::embedding_unavailable:
    case Errc::knowledge_graph_unavailable:
    case Errc::network_failure: return 503;
    case Errc::io_failure: return 500;
    case Errc::empty_corpus: return 409;
    default: return 400;
  }
}

inline void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, const Error& e) {
  send_json(res, http_status_for(e.code()), {{"error", errc_name(e.code())}, {"message", e.what()}});
}

/// Routes:
///   GET  /health
///   POST /sessions                                   {condition, seed?}
///   POST /sessions/:sid/prompts/next
///   POST /sessions/:sid/ideations                    {prompt_id, text, iteration, score?}
///   GET  /sessions/:sid/ideations/:iid/feedback      ?score=quality|diversity&compare=t
inline void mount_routes(httplib::Server& server, std::shared_ptr<FeedbackService> svc) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  auto guarded = [](auto fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const Error& e) {
        send_error(res, e);
      } catch (const nlohmann::json::exception& e) {
        send_json(res, 400, {{"error", "InvalidArgument"}, {"message", std::string("bad request body: ") + e.what()}});
      } catch (const std::exception& e) {
        send_json(res, 500, {{"error", "Internal"}, {"message", e.what()}});
      }
    };
  };

  auto body_of = [](const httplib::Request& req) {
    if (req.body.empty()) return nlohmann::json::object();
    auto j = nlohmann::json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(Errc::invalid_argument, "request body must be a JSON object");
    return j;
  };

  server.Get("/health", guarded([svc](const httplib::Request&, httplib::Response& res) {
               send_json(res, 200, svc->health());
             }));

  server.Post("/sessions", guarded([svc, body_of](const httplib::Request& req, httplib::Response& res) {
                const auto body = body_of(req);
                if (!body.contains("condition")) throw Error(Errc::invalid_argument, "missing field condition");
                std::optional<std::uint64_t> seed;
                if (body.contains("seed") && body["seed"].is_number_unsigned()) seed = body["seed"].get<std::uint64_t>();
                send_json(res, 201, svc->create_session(body["condition"].get<std::string>(), seed));
              }));

  server.Post("/sessions/:sid/prompts/next",
              guarded([svc](const httplib::Request& req, httplib::Response& res) {
                send_json(res, 200, svc->next_prompt(req.path_params.at("sid")));
              }));

  server.Post("/sessions/:sid/ideations", guarded([svc, body_of](const httplib::Request& req, httplib::Response& res) {
                const auto body = body_of(req);
                for (const char* field : {"prompt_id", "text", "iteration"})
                  if (!body.contains(field)) throw Error(Errc::invalid_argument, std::string("missing field ") + field);
                std::optional<explain::ScoreKind> score;
                if (body.contains("score")) score = explain::parse_score_kind(body["score"].get<std::string>());
                send_json(res, 201,
                          svc->submit(req.path_params.at("sid"), body["prompt_id"].get<std::size_t>(),
                                      body["text"].get<std::string>(), body["iteration"].get<int>(), score));
              }));

  server.Get("/sessions/:sid/ideations/:iid/feedback",
             guarded([svc](const httplib::Request& req, httplib::Response& res) {
               const auto kind = explain::parse_score_kind(
                   req.has_param("score") ? req.get_param_value("score")
                                          : std::string(explain::score_kind_name(svc->config().default_score)));
               std::optional<int> compare;
               if (req.has_param("compare")) {
                 const auto raw = req.get_param_value("compare");
                 try {
                   std::size_t used = 0;
                   compare = std::stoi(raw, &used);
                   if (used != raw.size()) throw std::invalid_argument(raw);
                 } catch (const std::logic_error&) {
                   throw Error(Errc::invalid_argument, "compare must be an iteration number");
                 }
               }
               send_json(res, 200,
                         svc->feedback(req.path_params.at("sid"), req.path_params.at("iid"), kind, compare));
             }));
}

}  // namespace ideafeed::service
