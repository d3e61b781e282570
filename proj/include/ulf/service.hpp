#pragma once

#include <string>

#include <httplib.h>
#include <json.hpp>

#include "ulf/corpus.hpp"
#include "ulf/elsmatch.hpp"

namespace ulf {

inline json toJson(const AgreementReport& r) {
  json pairs = json::array();
  for (auto& [k, v] : r.pairwise) pairs.push_back({{"a", k.first}, {"b", k.second}, {"f1", v}});
  json ds = json::array();
  for (auto& d : r.diagnostics) ds.push_back(toJson(d));
  return {{"annotators", r.annotators},
          {"pairwise", pairs},
          {"overall", r.overall ? json(*r.overall) : json(nullptr)},
          {"certainOnly", r.certainOnly},
          {"diagnostics", ds}};
}

namespace detail {

inline int httpStatusFor(const std::string& code) {
  if (code == "UnknownSentence") return 404;
  if (code == "StaleWrite") return 409;
  if (code == "InvalidRecord" || code == "BadRequest") return 400;
  return 500;
}

inline void sendJson(httplib::Response& res, const json& j, int status = 200) {
  res.status = status;
  res.set_content(j.dump(), "application/json");
}

inline void sendError(httplib::Response& res, const std::string& code, const std::string& msg) {
  sendJson(res, {{"error", code}, {"message", msg}}, httpStatusFor(code));
}

template <class F>
auto guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const DiagnosticError& e) {
      sendError(res, e.code(), e.diagnostic().message);
    } catch (const json::exception& e) {
      sendError(res, "BadRequest", e.what());
    } catch (const std::exception& e) {
      sendError(res, "InternalError", e.what());
    }
  };
}

inline bool truthy(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return false;
  auto v = req.get_param_value(key);
  return v == "1" || v == "true" || v == "yes";
}

}  // namespace detail

// Routes used by the annotation interface.
//   GET  /sentences[?dataset=]
//   GET  /annotation/{id}[?author=]       {sentence, record|null, historyLength}
//   GET  /annotation/{id}/history
//   PUT  /annotation/{id}                 record JSON, optional "expectedVersion"
//   POST /check                           body is ULF text
//   GET  /stats[?format=text]
//   GET  /ia[?certainOnly=1]
inline void mountRoutes(httplib::Server& srv, CorpusStore& store) {
  using namespace detail;
  srv.Get("/sentences", guarded([&](const httplib::Request& req, httplib::Response& res) {
            json out = json::array();
            for (auto& s : store.sentences(req.has_param("dataset") ? req.get_param_value("dataset") : ""))
              out.push_back({{"id", s.id}, {"dataset", s.dataset}, {"text", s.text}});
            sendJson(res, out);
          }));

  srv.Get(R"(/annotation/([^/]+)/history)", guarded([&](const httplib::Request& req, httplib::Response& res) {
            std::string id = req.matches[1];
            if (!store.sentence(id)) fail("UnknownSentence", "no sentence with id '" + id + "'");
            json out = json::array();
            for (auto& r : store.history(id)) out.push_back(toJson(r));
            sendJson(res, out);
          }));

  srv.Get(R"(/annotation/([^/]+))", guarded([&](const httplib::Request& req, httplib::Response& res) {
            std::string id = req.matches[1];
            auto s = store.sentence(id);
            if (!s) fail("UnknownSentence", "no sentence with id '" + id + "'");
            auto r = store.latest(id, req.has_param("author") ? req.get_param_value("author") : "");
            sendJson(res, {{"sentence", {{"id", s->id}, {"dataset", s->dataset}, {"text", s->text}}},
                           {"record", r ? toJson(*r) : json(nullptr)},
                           {"historyLength", store.history(id).size()}});
          }));

  srv.Put(R"(/annotation/([^/]+))", guarded([&](const httplib::Request& req, httplib::Response& res) {
            auto j = json::parse(req.body);
            if (!j.is_object()) fail("InvalidRecord", "body must be a JSON object");
            j["sentenceId"] = std::string(req.matches[1]);
            std::optional<int> expected;
            if (j.contains("expectedVersion")) {
              if (!j["expectedVersion"].is_number_integer()) fail("InvalidRecord", "expectedVersion must be an integer");
              expected = j["expectedVersion"].get<int>();
            }
            sendJson(res, toJson(store.upsert(recordFromJson(j), expected)));
          }));

  srv.Post("/check", guarded([&](const httplib::Request& req, httplib::Response& res) {
             sendJson(res, liveCheck(req.body));
           }));

  srv.Get("/stats", guarded([&](const httplib::Request& req, httplib::Response& res) {
            auto t = store.stats();
            if (req.has_param("format") && req.get_param_value("format") == "text")
              res.set_content(renderStats(t), "text/plain");
            else
              sendJson(res, toJson(t));
          }));

  srv.Get("/ia", guarded([&](const httplib::Request& req, httplib::Response& res) {
            sendJson(res, toJson(agreementMatrix(store.annotatorCorpus(), truthy(req, "certainOnly"))));
          }));
}

}  // namespace ulf
