#include "litrag/service.hpp"

#include <cstdio>
#include <filesystem>

#include <httplib.h>

#include "litrag/ingest.hpp"
#include "litrag/qa.hpp"
#include "litrag/research.hpp"
#include "litrag/serialize.hpp"

namespace litrag {

const char* to_string(ApiErrorCode code) {
  switch (code) {
    case ApiErrorCode::kBadRequest: return "bad_request";
    case ApiErrorCode::kProviderUnavailable: return "provider_unavailable";
    case ApiErrorCode::kStoreUnavailable: return "store_unavailable";
    case ApiErrorCode::kInternal: return "internal";
  }
  return "internal";
}

Service::Service(ServiceConfig config, std::shared_ptr<VectorStore> store, std::shared_ptr<TextProvider> llm,
                 std::shared_ptr<EmbeddingProvider> embedder, std::shared_ptr<CompoundProvider> compounds)
    : config_(std::move(config)),
      store_(std::move(store)),
      llm_(std::move(llm)),
      embedder_(std::move(embedder)),
      compounds_(std::move(compounds)) {
  validate(config_);
  if (store_->dimension() != config_.dimension) {
    throw ConfigError("store dimension " + std::to_string(store_->dimension()) + " does not match configured " +
                      std::to_string(config_.dimension));
  }
  if (embedder_->dimension() != config_.dimension) {
    throw ConfigError("embedder dimension " + std::to_string(embedder_->dimension()) + " does not match configured " +
                      std::to_string(config_.dimension));
  }
}

Service::~Service() = default;

ApiResult Service::error(ApiErrorCode code, const std::string& message, int status, nlohmann::json extra) {
  char id[32];
  std::snprintf(id, sizeof id, "req-%06lu", next_request_id_++);
  json body{{"error", {{"code", to_string(code)}, {"message", message}, {"request_id", id}}}};
  if (!extra.is_null()) body.update(extra);
  return {status, std::move(body)};
}

namespace {

json parse_body(const std::string& body) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("request body is not valid JSON: ") + e.what());
  }
}

QAOptions qa_options(const ServiceConfig& c) {
  QAOptions o;
  o.prompt_budget = c.prompt_budget;
  o.domain_topic = c.domain_topic;
  return o;
}

}  // namespace

ApiResult Service::qa(const std::string& body) {
  try {
    const auto request = qa_request_from_json(parse_body(body), config_.search);
    const auto snap = store_->snapshot();
    auto response = answer_query(request, QADeps{*snap, *llm_, *embedder_, compounds_.get(), qa_options(config_)});
    return {200, json(response)};
  } catch (const ValidationError& e) {
    return error(ApiErrorCode::kBadRequest, e.what(), 400);
  } catch (const AnswerError& e) {
    return error(ApiErrorCode::kProviderUnavailable, e.what(), 502, json{{"partial", e.partial()}});
  } catch (const ProviderError& e) {
    return error(ApiErrorCode::kProviderUnavailable, e.what(), 502);
  } catch (const std::exception& e) {
    return error(ApiErrorCode::kInternal, e.what(), 500);
  }
}

ApiResult Service::research(const std::string& body) {
  try {
    const auto request = research_request_from_json(parse_body(body), config_.search);
    const auto snap = store_->snapshot();
    auto report = run_research(request, ResearchDeps{*snap, *llm_, *embedder_, compounds_.get(), qa_options(config_),
                                                     config_.research_parallelism});
    return {200, json(report)};
  } catch (const ValidationError& e) {
    return error(ApiErrorCode::kBadRequest, e.what(), 400);
  } catch (const ProviderError& e) {
    return error(ApiErrorCode::kProviderUnavailable, e.what(), 502);
  } catch (const std::exception& e) {
    return error(ApiErrorCode::kInternal, e.what(), 500);
  }
}

ApiResult Service::ingest(const std::string& body) {
  try {
    const auto j = parse_body(body);
    std::vector<ManifestEntry> entries;
    if (j.contains("manifest") && j["manifest"].is_string()) {
      entries = load_manifest(j["manifest"].get<std::string>());
    } else if (j.contains("documents")) {
      entries = parse_manifest(j.dump(), std::filesystem::current_path());
    } else {
      throw ValidationError("expected \"manifest\" (path) or \"documents\" (entries)");
    }
    IngestOptions options;
    options.max_questions = config_.max_questions;
    options.min_chunk_chars = config_.min_chunk_chars;

    std::lock_guard lock(ingest_mutex_);
    const auto summary = ingest_documents(entries, *store_, *llm_, *embedder_, options);
    if (!config_.store_path.empty()) store_->persist(config_.store_path);
    json out = summary;
    out["status"] = "completed";
    out["store"] = store_->stats();
    return {200, out};
  } catch (const ValidationError& e) {
    return error(ApiErrorCode::kBadRequest, e.what(), 400);
  } catch (const ProviderError& e) {
    return error(ApiErrorCode::kProviderUnavailable, e.what(), 502);
  } catch (const StoreError& e) {
    return error(ApiErrorCode::kStoreUnavailable, e.what(), 503);
  } catch (const std::exception& e) {
    return error(ApiErrorCode::kInternal, e.what(), 500);
  }
}

ApiResult Service::document(const std::string& doc_id) {
  const auto snap = store_->snapshot();
  const auto* doc = snap->find_doc(doc_id);
  if (!doc) return error(ApiErrorCode::kBadRequest, "unknown document " + doc_id, 404);
  json out{{"metadata", doc->metadata}};
  try {
    out["citation"] = format_citation(doc->metadata);
  } catch (const ValidationError&) {
    out["citation"] = doc_id;
  }
  std::size_t chunks = 0;
  if (auto it = snap->blocks().find(doc_id); it != snap->blocks().end()) chunks = it->second->chunks.size();
  out["chunks"] = chunks;
  return {200, out};
}

ApiResult Service::health() {
  json providers{{"text", {{"name", llm_->name()}, {"reachable", llm_->reachable()}}},
                 {"embedding", {{"name", embedder_->name()}, {"reachable", embedder_->reachable()}}}};
  if (compounds_) providers["compounds"] = {{"name", compounds_->name()}, {"reachable", compounds_->reachable()}};
  return {200, json{{"status", "ok"}, {"store", store_->stats()}, {"dimension", store_->dimension()}, {"providers", providers}}};
}

void Service::install_routes() {
  server_ = std::make_unique<httplib::Server>();
  // Without SO_REUSEPORT a second server on a busy port fails to bind.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof yes);
  });
  auto reply = [](httplib::Response& res, const ApiResult& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json; charset=utf-8");
  };
  server_->Post("/api/qa", [this, reply](const httplib::Request& req, httplib::Response& res) { reply(res, qa(req.body)); });
  server_->Post("/api/research",
                [this, reply](const httplib::Request& req, httplib::Response& res) { reply(res, research(req.body)); });
  server_->Post("/api/ingest",
                [this, reply](const httplib::Request& req, httplib::Response& res) { reply(res, ingest(req.body)); });
  server_->Get(R"(/api/documents/(.+))", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, document(req.matches[1].str()));
  });
  server_->Get("/api/health", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, health()); });
  server_->set_error_handler([this, reply](const httplib::Request& req, httplib::Response& res) {
    if (res.status == 404 && res.body.empty()) {
      reply(res, error(ApiErrorCode::kBadRequest, "no route for " + req.method + " " + req.path, 404));
    }
  });
  server_->set_exception_handler([this, reply](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "unknown error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    reply(res, error(ApiErrorCode::kInternal, what, 500));
  });
}

void Service::listen(const std::string& host, int port) {
  install_routes();
  if (!server_->bind_to_port(host, port)) {
    throw Error("cannot listen on " + host + ":" + std::to_string(port) + " (port busy or address invalid)");
  }
  server_->listen_after_bind();
}

int Service::bind_any(const std::string& host) {
  install_routes();
  const int port = server_->bind_to_any_port(host);
  if (port < 0) throw Error("cannot bind an ephemeral port on " + host);
  return port;
}

void Service::serve_bound() { server_->listen_after_bind(); }

void Service::stop() {
  if (server_) server_->stop();
}

}  // namespace litrag
