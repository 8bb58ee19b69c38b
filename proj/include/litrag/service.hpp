#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "litrag/config.hpp"
#include "litrag/providers.hpp"
#include "litrag/vector_store.hpp"

namespace httplib {
class Server;
}

namespace litrag {

enum class ApiErrorCode { kBadRequest, kProviderUnavailable, kStoreUnavailable, kInternal };

const char* to_string(ApiErrorCode code);

struct ApiResult {
  int status = 200;
  nlohmann::json body;
};

/// Request handlers for the HTTP API. Handlers are callable directly (the
/// CLI and tests use them without a socket); `listen` serves them over HTTP.
///
///   POST /api/qa              QARequest      -> QAResponse
///   POST /api/research        ResearchRequest -> ResearchReport
///   POST /api/ingest          {"manifest": path} | {"documents": [...]} -> job status
///   GET  /api/documents/{id}  metadata + citation
///   GET  /api/health          store counts + provider reachability
///
/// Every non-2xx body is {"error": {"code", "message", "request_id"}}.
class Service {
 public:
  Service(ServiceConfig config, std::shared_ptr<VectorStore> store, std::shared_ptr<TextProvider> llm,
          std::shared_ptr<EmbeddingProvider> embedder, std::shared_ptr<CompoundProvider> compounds);
  ~Service();

  ApiResult qa(const std::string& body);
  ApiResult research(const std::string& body);
  ApiResult ingest(const std::string& body);
  ApiResult document(const std::string& doc_id);
  ApiResult health();

  /// Blocks until `stop`. Throws Error when the address cannot be bound.
  void listen(const std::string& host, int port);
  /// Binds to an ephemeral port and returns it; serve with `serve_bound`.
  int bind_any(const std::string& host);
  void serve_bound();
  void stop();

  const ServiceConfig& config() const { return config_; }
  VectorStore& store() { return *store_; }

 private:
  ApiResult error(ApiErrorCode code, const std::string& message, int status,
                  nlohmann::json extra = nullptr);
  void install_routes();

  ServiceConfig config_;
  std::shared_ptr<VectorStore> store_;
  std::shared_ptr<TextProvider> llm_;
  std::shared_ptr<EmbeddingProvider> embedder_;
  std::shared_ptr<CompoundProvider> compounds_;
  std::mutex ingest_mutex_;
  std::atomic<unsigned long> next_request_id_{1};
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace litrag
