#pragma once

#include <memory>
#include <string>
#include <vector>

#include "litrag/providers.hpp"

namespace litrag {

struct HttpEndpoint {
  // e.g. "http://localhost:11434" or "https://api.example.com"
  std::string base_url;
  std::string model;
  // Bearer token; empty sends no Authorization header.
  std::string api_key;
  double timeout_seconds = 60.0;
};

/// Reads the credential from the named environment variable. An empty name
/// yields an empty key; a named but unset variable is a ConfigError.
std::string read_credential(const std::string& env_var);

/// POST {base}/v1/chat/completions with {"model", "messages": [system?, user]}
/// and reads choices[0].message.content.
class ChatCompletionProvider final : public TextProvider {
 public:
  explicit ChatCompletionProvider(HttpEndpoint endpoint);

  std::string complete(const CompletionRequest& request) override;
  std::string name() const override { return "openai:" + endpoint_.model; }
  bool reachable() override;

 private:
  HttpEndpoint endpoint_;
};

/// POST {base}/v1/embeddings with {"model", "input": [...], "dimensions"} and reads
/// data[i].embedding ordered by data[i].index.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  HttpEmbeddingProvider(HttpEndpoint endpoint, std::size_t dimension);

  std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) override;
  std::size_t dimension() const override { return dimension_; }
  std::string name() const override { return "openai:" + endpoint_.model; }
  bool reachable() override;

 private:
  HttpEndpoint endpoint_;
  std::size_t dimension_;
};

/// GET {base}/compounds?q=<query> returning
/// [{"name": ..., "smiles": ..., "url": ...}, ...].
class HttpCompoundProvider final : public CompoundProvider {
 public:
  explicit HttpCompoundProvider(HttpEndpoint endpoint);

  std::vector<MoleculeRecord> lookup(const std::string& query) override;
  std::string name() const override { return "http"; }
  bool reachable() override;

 private:
  HttpEndpoint endpoint_;
};

}  // namespace litrag
