#include "litrag/http_providers.hpp"

#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "litrag/error.hpp"

namespace litrag {

using nlohmann::json;

std::string read_credential(const std::string& env_var) {
  if (env_var.empty()) return {};
  const char* v = std::getenv(env_var.c_str());
  if (!v) throw ConfigError("environment variable " + env_var + " is not set");
  return v;
}

namespace {

httplib::Client make_client(const HttpEndpoint& ep) {
  httplib::Client cli(ep.base_url);
  if (!cli.is_valid()) throw ConfigError("unsupported endpoint URL " + ep.base_url);
  const auto secs = static_cast<time_t>(ep.timeout_seconds);
  const auto usecs = static_cast<time_t>((ep.timeout_seconds - static_cast<double>(secs)) * 1e6);
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
  if (!ep.api_key.empty()) cli.set_bearer_token_auth(ep.api_key);
  return cli;
}

json post_json(const HttpEndpoint& ep, const std::string& path, const json& body) {
  auto cli = make_client(ep);
  auto res = cli.Post(path, body.dump(), "application/json");
  if (!res) throw ProviderError(ep.base_url + path + ": " + httplib::to_string(res.error()), true);
  if (res->status == 429 || res->status >= 500) {
    throw ProviderError(ep.base_url + path + ": HTTP " + std::to_string(res->status), true);
  }
  if (res->status != 200) {
    throw ProviderError(ep.base_url + path + ": HTTP " + std::to_string(res->status) + ": " + res->body, false);
  }
  try {
    return json::parse(res->body);
  } catch (const json::exception& e) {
    throw ProviderError(ep.base_url + path + ": malformed JSON response: " + e.what(), false);
  }
}

bool ping(const HttpEndpoint& ep, const std::string& path) {
  try {
    auto cli = make_client(ep);
    return static_cast<bool>(cli.Get(path));
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

ChatCompletionProvider::ChatCompletionProvider(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

std::string ChatCompletionProvider::complete(const CompletionRequest& request) {
  json messages = json::array();
  if (!request.system.empty()) messages.push_back({{"role", "system"}, {"content", request.system}});
  messages.push_back({{"role", "user"}, {"content", request.prompt}});
  const auto res = post_json(endpoint_, "/v1/chat/completions", {{"model", endpoint_.model}, {"messages", messages}});
  try {
    return res.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw ProviderError(std::string("chat completion response lacks choices[0].message.content: ") + e.what(), false);
  }
}

bool ChatCompletionProvider::reachable() { return ping(endpoint_, "/v1/models"); }

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpEndpoint endpoint, std::size_t dimension)
    : endpoint_(std::move(endpoint)), dimension_(dimension) {}

std::vector<std::vector<float>> HttpEmbeddingProvider::embed(const std::vector<std::string>& texts) {
  const json body = {{"model", endpoint_.model}, {"input", texts}, {"dimensions", dimension_}};
  const auto res = post_json(endpoint_, "/v1/embeddings", body);
  std::vector<std::vector<float>> out(texts.size());
  try {
    const auto& data = res.at("data");
    if (data.size() != texts.size()) {
      throw ProviderError("embedding response has " + std::to_string(data.size()) + " items for " +
                              std::to_string(texts.size()) + " inputs",
                          false);
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto index = data[i].value("index", i);
      if (index >= out.size()) throw ProviderError("embedding response index out of range", false);
      out[index] = data[i].at("embedding").get<std::vector<float>>();
    }
  } catch (const json::exception& e) {
    throw ProviderError(std::string("malformed embedding response: ") + e.what(), false);
  }
  return out;
}

bool HttpEmbeddingProvider::reachable() { return ping(endpoint_, "/v1/models"); }

HttpCompoundProvider::HttpCompoundProvider(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

std::vector<MoleculeRecord> HttpCompoundProvider::lookup(const std::string& query) {
  auto cli = make_client(endpoint_);
  auto res = cli.Get("/compounds", httplib::Params{{"q", query}}, httplib::Headers{});
  if (!res) throw ProviderError("compound lookup: " + httplib::to_string(res.error()), true);
  if (res->status != 200) throw ProviderError("compound lookup: HTTP " + std::to_string(res->status), res->status >= 500);
  std::vector<MoleculeRecord> out;
  try {
    for (const auto& item : json::parse(res->body)) {
      MoleculeRecord m{item.at("name").get<std::string>(), item.at("smiles").get<std::string>(), std::nullopt};
      if (item.contains("url") && item["url"].is_string()) m.detail_url = item["url"].get<std::string>();
      out.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw ProviderError(std::string("malformed compound response: ") + e.what(), false);
  }
  return out;
}

bool HttpCompoundProvider::reachable() { return ping(endpoint_, "/compounds?q="); }

}  // namespace litrag
