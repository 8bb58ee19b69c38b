#include "litrag/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "litrag/error.hpp"
#include "litrag/http_providers.hpp"
#include "litrag/serialize.hpp"

namespace litrag {

void validate(const ServiceConfig& c) {
  if (c.dimension == 0) throw ConfigError("dimension must be positive");
  try {
    validate(c.search);
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("search: ") + e.what());
  }
  if (c.max_questions < 1 || c.max_questions > defaults::kMaxQuestionsPerChunk) {
    throw ConfigError("max_questions must be in [1, " + std::to_string(defaults::kMaxQuestionsPerChunk) + "]");
  }
  if (c.prompt_budget < 256) throw ConfigError("prompt_budget must be at least 256 characters");
  if (c.research_parallelism < 1 || c.eval_parallelism < 1) throw ConfigError("parallelism caps must be >= 1");
  if (c.eval_trials < 1) throw ConfigError("eval trials must be >= 1");
  if (c.listen_port < 0 || c.listen_port > 65535) throw ConfigError("listen port out of range");
  auto check_kind = [](const char* role, const std::string& kind, std::initializer_list<const char*> known) {
    for (const char* k : known) {
      if (kind == k) return;
    }
    throw ConfigError(std::string("unknown ") + role + " provider kind \"" + kind + "\"");
  };
  check_kind("text", c.text.kind, {"offline", "openai"});
  check_kind("embedding", c.embedding.kind, {"hash", "token-hash", "openai"});
  check_kind("compound", c.compounds.kind, {"none", "", "fixture", "http"});
  for (const auto& m : c.eval_models) check_kind("eval model", m.provider.kind, {"offline", "openai"});
}

namespace {

ProviderConfig provider_from_json(const json& j, ProviderConfig p, const std::filesystem::path& base_dir) {
  if (j.is_null()) return p;
  if (!j.is_object()) throw ConfigError("provider entries must be objects");
  for (const char* forbidden : {"api_key", "key", "token", "password", "secret"}) {
    if (j.contains(forbidden)) {
      throw ConfigError(std::string("credentials must come from the environment; use \"api_key_env\" instead of \"") +
                        forbidden + "\"");
    }
  }
  p.kind = j.value("kind", p.kind);
  p.endpoint = j.value("endpoint", p.endpoint);
  p.model = j.value("model", p.model);
  p.api_key_env = j.value("api_key_env", p.api_key_env);
  p.timeout_seconds = j.value("timeout_seconds", p.timeout_seconds);
  if (j.contains("path")) {
    std::filesystem::path path = j["path"].get<std::string>();
    p.path = (path.is_relative() && !base_dir.empty() ? base_dir / path : path).lexically_normal().string();
  }
  return p;
}

}  // namespace

ServiceConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  ServiceConfig c;
  try {
    const auto j = json::parse(json_text);
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (j.contains("store_path")) {
      std::filesystem::path p = j["store_path"].get<std::string>();
      c.store_path = (p.is_relative() && !base_dir.empty() ? base_dir / p : p).lexically_normal();
    }
    c.dimension = j.value("dimension", c.dimension);
    if (j.contains("providers")) {
      const auto& p = j["providers"];
      c.text = provider_from_json(p.value("text", json(nullptr)), c.text, base_dir);
      c.embedding = provider_from_json(p.value("embedding", json(nullptr)), c.embedding, base_dir);
      c.compounds = provider_from_json(p.value("compounds", json(nullptr)), c.compounds, base_dir);
    }
    if (j.contains("search")) {
      try {
        c.search = search_params_from_json(j["search"], c.search);
      } catch (const ValidationError& e) {
        throw ConfigError(std::string("search: ") + e.what());
      }
    }
    if (j.contains("ingest")) {
      const auto& i = j["ingest"];
      c.max_questions = i.value("max_questions", c.max_questions);
      c.min_chunk_chars = i.value("min_chunk_chars", c.min_chunk_chars);
    }
    if (j.contains("qa")) {
      const auto& q = j["qa"];
      c.prompt_budget = q.value("prompt_budget", c.prompt_budget);
      c.domain_topic = q.value("domain_topic", c.domain_topic);
    }
    if (j.contains("research")) c.research_parallelism = j["research"].value("parallelism", c.research_parallelism);
    if (j.contains("eval")) {
      const auto& e = j["eval"];
      c.eval_trials = e.value("trials", c.eval_trials);
      c.eval_parallelism = e.value("parallelism", c.eval_parallelism);
      for (const auto& m : e.value("models", json::array())) {
        EvalModelConfig mc;
        mc.id = m.at("id").get<std::string>();
        mc.provider = provider_from_json(m.at("provider"), ProviderConfig{"offline", "", "", "", "", 60.0}, base_dir);
        c.eval_models.push_back(std::move(mc));
      }
    }
    if (j.contains("listen")) {
      c.listen_host = j["listen"].value("host", c.listen_host);
      c.listen_port = j["listen"].value("port", c.listen_port);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

ServiceConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

namespace {

HttpEndpoint endpoint_of(const ProviderConfig& p) {
  if (p.endpoint.empty()) throw ConfigError("provider kind \"" + p.kind + "\" needs an endpoint");
  return HttpEndpoint{p.endpoint, p.model, read_credential(p.api_key_env), p.timeout_seconds};
}

}  // namespace

std::unique_ptr<TextProvider> make_text_provider(const ProviderConfig& p) {
  if (p.kind == "offline") return std::make_unique<OfflineTextProvider>();
  if (p.kind == "openai") return std::make_unique<ChatCompletionProvider>(endpoint_of(p));
  throw ConfigError("unknown text provider kind \"" + p.kind + "\"");
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const ProviderConfig& p, std::size_t dimension) {
  if (p.kind == "hash") return std::make_unique<HashEmbedder>(dimension);
  if (p.kind == "token-hash") return std::make_unique<TokenHashEmbedder>(dimension);
  if (p.kind == "openai") return std::make_unique<HttpEmbeddingProvider>(endpoint_of(p), dimension);
  throw ConfigError("unknown embedding provider kind \"" + p.kind + "\"");
}

std::unique_ptr<CompoundProvider> make_compound_provider(const ProviderConfig& p) {
  if (p.kind == "none" || p.kind.empty()) return nullptr;
  if (p.kind == "fixture") return std::make_unique<FixtureCompoundProvider>(FixtureCompoundProvider::from_file(p.path));
  if (p.kind == "http") return std::make_unique<HttpCompoundProvider>(endpoint_of(p));
  throw ConfigError("unknown compound provider kind \"" + p.kind + "\"");
}

}  // namespace litrag
