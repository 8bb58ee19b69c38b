#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "litrag/defaults.hpp"
#include "litrag/providers.hpp"
#include "litrag/vector_store.hpp"

namespace litrag {

/// Provider wiring. `kind` selects the implementation:
///   text:       "offline" | "openai"
///   embedding:  "hash" | "token-hash" | "openai"
///   compounds:  "none" | "fixture" | "http"
/// Credentials are never stored here, only the name of the environment
/// variable that holds them.
struct ProviderConfig {
  std::string kind;
  std::string endpoint;
  std::string model;
  std::string api_key_env;
  std::string path;
  double timeout_seconds = 60.0;
};

struct EvalModelConfig {
  std::string id;
  ProviderConfig provider;
};

struct ServiceConfig {
  std::filesystem::path store_path = "store.lrag";
  std::size_t dimension = defaults::kEmbeddingDimension;
  ProviderConfig text{"offline", "", "", "", "", 60.0};
  ProviderConfig embedding{"hash", "", "", "", "", 60.0};
  ProviderConfig compounds{"none", "", "", "", "", 60.0};
  SearchParams search{};
  int max_questions = defaults::kMaxQuestionsPerChunk;
  std::size_t min_chunk_chars = defaults::kMinChunkChars;
  std::size_t prompt_budget = defaults::kPromptBudget;
  int research_parallelism = defaults::kResearchParallelism;
  int eval_parallelism = 1;
  int eval_trials = defaults::kEvalTrials;
  std::string domain_topic = "terpenoid molecules and other natural products";
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;
  std::vector<EvalModelConfig> eval_models;
};

/// Throws ConfigError on invalid values.
void validate(const ServiceConfig& config);

/// Missing keys keep their defaults. Relative paths resolve against the
/// config file's directory.
ServiceConfig load_config(const std::filesystem::path& path);
ServiceConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = {});

std::unique_ptr<TextProvider> make_text_provider(const ProviderConfig& config);
std::unique_ptr<EmbeddingProvider> make_embedding_provider(const ProviderConfig& config,
                                                           std::size_t dimension);
/// Null for kind "none".
std::unique_ptr<CompoundProvider> make_compound_provider(const ProviderConfig& config);

}  // namespace litrag
