#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace litrag {

/// What a completion request is for. Remote providers ignore it; offline and
/// scripted providers use it to pick a behaviour.
enum class Task {
  kGeneric,
  kScreenDocument,
  kCleanChunk,
  kProposeMerges,
  kGenerateQuestions,
  kAssessRelevance,
  kAnswer,
  kResearchOverview,
  kSubquestions,
  kSynthesis,
  kMultipleChoice,
};

const char* task_name(Task task);

struct CompletionRequest {
  Task task = Task::kGeneric;
  std::string system;
  std::string prompt;
  // The input the prompt was built around (chunk text, query, topic).
  std::string subject;
};

class TextProvider {
 public:
  virtual ~TextProvider() = default;

  /// Throws ProviderError on transport or protocol failure.
  virtual std::string complete(const CompletionRequest& request) = 0;
  virtual std::string name() const = 0;
  virtual bool reachable() { return true; }
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  /// One raw (not necessarily normalized) vector per input text, in order.
  virtual std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::string name() const = 0;
  virtual bool reachable() { return true; }
};

struct MoleculeRecord {
  std::string name;
  std::string smiles;
  std::optional<std::string> detail_url;

  bool operator==(const MoleculeRecord&) const = default;
};

class CompoundProvider {
 public:
  virtual ~CompoundProvider() = default;

  virtual std::vector<MoleculeRecord> lookup(const std::string& query) = 0;
  virtual std::string name() const = 0;
  virtual bool reachable() { return true; }
};

// ---------------------------------------------------------------------------
// Offline implementations.

/// Deterministic embedder used for tests and offline runs. The seed is the
/// 64-bit FNV-1a hash of the UTF-8 bytes; `dimension` splitmix64 outputs are
/// mapped to [-1, 1) via the top 53 bits and then normalized to unit length.
class HashEmbedder final : public EmbeddingProvider {
 public:
  explicit HashEmbedder(std::size_t dimension);

  std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) override;
  std::size_t dimension() const override { return dimension_; }
  std::string name() const override { return "hash"; }

  std::vector<float> embed_one(const std::string& text) const;

 private:
  std::size_t dimension_;
};

/// Feature-hashing bag-of-words embedder. Texts sharing vocabulary land close
/// together, which makes offline demos retrieve something sensible.
class TokenHashEmbedder final : public EmbeddingProvider {
 public:
  explicit TokenHashEmbedder(std::size_t dimension);

  std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) override;
  std::size_t dimension() const override { return dimension_; }
  std::string name() const override { return "token-hash"; }

 private:
  std::size_t dimension_;
};

/// Rule-based stand-in for an LLM so the full pipeline runs without network
/// access. Cleaning is the identity, merging proposes nothing, questions are
/// derived from sentences and answers quote nothing verbatim.
class OfflineTextProvider final : public TextProvider {
 public:
  std::string complete(const CompletionRequest& request) override;
  std::string name() const override { return "offline"; }
};

/// Compound lookup over a local tab-separated table: name, SMILES, optional URL.
/// A record matches when a query word of four or more letters occurs in its
/// name; exact name matches sort first, then table order.
class FixtureCompoundProvider final : public CompoundProvider {
 public:
  explicit FixtureCompoundProvider(std::vector<MoleculeRecord> table);
  static FixtureCompoundProvider from_file(const std::filesystem::path& path);

  std::vector<MoleculeRecord> lookup(const std::string& query) override;
  std::string name() const override { return "fixture"; }

  const std::vector<MoleculeRecord>& table() const { return table_; }

 private:
  std::vector<MoleculeRecord> table_;
};

}  // namespace litrag
