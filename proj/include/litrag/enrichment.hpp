#pragma once

#include <string>
#include <vector>

#include "litrag/corpus.hpp"
#include "litrag/defaults.hpp"
#include "litrag/embedding.hpp"
#include "litrag/providers.hpp"

namespace litrag {

struct HypotheticalQuestion {
  std::string question_id;
  std::string chunk_id;
  std::string text;

  bool operator==(const HypotheticalQuestion&) const = default;
};

enum class RecordKind { kAbstract, kChunk, kQuestion };

struct EmbeddingRecord {
  EmbeddingVector vector;
  RecordKind kind = RecordKind::kChunk;
  std::string target_id;
  std::string doc_id;
};

/// Asks the provider for questions the chunk answers, one per line. Blank
/// lines are dropped and the list is cut at `max_questions`. Ids are
/// "<chunk_id>/q1", "/q2", ... Provider failure or empty output gives an empty
/// list plus a warning.
std::vector<HypotheticalQuestion> generate_questions(
    const Chunk& chunk, TextProvider& llm, Diagnostics& diag,
    int max_questions = defaults::kMaxQuestionsPerChunk);

/// Texts longer than `limit` characters are cut there before embedding.
std::string clip_for_embedding(const std::string& text,
                               std::size_t limit = defaults::kEmbedTextLimit);

/// Embeds and normalizes. Throws ValidationError for an empty text,
/// ConfigError when the provider's dimension differs from `dimension`.
std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& texts,
                                         EmbeddingProvider& embedder, std::size_t dimension);

}  // namespace litrag
