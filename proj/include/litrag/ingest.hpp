#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "litrag/corpus.hpp"
#include "litrag/enrichment.hpp"
#include "litrag/vector_store.hpp"

namespace litrag {

struct ManifestEntry {
  std::filesystem::path markdown_path;
  std::filesystem::path sidecar_path;
};

/// {"documents": [{"markdown": "...", "metadata": "..."}]}; relative paths are
/// resolved against the manifest's directory.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& manifest);
std::vector<ManifestEntry> parse_manifest(const std::string& json_text,
                                          const std::filesystem::path& base_dir);

/// Reads the Markdown body and the JSON sidecar (metadata fields plus
/// "abstract"). Throws ValidationError on a missing abstract or bad metadata.
RawDocument load_document(const ManifestEntry& entry);

struct IngestOptions {
  int max_questions = defaults::kMaxQuestionsPerChunk;
  std::size_t min_chunk_chars = defaults::kMinChunkChars;
  bool clean = true;
  bool merge = true;
  // When set, each abstract is screened for relevance to this topic first.
  std::optional<std::string> screen_topic;
  int provider_retries = 2;
};

struct PreparedDocument {
  DocEntry doc;
  std::vector<ChunkIndexEntry> chunks;
  std::size_t question_count = 0;
};

/// Optional relevance screen over the abstract; provider failure keeps the
/// document.
bool screen_document(const RawDocument& doc, const std::string& topic, TextProvider& llm,
                     Diagnostics& diag);

/// segment -> clean -> merge -> questions -> embeddings. Returns nothing when
/// the screen rejects the document.
std::optional<PreparedDocument> prepare_document(const RawDocument& doc, TextProvider& llm,
                                                 EmbeddingProvider& embedder, std::size_t dimension,
                                                 const IngestOptions& options, Diagnostics& diag);

struct IngestSummary {
  std::size_t documents = 0;
  std::size_t skipped = 0;
  std::size_t chunks = 0;
  std::size_t questions = 0;
  std::vector<std::string> warnings;
};

IngestSummary ingest_documents(const std::vector<ManifestEntry>& entries, VectorStore& store,
                               TextProvider& llm, EmbeddingProvider& embedder,
                               const IngestOptions& options);

}  // namespace litrag
