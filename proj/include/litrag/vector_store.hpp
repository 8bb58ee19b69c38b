#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "litrag/corpus.hpp"
#include "litrag/defaults.hpp"
#include "litrag/embedding.hpp"

namespace litrag {

struct QuestionEntry {
  std::string question_id;
  std::string text;
  EmbeddingVector vector;
};

struct DocEntry {
  DocumentMetadata metadata;
  std::string abstract;
  EmbeddingVector abstract_vector;

  const std::string& doc_id() const { return metadata.doc_id; }
  DocType doc_type() const { return metadata.doc_type; }
};

struct ChunkIndexEntry {
  std::string chunk_id;
  std::string doc_id;
  std::vector<std::string> heading_path;
  std::string text;
  EmbeddingVector chunk_vector;
  std::vector<QuestionEntry> questions;
};

enum class MatchKind { kChunk, kQuestion };

struct Hit {
  std::string chunk_id;
  std::string doc_id;
  double score = 0.0;
  MatchKind matched_kind = MatchKind::kChunk;
  std::string matched_id;

  bool operator==(const Hit&) const = default;
};

struct SummaryHit {
  std::string doc_id;
  double score = 0.0;

  bool operator==(const SummaryHit&) const = default;
};

struct SearchParams {
  int summary_limit = defaults::kSummaryLimit;
  int chunk_limit = defaults::kChunkLimit;
  double min_score = defaults::kMinScore;
  std::optional<DocType> doc_type_filter;
};

/// Throws ValidationError on a non-positive limit or min_score outside [-1, 1].
void validate(const SearchParams& params);

struct StoreStats {
  std::size_t docs = 0;
  std::size_t chunks = 0;
  std::size_t questions = 0;

  bool operator==(const StoreStats&) const = default;
};

/// One document with its chunks. Chunk and question vectors live in one
/// row-major block; `row_owner[r]` is the chunk index of row r and
/// `row_question[r]` is -1 for the chunk's own vector.
struct DocBlock {
  DocEntry doc;
  double abstract_inv_norm = 1.0;
  std::vector<ChunkIndexEntry> chunks;
  std::vector<float> rows;
  std::vector<double> row_inv_norm;
  std::vector<std::size_t> row_owner;
  std::vector<int> row_question;
};

/// Immutable view of the store. Searches run on a snapshot so a concurrent
/// upsert is either fully visible or not at all.
class StoreSnapshot {
 public:
  StoreSnapshot(std::size_t dimension, std::map<std::string, std::shared_ptr<const DocBlock>> docs);

  std::size_t dimension() const { return dimension_; }
  StoreStats stats() const { return stats_; }

  /// Sorted by score descending, ties by doc_id ascending; at most `limit`.
  std::vector<SummaryHit> search_summary(const EmbeddingVector& query, int limit,
                                         std::optional<DocType> doc_type_filter = {}) const;

  /// One hit per chunk, scored as the max over the chunk vector and its
  /// question vectors. Only scores strictly above `min_score` from allowed
  /// documents; sorted by score descending, ties by chunk_id ascending.
  std::vector<Hit> search_chunks(const EmbeddingVector& query, const std::set<std::string>& allowed_docs,
                                 int limit, double min_score) const;

  /// Summary layer first, then chunk layer restricted to its documents.
  std::vector<Hit> hierarchical_search(const EmbeddingVector& query, const SearchParams& params) const;

  const DocEntry* find_doc(const std::string& doc_id) const;
  const ChunkIndexEntry* find_chunk(const std::string& chunk_id) const;
  const std::map<std::string, std::shared_ptr<const DocBlock>>& blocks() const { return docs_; }

 private:
  void check_dimension(const EmbeddingVector& v) const;

  std::size_t dimension_;
  std::map<std::string, std::shared_ptr<const DocBlock>> docs_;
  std::map<std::string, std::pair<const DocBlock*, std::size_t>> chunk_index_;
  StoreStats stats_;
};

/// Two-layer vector index: a summary layer over document abstracts and a
/// sub-chunk layer over chunk and hypothetical-question vectors. Writers
/// serialize on an internal mutex and publish a new snapshot per commit.
class VectorStore {
 public:
  explicit VectorStore(std::size_t dimension = defaults::kEmbeddingDimension);
  VectorStore(VectorStore&& other) noexcept;
  VectorStore& operator=(VectorStore&&) = delete;

  std::size_t dimension() const { return dimension_; }
  std::shared_ptr<const StoreSnapshot> snapshot() const;
  StoreStats stats() const { return snapshot()->stats(); }

  /// Inserts or replaces a document and all of its chunks in one commit.
  /// Throws ValidationError (store unchanged) on any dimension mismatch,
  /// foreign chunk doc_id, duplicate chunk_id or more than four questions.
  void upsert(DocEntry doc, std::vector<ChunkIndexEntry> chunks);

  void persist(const std::filesystem::path& path) const;
  static VectorStore load(const std::filesystem::path& path);

  static constexpr std::uint32_t kFormatVersion = 1;

 private:
  std::size_t dimension_;
  mutable std::mutex mutex_;
  std::shared_ptr<const StoreSnapshot> current_;
};

}  // namespace litrag
