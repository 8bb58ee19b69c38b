#include "litrag/vector_store.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "litrag/error.hpp"
#include "litrag/serialize.hpp"
#include "litrag/text_util.hpp"

namespace litrag {

void validate(const SearchParams& params) {
  if (params.summary_limit < 1) throw ValidationError("summary_limit must be >= 1");
  if (params.chunk_limit < 1) throw ValidationError("chunk_limit must be >= 1");
  if (!(params.min_score >= -1.0 && params.min_score <= 1.0)) throw ValidationError("min_score must be in [-1, 1]");
}

namespace {

double inverse_norm(std::span<const float> v) {
  const double n = dot(v, v);
  return n > 0.0 ? 1.0 / std::sqrt(n) : 0.0;
}

double score_of(std::span<const float> row, double row_inv, std::span<const float> q, double q_inv) {
  return std::clamp(dot(row, q) * row_inv * q_inv, -1.0, 1.0);
}

std::shared_ptr<const DocBlock> build_block(std::size_t dimension, DocEntry doc, std::vector<ChunkIndexEntry> chunks) {
  validate(doc.metadata);
  auto check = [&](const EmbeddingVector& v, const std::string& what) {
    if (v.dimension() != dimension) {
      throw ValidationError("upsert " + doc.doc_id() + ": " + what + " has dimension " +
                            std::to_string(v.dimension()) + ", store expects " + std::to_string(dimension));
    }
  };
  check(doc.abstract_vector, "abstract vector");

  auto block = std::make_shared<DocBlock>();
  std::set<std::string> ids;
  for (const auto& c : chunks) {
    if (c.doc_id != doc.doc_id()) {
      throw ValidationError("upsert " + doc.doc_id() + ": chunk " + c.chunk_id + " belongs to " + c.doc_id);
    }
    if (!ids.insert(c.chunk_id).second) throw ValidationError("upsert " + doc.doc_id() + ": duplicate chunk " + c.chunk_id);
    if (c.questions.size() > static_cast<std::size_t>(defaults::kMaxQuestionsPerChunk)) {
      throw ValidationError("upsert " + doc.doc_id() + ": chunk " + c.chunk_id + " has more than " +
                            std::to_string(defaults::kMaxQuestionsPerChunk) + " questions");
    }
    check(c.chunk_vector, "chunk " + c.chunk_id);
    for (const auto& q : c.questions) check(q.vector, "question " + q.question_id);
  }

  block->abstract_inv_norm = inverse_norm(doc.abstract_vector.values());
  for (std::size_t ci = 0; ci < chunks.size(); ++ci) {
    auto push_row = [&](const EmbeddingVector& v, int question) {
      block->rows.insert(block->rows.end(), v.values().begin(), v.values().end());
      block->row_inv_norm.push_back(inverse_norm(v.values()));
      block->row_owner.push_back(ci);
      block->row_question.push_back(question);
    };
    push_row(chunks[ci].chunk_vector, -1);
    for (std::size_t qi = 0; qi < chunks[ci].questions.size(); ++qi) push_row(chunks[ci].questions[qi].vector, static_cast<int>(qi));
  }
  block->doc = std::move(doc);
  block->chunks = std::move(chunks);
  return block;
}

}  // namespace

// ---------------------------------------------------------------------------

StoreSnapshot::StoreSnapshot(std::size_t dimension, std::map<std::string, std::shared_ptr<const DocBlock>> docs)
    : dimension_(dimension), docs_(std::move(docs)) {
  for (const auto& [id, block] : docs_) {
    ++stats_.docs;
    stats_.chunks += block->chunks.size();
    for (std::size_t i = 0; i < block->chunks.size(); ++i) {
      stats_.questions += block->chunks[i].questions.size();
      chunk_index_[block->chunks[i].chunk_id] = {block.get(), i};
    }
  }
}

void StoreSnapshot::check_dimension(const EmbeddingVector& v) const {
  if (v.dimension() != dimension_) {
    throw ConfigError("query vector has dimension " + std::to_string(v.dimension()) + ", store expects " +
                      std::to_string(dimension_));
  }
}

std::vector<SummaryHit> StoreSnapshot::search_summary(const EmbeddingVector& query, int limit,
                                                      std::optional<DocType> doc_type_filter) const {
  check_dimension(query);
  if (limit < 1) return {};
  const auto q = query.values();
  const double q_inv = inverse_norm(q);
  std::vector<SummaryHit> hits;
  hits.reserve(docs_.size());
  for (const auto& [id, block] : docs_) {
    if (doc_type_filter && block->doc.doc_type() != *doc_type_filter) continue;
    hits.push_back({id, score_of(block->doc.abstract_vector.values(), block->abstract_inv_norm, q, q_inv)});
  }
  auto better = [](const SummaryHit& a, const SummaryHit& b) {
    return a.score != b.score ? a.score > b.score : a.doc_id < b.doc_id;
  };
  const auto keep = std::min(hits.size(), static_cast<std::size_t>(limit));
  std::partial_sort(hits.begin(), hits.begin() + static_cast<long>(keep), hits.end(), better);
  hits.resize(keep);
  return hits;
}

std::vector<Hit> StoreSnapshot::search_chunks(const EmbeddingVector& query, const std::set<std::string>& allowed_docs,
                                              int limit, double min_score) const {
  check_dimension(query);
  if (limit < 1) return {};
  const auto q = query.values();
  const double q_inv = inverse_norm(q);
  const std::size_t dim = dimension_;
  std::vector<Hit> hits;
  for (const auto& doc_id : allowed_docs) {
    auto it = docs_.find(doc_id);
    if (it == docs_.end()) continue;
    const DocBlock& block = *it->second;
    std::vector<double> best(block.chunks.size(), -2.0);
    std::vector<int> best_question(block.chunks.size(), -1);
    for (std::size_t r = 0; r < block.row_owner.size(); ++r) {
      std::span<const float> row(block.rows.data() + r * dim, dim);
      const double s = score_of(row, block.row_inv_norm[r], q, q_inv);
      const auto owner = block.row_owner[r];
      if (s > best[owner]) {
        best[owner] = s;
        best_question[owner] = block.row_question[r];
      }
    }
    for (std::size_t ci = 0; ci < block.chunks.size(); ++ci) {
      if (!(best[ci] > min_score)) continue;
      const auto& chunk = block.chunks[ci];
      Hit h;
      h.chunk_id = chunk.chunk_id;
      h.doc_id = chunk.doc_id;
      h.score = best[ci];
      if (best_question[ci] < 0) {
        h.matched_kind = MatchKind::kChunk;
        h.matched_id = chunk.chunk_id;
      } else {
        h.matched_kind = MatchKind::kQuestion;
        h.matched_id = chunk.questions[static_cast<std::size_t>(best_question[ci])].question_id;
      }
      hits.push_back(std::move(h));
    }
  }
  auto better = [](const Hit& a, const Hit& b) { return a.score != b.score ? a.score > b.score : a.chunk_id < b.chunk_id; };
  const auto keep = std::min(hits.size(), static_cast<std::size_t>(limit));
  std::partial_sort(hits.begin(), hits.begin() + static_cast<long>(keep), hits.end(), better);
  hits.resize(keep);
  return hits;
}

std::vector<Hit> StoreSnapshot::hierarchical_search(const EmbeddingVector& query, const SearchParams& params) const {
  validate(params);
  std::set<std::string> allowed;
  for (auto& h : search_summary(query, params.summary_limit, params.doc_type_filter)) allowed.insert(std::move(h.doc_id));
  return search_chunks(query, allowed, params.chunk_limit, params.min_score);
}

const DocEntry* StoreSnapshot::find_doc(const std::string& doc_id) const {
  auto it = docs_.find(doc_id);
  return it == docs_.end() ? nullptr : &it->second->doc;
}

const ChunkIndexEntry* StoreSnapshot::find_chunk(const std::string& chunk_id) const {
  auto it = chunk_index_.find(chunk_id);
  return it == chunk_index_.end() ? nullptr : &it->second.first->chunks[it->second.second];
}

// ---------------------------------------------------------------------------

VectorStore::VectorStore(std::size_t dimension)
    : dimension_(dimension), current_(std::make_shared<const StoreSnapshot>(dimension, std::map<std::string, std::shared_ptr<const DocBlock>>{})) {
  if (dimension == 0) throw ConfigError("store dimension must be positive");
}

VectorStore::VectorStore(VectorStore&& other) noexcept : dimension_(other.dimension_), current_(other.snapshot()) {}

std::shared_ptr<const StoreSnapshot> VectorStore::snapshot() const {
  std::lock_guard lock(mutex_);
  return current_;
}

void VectorStore::upsert(DocEntry doc, std::vector<ChunkIndexEntry> chunks) {
  auto block = build_block(dimension_, std::move(doc), std::move(chunks));
  std::lock_guard lock(mutex_);
  auto docs = current_->blocks();
  // Chunk ids are global; a chunk id owned by another document is a conflict.
  for (const auto& c : block->chunks) {
    const auto* existing = current_->find_chunk(c.chunk_id);
    if (existing && existing->doc_id != block->doc.doc_id()) {
      throw ValidationError("upsert " + block->doc.doc_id() + ": chunk id " + c.chunk_id + " already belongs to " +
                            existing->doc_id);
    }
  }
  docs[block->doc.doc_id()] = block;
  current_ = std::make_shared<const StoreSnapshot>(dimension_, std::move(docs));
}

// ---------------------------------------------------------------------------
// On-disk format, all integers and floats little-endian:
//
//   char[8]  magic "LITRAGKB"
//   u32      format version
//   u32      dimension
//   u64      document count
//   u64      chunk count
//   u64      question count
//   u64      metadata section size in bytes
//   u64      vector count (documents + chunks + questions)
//   u64      FNV-1a 64 checksum of the metadata and vector sections
//   metadata section: UTF-8 JSON
//   vector section: vector_count * dimension f32, per document the abstract
//                   vector then, per chunk, its vector and its question vectors

namespace {

constexpr char kMagic[8] = {'L', 'I', 'T', 'R', 'A', 'G', 'K', 'B'};
constexpr std::size_t kHeaderSize = 64;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

std::uint64_t get_le(const char* p, int bytes) {
  std::uint64_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
  return v;
}

}  // namespace

void VectorStore::persist(const std::filesystem::path& path) const {
  auto snap = snapshot();
  json docs = json::array();
  std::string vectors;
  std::uint64_t vector_count = 0;
  auto put_vector = [&](const EmbeddingVector& v) {
    for (float f : v.values()) put_f32(vectors, f);
    ++vector_count;
  };
  for (const auto& [id, block] : snap->blocks()) {
    json jd;
    jd["metadata"] = block->doc.metadata;
    jd["abstract"] = block->doc.abstract;
    json jc = json::array();
    put_vector(block->doc.abstract_vector);
    for (const auto& c : block->chunks) {
      json qs = json::array();
      put_vector(c.chunk_vector);
      for (const auto& q : c.questions) {
        qs.push_back({{"question_id", q.question_id}, {"text", q.text}});
        put_vector(q.vector);
      }
      jc.push_back({{"chunk_id", c.chunk_id}, {"heading_path", c.heading_path}, {"text", c.text}, {"questions", qs}});
    }
    jd["chunks"] = std::move(jc);
    docs.push_back(std::move(jd));
  }
  const std::string metadata = json{{"docs", docs}}.dump();

  std::uint64_t checksum = 14695981039346656037ULL;
  for (const std::string* section : {&metadata, static_cast<const std::string*>(&vectors)}) {
    for (unsigned char c : *section) {
      checksum ^= c;
      checksum *= 1099511628211ULL;
    }
  }

  const auto stats = snap->stats();
  std::string header(kMagic, sizeof kMagic);
  put_u32(header, kFormatVersion);
  put_u32(header, static_cast<std::uint32_t>(dimension_));
  put_u64(header, stats.docs);
  put_u64(header, stats.chunks);
  put_u64(header, stats.questions);
  put_u64(header, metadata.size());
  put_u64(header, vector_count);
  put_u64(header, checksum);

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StoreError("cannot write " + tmp.string());
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(metadata.data(), static_cast<std::streamsize>(metadata.size()));
    out.write(vectors.data(), static_cast<std::streamsize>(vectors.size()));
    if (!out) throw StoreError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw StoreError("cannot replace " + path.string() + ": " + ec.message());
}

VectorStore VectorStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreLoadError(LoadErrorKind::kIo, "cannot open store file " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = path.string() + ": ";
  if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw StoreLoadError(LoadErrorKind::kCorrupt, where + "not a store file");
  }
  const char* h = bytes.data();
  const auto version = static_cast<std::uint32_t>(get_le(h + 8, 4));
  if (version != kFormatVersion) {
    throw StoreLoadError(LoadErrorKind::kVersionMismatch,
                         where + "format version " + std::to_string(version) + ", expected " + std::to_string(kFormatVersion));
  }
  const auto dimension = static_cast<std::size_t>(get_le(h + 12, 4));
  const auto n_docs = get_le(h + 16, 8);
  const auto n_chunks = get_le(h + 24, 8);
  const auto n_questions = get_le(h + 32, 8);
  const auto meta_size = get_le(h + 40, 8);
  const auto n_vectors = get_le(h + 48, 8);
  const auto checksum = get_le(h + 56, 8);
  if (dimension == 0 || n_vectors != n_docs + n_chunks + n_questions) {
    throw StoreLoadError(LoadErrorKind::kCorrupt, where + "inconsistent header");
  }
  const std::size_t body = bytes.size() - kHeaderSize;
  // Guard the multiplication against absurd header values.
  if (meta_size > body || n_vectors > (body - meta_size) / (4 * dimension) + 1) {
    throw StoreLoadError(LoadErrorKind::kTruncated, where + "file is shorter than its header declares");
  }
  const std::size_t vec_bytes = static_cast<std::size_t>(n_vectors) * dimension * 4;
  if (meta_size + vec_bytes > body) {
    throw StoreLoadError(LoadErrorKind::kTruncated, where + "file is shorter than its header declares");
  }
  if (meta_size + vec_bytes < body) throw StoreLoadError(LoadErrorKind::kCorrupt, where + "trailing bytes");

  std::uint64_t actual = text::fnv1a64(std::string_view(bytes).substr(kHeaderSize));
  if (actual != checksum) throw StoreLoadError(LoadErrorKind::kChecksum, where + "checksum mismatch");

  const std::string_view metadata(bytes.data() + kHeaderSize, meta_size);
  const char* vec = bytes.data() + kHeaderSize + meta_size;
  std::size_t next_vector = 0;
  auto take_vector = [&] {
    if (next_vector >= n_vectors) throw StoreLoadError(LoadErrorKind::kCorrupt, where + "vector section too short");
    std::vector<float> values(dimension);
    const char* p = vec + next_vector * dimension * 4;
    for (std::size_t i = 0; i < dimension; ++i) {
      values[i] = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(p + 4 * i, 4)));
    }
    ++next_vector;
    return EmbeddingVector::from_unit(std::move(values));
  };

  VectorStore store(dimension);
  std::map<std::string, std::shared_ptr<const DocBlock>> blocks;
  try {
    const auto root = json::parse(metadata);
    for (const auto& jd : root.at("docs")) {
      DocEntry doc;
      doc.metadata = jd.at("metadata").get<DocumentMetadata>();
      doc.abstract = jd.at("abstract").get<std::string>();
      doc.abstract_vector = take_vector();
      std::vector<ChunkIndexEntry> chunks;
      for (const auto& jc : jd.at("chunks")) {
        ChunkIndexEntry c;
        c.chunk_id = jc.at("chunk_id").get<std::string>();
        c.doc_id = doc.doc_id();
        c.heading_path = jc.at("heading_path").get<std::vector<std::string>>();
        c.text = jc.at("text").get<std::string>();
        c.chunk_vector = take_vector();
        for (const auto& jq : jc.at("questions")) {
          c.questions.push_back({jq.at("question_id").get<std::string>(), jq.at("text").get<std::string>(), take_vector()});
        }
        chunks.push_back(std::move(c));
      }
      auto id = doc.doc_id();
      blocks[id] = build_block(dimension, std::move(doc), std::move(chunks));
    }
  } catch (const json::exception& e) {
    throw StoreLoadError(LoadErrorKind::kCorrupt, where + "bad metadata section: " + e.what());
  } catch (const ValidationError& e) {
    throw StoreLoadError(LoadErrorKind::kCorrupt, where + e.what());
  }
  if (next_vector != n_vectors) throw StoreLoadError(LoadErrorKind::kCorrupt, where + "vector count mismatch");
  store.current_ = std::make_shared<const StoreSnapshot>(dimension, std::move(blocks));
  const auto stats = store.stats();
  if (stats.docs != n_docs || stats.chunks != n_chunks || stats.questions != n_questions) {
    throw StoreLoadError(LoadErrorKind::kCorrupt, where + "entity counts disagree with header");
  }
  return store;
}

}  // namespace litrag
