#include "litrag/ingest.hpp"

#include <fstream>
#include <sstream>

#include "litrag/error.hpp"
#include "litrag/qa.hpp"
#include "litrag/serialize.hpp"
#include "litrag/text_util.hpp"

namespace litrag {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename F>
auto with_retries(int retries, F&& f) {
  for (int attempt = 0;; ++attempt) {
    try {
      return f();
    } catch (const ProviderError& e) {
      if (!e.retryable() || attempt >= retries) throw;
    }
  }
}

}  // namespace

std::vector<ManifestEntry> parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!root.is_object() || !root.contains("documents") || !root["documents"].is_array()) {
    throw ValidationError("manifest must be an object with a \"documents\" array");
  }
  std::vector<ManifestEntry> out;
  for (const auto& d : root["documents"]) {
    if (!d.is_object() || !d.contains("markdown") || !d.contains("metadata") || !d["markdown"].is_string() ||
        !d["metadata"].is_string()) {
      throw ValidationError("manifest entries need string fields \"markdown\" and \"metadata\"");
    }
    std::filesystem::path md = d["markdown"].get<std::string>();
    std::filesystem::path meta = d["metadata"].get<std::string>();
    if (md.is_relative()) md = base_dir / md;
    if (meta.is_relative()) meta = base_dir / meta;
    out.push_back({md, meta});
  }
  return out;
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& manifest) {
  return parse_manifest(read_file(manifest), manifest.parent_path());
}

RawDocument load_document(const ManifestEntry& entry) {
  RawDocument doc;
  json sidecar;
  try {
    sidecar = json::parse(read_file(entry.sidecar_path));
  } catch (const json::exception& e) {
    throw ValidationError(entry.sidecar_path.string() + ": " + e.what());
  }
  try {
    doc.metadata = sidecar.get<DocumentMetadata>();
  } catch (const ValidationError& e) {
    throw ValidationError(entry.sidecar_path.string() + ": " + e.what());
  }
  doc.abstract = sidecar.value("abstract", std::string());
  if (text::trim(doc.abstract).empty()) {
    throw ValidationError(entry.sidecar_path.string() + ": document " + doc.metadata.doc_id + " has no abstract");
  }
  doc.body_markdown = read_file(entry.markdown_path);
  return doc;
}

bool screen_document(const RawDocument& doc, const std::string& topic, TextProvider& llm, Diagnostics& diag) {
  CompletionRequest req;
  req.task = Task::kScreenDocument;
  req.system = "You screen scientific literature for a curated knowledge base. Reply with exactly one word: yes or no.";
  req.prompt = "Is this paper relevant to " + topic + "?\n\nTitle: " + doc.metadata.title + "\n\nAbstract: " + doc.abstract;
  req.subject = doc.abstract;
  try {
    return parse_yes_no(llm.complete(req));
  } catch (const ProviderError& e) {
    diag.warn("screening failed for " + doc.metadata.doc_id + ", document kept: " + e.what());
    return true;
  }
}

std::optional<PreparedDocument> prepare_document(const RawDocument& doc, TextProvider& llm, EmbeddingProvider& embedder,
                                                 std::size_t dimension, const IngestOptions& options, Diagnostics& diag) {
  validate(doc.metadata);
  if (text::trim(doc.abstract).empty()) throw ValidationError(doc.metadata.doc_id + ": abstract is empty");
  if (options.screen_topic && !screen_document(doc, *options.screen_topic, llm, diag)) return std::nullopt;

  auto chunks = segment_document(doc);
  if (options.clean) {
    for (auto& c : chunks) c = with_retries(options.provider_retries, [&] { return clean_chunk(c, llm, diag); });
  }
  if (options.merge) chunks = apply_merges(chunks, propose_merges(chunks, llm, diag, options.min_chunk_chars));

  PreparedDocument out;
  out.doc.metadata = doc.metadata;
  out.doc.abstract = doc.abstract;

  std::vector<std::string> texts{doc.abstract};
  std::vector<std::vector<HypotheticalQuestion>> questions;
  for (const auto& c : chunks) {
    texts.push_back(c.text);
    questions.push_back(generate_questions(c, llm, diag, options.max_questions));
    for (const auto& q : questions.back()) texts.push_back(q.text);
  }
  auto vectors = with_retries(options.provider_retries, [&] { return embed_texts(texts, embedder, dimension); });

  std::size_t next = 0;
  out.doc.abstract_vector = std::move(vectors[next++]);
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    ChunkIndexEntry e;
    e.chunk_id = chunks[i].chunk_id;
    e.doc_id = chunks[i].doc_id;
    e.heading_path = chunks[i].heading_path;
    e.text = chunks[i].text;
    e.chunk_vector = std::move(vectors[next++]);
    for (auto& q : questions[i]) e.questions.push_back({q.question_id, q.text, std::move(vectors[next++])});
    out.question_count += e.questions.size();
    out.chunks.push_back(std::move(e));
  }
  return out;
}

IngestSummary ingest_documents(const std::vector<ManifestEntry>& entries, VectorStore& store, TextProvider& llm,
                               EmbeddingProvider& embedder, const IngestOptions& options) {
  IngestSummary summary;
  std::set<std::string> seen;
  for (const auto& entry : entries) {
    auto raw = load_document(entry);
    if (!seen.insert(raw.metadata.doc_id).second) {
      throw ValidationError("duplicate doc_id in manifest: " + raw.metadata.doc_id);
    }
    Diagnostics diag;
    auto prepared = prepare_document(raw, llm, embedder, store.dimension(), options, diag);
    for (auto& w : diag.warnings) summary.warnings.push_back(std::move(w));
    if (!prepared) {
      ++summary.skipped;
      continue;
    }
    ++summary.documents;
    summary.chunks += prepared->chunks.size();
    summary.questions += prepared->question_count;
    store.upsert(std::move(prepared->doc), std::move(prepared->chunks));
  }
  return summary;
}

}  // namespace litrag
