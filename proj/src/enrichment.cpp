#include "litrag/enrichment.hpp"

#include "litrag/error.hpp"
#include "litrag/text_util.hpp"

namespace litrag {

std::vector<HypotheticalQuestion> generate_questions(const Chunk& chunk, TextProvider& llm, Diagnostics& diag,
                                                     int max_questions) {
  if (max_questions < 1) throw ValidationError("max_questions must be at least 1");
  CompletionRequest req;
  req.task = Task::kGenerateQuestions;
  req.system = "You write questions that a passage from a scientific paper answers.";
  req.prompt = "Write up to " + std::to_string(max_questions) +
               " distinct questions that the following passage answers, one per line, without numbering.\n\n" +
               (chunk.heading_path.empty() ? std::string() : "Section: " + text::join(chunk.heading_path, " > ") + "\n") +
               chunk.text;
  req.subject = chunk.text;

  std::string reply;
  try {
    reply = llm.complete(req);
  } catch (const ProviderError& e) {
    diag.warn("generate_questions: provider failed for " + chunk.chunk_id + ": " + e.what());
    return {};
  }

  std::vector<HypotheticalQuestion> out;
  for (auto line : text::split_lines(reply)) {
    auto q = text::trim(line);
    if (q.empty()) continue;
    if (static_cast<int>(out.size()) == max_questions) break;
    out.push_back({chunk.chunk_id + "/q" + std::to_string(out.size() + 1), chunk.chunk_id, std::string(q)});
  }
  if (out.empty()) diag.warn("generate_questions: no questions for " + chunk.chunk_id);
  return out;
}

std::string clip_for_embedding(const std::string& text, std::size_t limit) {
  return std::string(text::utf8_prefix(text, limit));
}

std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& texts, EmbeddingProvider& embedder,
                                         std::size_t dimension) {
  for (const auto& t : texts) {
    if (text::trim(t).empty()) throw ValidationError("embed_texts: empty text");
  }
  if (texts.empty()) return {};
  if (embedder.dimension() != dimension) {
    throw ConfigError("embedder " + embedder.name() + " has dimension " + std::to_string(embedder.dimension()) +
                      ", store expects " + std::to_string(dimension));
  }
  std::vector<std::string> clipped;
  clipped.reserve(texts.size());
  for (const auto& t : texts) clipped.push_back(clip_for_embedding(t));

  auto raw = embedder.embed(clipped);
  if (raw.size() != texts.size()) {
    throw ProviderError("embedder returned " + std::to_string(raw.size()) + " vectors for " +
                            std::to_string(texts.size()) + " texts",
                        false);
  }
  std::vector<EmbeddingVector> out;
  out.reserve(raw.size());
  for (const auto& v : raw) {
    if (v.size() != dimension) {
      throw ConfigError("embedder returned a " + std::to_string(v.size()) + "-dimensional vector, store expects " +
                        std::to_string(dimension));
    }
    out.push_back(EmbeddingVector::normalized(std::span<const float>(v)));
  }
  return out;
}

}  // namespace litrag
