#include "litrag/qa.hpp"

#include <algorithm>
#include <cctype>

#include "litrag/enrichment.hpp"
#include "litrag/text_util.hpp"

namespace litrag {

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kMolecules: return "molecules";
    case EventKind::kCitations: return "citations";
    case EventKind::kAnswer: return "answer";
  }
  return "answer";
}

const char* const kNoSupportInstruction =
    "No knowledge-base support was found for this question. Answer from general knowledge and state explicitly, "
    "at the start of the answer, that it has no knowledge-base support.";

namespace {

constexpr const char* kAnswerInstruction =
    "Answer the question using the numbered references above. Cite each statement with its reference marker, "
    "for example [ref 1]. Write your own synthesis and do not copy reference passages verbatim. If the "
    "references do not cover the question, say so.";

constexpr std::size_t kMinRedactChars = 40;

}  // namespace

void validate(const QARequest& request) {
  const auto n = text::utf8_length(request.query);
  if (text::trim(request.query).empty()) throw ValidationError("query must not be empty");
  if (n > defaults::kMaxQueryChars) {
    throw ValidationError("query has " + std::to_string(n) + " characters, limit is " +
                          std::to_string(defaults::kMaxQueryChars));
  }
  validate(request.params);
}

bool parse_yes_no(std::string_view completion) {
  auto lower = text::to_lower(text::trim(completion));
  std::size_t i = 0;
  while (i < lower.size() && !std::isalpha(static_cast<unsigned char>(lower[i]))) ++i;
  std::size_t j = i;
  while (j < lower.size() && std::isalpha(static_cast<unsigned char>(lower[j]))) ++j;
  return lower.substr(i, j - i) == "yes";
}

bool assess_relevance(const std::string& query, TextProvider& llm, Diagnostics& diag, const std::string& domain_topic) {
  CompletionRequest req;
  req.task = Task::kAssessRelevance;
  req.system = "You classify questions. Reply with exactly one word: yes or no.";
  req.prompt = "Is the following question related to " + domain_topic + "?\n\nQuestion: " + query;
  req.subject = query;
  try {
    return parse_yes_no(llm.complete(req));
  } catch (const ProviderError& e) {
    diag.warn(std::string("relevance check failed, compound lookup skipped: ") + e.what());
    return false;
  }
}

std::vector<MoleculeRecord> lookup_compounds(const std::string& query, CompoundProvider& client, Diagnostics& diag,
                                             std::size_t limit) {
  std::vector<MoleculeRecord> found;
  try {
    found = client.lookup(query);
  } catch (const std::exception& e) {
    diag.warn(std::string("compound lookup failed: ") + e.what());
    return {};
  }
  std::vector<MoleculeRecord> out;
  for (auto& rec : found) {
    if (out.size() == limit) break;
    if (text::trim(rec.smiles).empty() || text::trim(rec.name).empty()) continue;
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<Citation> build_citations(const std::vector<Hit>& hits, const StoreSnapshot& store) {
  std::vector<Citation> out;
  for (const auto& h : hits) {
    if (std::any_of(out.begin(), out.end(), [&](const Citation& c) { return c.doc_id == h.doc_id; })) continue;
    Citation c;
    c.ref_index = static_cast<int>(out.size()) + 1;
    c.doc_id = h.doc_id;
    if (const auto* doc = store.find_doc(h.doc_id)) {
      try {
        c.formatted = format_citation(doc->metadata);
      } catch (const ValidationError&) {
        c.formatted = h.doc_id;
      }
      c.url = doc->metadata.source_url;
    } else {
      c.formatted = h.doc_id;
    }
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

int ref_of(const std::vector<Citation>& citations, const std::string& doc_id) {
  for (const auto& c : citations) {
    if (c.doc_id == doc_id) return c.ref_index;
  }
  return 0;
}

std::string block_text(int ref, const std::string& citation, std::string_view chunk_text) {
  return "[ref " + std::to_string(ref) + "] " + citation + " :: " + std::string(chunk_text);
}

std::string assemble(const std::vector<std::string>& blocks, const std::string& query) {
  std::string out;
  if (blocks.empty()) {
    out = kNoSupportInstruction;
  } else {
    out = "Reference material:\n\n" + text::join(blocks, "\n\n") + "\n\n" + kAnswerInstruction;
  }
  out += "\n\nQuestion: " + query;
  return out;
}

}  // namespace

std::string build_prompt(const std::string& query, const std::vector<Hit>& hits,
                         const std::map<std::string, std::string>& chunk_texts, const std::vector<Citation>& citations,
                         std::size_t budget) {
  struct Block {
    std::size_t position;
    double score;
    int ref;
    std::string citation;
    std::string text;
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const auto& h = hits[i];
    auto text_it = chunk_texts.find(h.chunk_id);
    const int ref = ref_of(citations, h.doc_id);
    if (text_it == chunk_texts.end() || ref == 0) continue;
    const auto& cit = *std::find_if(citations.begin(), citations.end(), [&](const Citation& c) { return c.ref_index == ref; });
    blocks.push_back({i, h.score, ref, cit.formatted, text_it->second});
  }

  auto render = [&] {
    std::vector<std::string> rendered;
    for (const auto& b : blocks) rendered.push_back(block_text(b.ref, b.citation, b.text));
    return assemble(rendered, query);
  };

  auto prompt = render();
  while (text::utf8_length(prompt) > budget && blocks.size() > 1) {
    // Lowest score goes first; among equal scores the later one.
    auto victim = std::min_element(blocks.begin(), blocks.end(), [](const Block& a, const Block& b) {
      return a.score != b.score ? a.score < b.score : a.position > b.position;
    });
    blocks.erase(victim);
    prompt = render();
  }
  if (text::utf8_length(prompt) > budget && blocks.size() == 1) {
    const auto overflow = text::utf8_length(prompt) - budget;
    const auto len = text::utf8_length(blocks.front().text);
    blocks.front().text = std::string(text::utf8_prefix(blocks.front().text, len > overflow ? len - overflow : 0));
    prompt = render();
  }
  return prompt;
}

std::string redact_raw_chunks(std::string answer, const std::vector<Hit>& hits,
                              const std::map<std::string, std::string>& chunk_texts,
                              const std::vector<Citation>& citations) {
  for (const auto& h : hits) {
    auto it = chunk_texts.find(h.chunk_id);
    if (it == chunk_texts.end()) continue;
    const auto raw = std::string(text::trim(it->second));
    if (text::utf8_length(raw) < kMinRedactChars) continue;
    const auto marker = "[ref " + std::to_string(ref_of(citations, h.doc_id)) + "]";
    for (auto pos = answer.find(raw); pos != std::string::npos; pos = answer.find(raw, pos + marker.size())) {
      answer.replace(pos, raw.size(), marker);
    }
  }
  return answer;
}

QAResponse answer_query(const QARequest& request, QADeps deps) {
  validate(request);
  QAResponse response;
  response.session_id = request.session_id;
  Diagnostics diag;

  const bool relevant = assess_relevance(request.query, deps.llm, diag, deps.options.domain_topic);
  if (relevant && deps.compounds) {
    response.molecules = lookup_compounds(request.query, *deps.compounds, diag, deps.options.max_compounds);
  }
  if (!response.molecules.empty()) response.events.push_back({EventKind::kMolecules, response.molecules});

  auto fail = [&](const std::string& what) {
    response.warnings = diag.warnings;
    throw AnswerError(what, response);
  };

  EmbeddingVector qvec;
  try {
    qvec = embed_texts({request.query}, deps.embedder, deps.store.dimension()).front();
  } catch (const ProviderError& e) {
    fail(std::string("query embedding failed: ") + e.what());
  }

  response.trace = deps.store.hierarchical_search(qvec, request.params);
  response.citations = build_citations(response.trace, deps.store);
  response.events.push_back({EventKind::kCitations, response.citations});

  std::map<std::string, std::string> chunk_texts;
  for (const auto& h : response.trace) {
    if (const auto* c = deps.store.find_chunk(h.chunk_id)) chunk_texts[h.chunk_id] = c->text;
  }

  CompletionRequest req;
  req.task = Task::kAnswer;
  req.system =
      "You are a domain expert answering questions about the scientific literature. Ground every claim in the "
      "supplied references and cite them by number.";
  req.prompt = build_prompt(request.query, response.trace, chunk_texts, response.citations, deps.options.prompt_budget);
  req.subject = request.query;

  std::string answer;
  try {
    answer = deps.llm.complete(req);
  } catch (const ProviderError& e) {
    fail(std::string("answer generation failed: ") + e.what());
  }
  response.answer_text = redact_raw_chunks(std::move(answer), response.trace, chunk_texts, response.citations);
  response.events.push_back({EventKind::kAnswer, response.answer_text});
  response.warnings = std::move(diag.warnings);
  return response;
}

}  // namespace litrag
