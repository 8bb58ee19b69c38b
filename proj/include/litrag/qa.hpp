#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "litrag/corpus.hpp"
#include "litrag/defaults.hpp"
#include "litrag/error.hpp"
#include "litrag/providers.hpp"
#include "litrag/vector_store.hpp"

namespace litrag {

struct QARequest {
  std::string query;
  SearchParams params;
  std::optional<std::string> session_id;
};

struct Citation {
  int ref_index = 0;
  std::string doc_id;
  std::string formatted;
  std::optional<std::string> url;

  bool operator==(const Citation&) const = default;
};

enum class EventKind { kMolecules, kCitations, kAnswer };

const char* to_string(EventKind kind);

struct QAEvent {
  EventKind kind;
  std::variant<std::vector<MoleculeRecord>, std::vector<Citation>, std::string> payload;
};

struct QAResponse {
  std::vector<QAEvent> events;
  std::string answer_text;
  std::vector<Citation> citations;
  std::vector<MoleculeRecord> molecules;
  std::vector<Hit> trace;
  std::vector<std::string> warnings;
  std::optional<std::string> session_id;
};

/// Thrown when the answer provider fails. Carries everything computed before
/// the failure (molecules, citations, trace) so a client can still show it.
class AnswerError : public ProviderError {
 public:
  AnswerError(const std::string& what, QAResponse partial)
      : ProviderError(what), partial_(std::move(partial)) {}

  const QAResponse& partial() const { return partial_; }

 private:
  QAResponse partial_;
};

struct QAOptions {
  std::size_t prompt_budget = defaults::kPromptBudget;
  std::size_t max_compounds = defaults::kMaxCompounds;
  std::string domain_topic = "terpenoid molecules and other natural products";
};

struct QADeps {
  const StoreSnapshot& store;
  TextProvider& llm;
  EmbeddingProvider& embedder;
  CompoundProvider* compounds = nullptr;
  QAOptions options{};
};

/// Yes/no relevance gate. Anything that does not read as "yes" is false.
bool parse_yes_no(std::string_view completion);

bool assess_relevance(const std::string& query, TextProvider& llm, Diagnostics& diag,
                      const std::string& domain_topic = QAOptions{}.domain_topic);

/// At most `limit` records, each with a non-empty SMILES. Client failure
/// degrades to an empty list plus a warning.
std::vector<MoleculeRecord> lookup_compounds(const std::string& query, CompoundProvider& client,
                                             Diagnostics& diag,
                                             std::size_t limit = defaults::kMaxCompounds);

/// One citation per document, numbered 1.. by first appearance in `hits`.
std::vector<Citation> build_citations(const std::vector<Hit>& hits, const StoreSnapshot& store);

/// Numbered reference blocks "[ref k] <citation> :: <chunk text>" in hit order,
/// then answering instructions, then the query. While the prompt exceeds
/// `budget` characters the lowest-scored block is dropped; the top block is
/// kept and its text clipped if it alone is too long.
std::string build_prompt(const std::string& query, const std::vector<Hit>& hits,
                         const std::map<std::string, std::string>& chunk_texts,
                         const std::vector<Citation>& citations,
                         std::size_t budget = defaults::kPromptBudget);

extern const char* const kNoSupportInstruction;

/// Replaces verbatim copies of retrieved chunk text in an answer with a
/// "[ref k]" marker so raw article content never reaches the client.
std::string redact_raw_chunks(std::string answer, const std::vector<Hit>& hits,
                              const std::map<std::string, std::string>& chunk_texts,
                              const std::vector<Citation>& citations);

/// relevance -> compounds (if relevant) -> embed -> two-stage search ->
/// citations -> prompt -> answer. Events are molecules (when any), citations,
/// answer. Throws ValidationError for a bad request and AnswerError when the
/// answer provider fails.
QAResponse answer_query(const QARequest& request, QADeps deps);

void validate(const QARequest& request);

}  // namespace litrag
