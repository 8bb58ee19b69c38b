#pragma once

#include <string>
#include <utility>
#include <vector>

#include "litrag/qa.hpp"

namespace litrag {

struct ResearchRequest {
  std::string topic;
  int max_subquestions = defaults::kResearchSubquestions;
  SearchParams params;
};

void validate(const ResearchRequest& request);

struct SubAnswer {
  std::string question;
  QAResponse response;
};

struct SubFailure {
  std::string question;
  std::string error;
};

struct ResearchReport {
  std::string topic;
  std::string overview;
  std::vector<Citation> overview_citations;
  std::vector<std::string> subquestions;
  std::vector<SubAnswer> sub_answers;
  std::vector<SubFailure> failures;
  std::string synthesis;
  std::vector<Citation> bibliography;
  std::vector<std::string> warnings;
};

struct ReviewContext {
  std::vector<Hit> hits;
  std::vector<Citation> citations;
};

struct ResearchDeps {
  const StoreSnapshot& store;
  TextProvider& llm;
  EmbeddingProvider& embedder;
  CompoundProvider* compounds = nullptr;
  QAOptions options{};
  int parallelism = defaults::kResearchParallelism;
};

/// Two-stage search restricted to review documents.
ReviewContext retrieve_review_context(const std::string& topic, const SearchParams& params,
                                      const StoreSnapshot& store, EmbeddingProvider& embedder);

/// Line-wise, deduplicated, at most `max_n`. Falls back to `{topic}` when the
/// provider fails or yields nothing usable.
std::vector<std::string> generate_subquestions(const std::string& topic, const std::string& context_text,
                                               TextProvider& llm, int max_n, Diagnostics& diag);

/// Citations deduplicated by doc_id and renumbered 1.. in first-appearance
/// order.
std::vector<Citation> merge_bibliography(const std::vector<std::vector<Citation>>& lists);

/// Review context -> overview -> sub-questions -> expert answers (up to
/// `parallelism` at once) -> synthesis. A failed sub-question is recorded and
/// skipped; throws ProviderError only when every sub-question fails.
ResearchReport run_research(const ResearchRequest& request, ResearchDeps deps);

}  // namespace litrag
