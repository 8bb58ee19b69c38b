#include "litrag/research.hpp"

#include <algorithm>
#include <atomic>
#include <optional>
#include <regex>
#include <set>
#include <thread>

#include "litrag/enrichment.hpp"
#include "litrag/text_util.hpp"

namespace litrag {

void validate(const ResearchRequest& request) {
  if (text::trim(request.topic).empty()) throw ValidationError("topic must not be empty");
  if (text::utf8_length(request.topic) > defaults::kMaxQueryChars) throw ValidationError("topic is too long");
  if (request.max_subquestions < 1 || request.max_subquestions > defaults::kMaxResearchSubquestions) {
    throw ValidationError("max_subquestions must be in [1, " + std::to_string(defaults::kMaxResearchSubquestions) + "]");
  }
  validate(request.params);
}

ReviewContext retrieve_review_context(const std::string& topic, const SearchParams& params, const StoreSnapshot& store,
                                      EmbeddingProvider& embedder) {
  SearchParams review_only = params;
  review_only.doc_type_filter = DocType::kReview;
  const auto qvec = embed_texts({topic}, embedder, store.dimension()).front();
  ReviewContext ctx;
  ctx.hits = store.hierarchical_search(qvec, review_only);
  ctx.citations = build_citations(ctx.hits, store);
  return ctx;
}

namespace {

std::string strip_list_marker(std::string_view line) {
  static const std::regex marker(R"(^\s*(?:[-*•]|\d+[.)]|\(\d+\))\s+)");
  return std::regex_replace(std::string(line), marker, "", std::regex_constants::format_first_only);
}

}  // namespace

std::vector<std::string> generate_subquestions(const std::string& topic, const std::string& context_text,
                                               TextProvider& llm, int max_n, Diagnostics& diag) {
  if (max_n < 1) throw ValidationError("max_n must be at least 1");
  CompletionRequest req;
  req.task = Task::kSubquestions;
  req.system = "You plan literature research. Break a topic into focused questions an expert could answer.";
  req.prompt = "Review material:\n\n" + (context_text.empty() ? std::string("(none found)") : context_text) +
               "\n\nTopic: " + topic + "\n\nWrite up to " + std::to_string(max_n) +
               " distinct sub-questions that together cover the topic, one per line.";
  req.subject = topic;

  std::string reply;
  try {
    reply = llm.complete(req);
  } catch (const ProviderError& e) {
    diag.warn(std::string("sub-question generation failed, using the topic itself: ") + e.what());
    return {topic};
  }
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (auto line : text::split_lines(reply)) {
    auto q = std::string(text::trim(strip_list_marker(line)));
    if (q.empty()) continue;
    if (!seen.insert(text::to_lower(text::normalize_whitespace(q))).second) continue;
    out.push_back(std::move(q));
    if (static_cast<int>(out.size()) == max_n) break;
  }
  if (out.empty()) {
    diag.warn("no usable sub-questions, using the topic itself");
    out.push_back(topic);
  }
  return out;
}

std::vector<Citation> merge_bibliography(const std::vector<std::vector<Citation>>& lists) {
  std::vector<Citation> out;
  for (const auto& list : lists) {
    for (const auto& c : list) {
      if (std::any_of(out.begin(), out.end(), [&](const Citation& b) { return b.doc_id == c.doc_id; })) continue;
      Citation b = c;
      b.ref_index = static_cast<int>(out.size()) + 1;
      out.push_back(std::move(b));
    }
  }
  return out;
}

namespace {

int bibliography_index(const std::vector<Citation>& bibliography, const std::string& doc_id) {
  for (const auto& c : bibliography) {
    if (c.doc_id == doc_id) return c.ref_index;
  }
  return 0;
}

/// Rewrites "[ref k]" markers from a local citation list to bibliography numbers.
std::string remap_refs(const std::string& s, const std::vector<Citation>& local, const std::vector<Citation>& bibliography) {
  static const std::regex re(R"(\[ref (\d+)\])");
  std::string out;
  auto last = s.cbegin();
  for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    out.append(last, m[0].first);
    const int k = std::stoi(m[1].str());
    auto c = std::find_if(local.begin(), local.end(), [&](const Citation& x) { return x.ref_index == k; });
    const int mapped = c == local.end() ? 0 : bibliography_index(bibliography, c->doc_id);
    out += mapped ? "[ref " + std::to_string(mapped) + "]" : m[0].str();
    last = m[0].second;
  }
  out.append(last, s.cend());
  return out;
}

std::string context_blocks(const ReviewContext& ctx, const StoreSnapshot& store, std::size_t budget) {
  std::vector<std::string> blocks;
  std::size_t used = 0;
  for (const auto& h : ctx.hits) {
    const auto* chunk = store.find_chunk(h.chunk_id);
    if (!chunk) continue;
    const auto c = std::find_if(ctx.citations.begin(), ctx.citations.end(), [&](const Citation& x) { return x.doc_id == h.doc_id; });
    auto block = "[ref " + std::to_string(c->ref_index) + "] " + c->formatted + " :: " + chunk->text;
    used += text::utf8_length(block);
    if (used > budget && !blocks.empty()) break;
    blocks.push_back(std::move(block));
  }
  return text::join(blocks, "\n\n");
}

}  // namespace

ResearchReport run_research(const ResearchRequest& request, ResearchDeps deps) {
  validate(request);
  ResearchReport report;
  report.topic = request.topic;
  Diagnostics diag;

  // Stage 1: review-only context and overview.
  const auto ctx = retrieve_review_context(request.topic, request.params, deps.store, deps.embedder);
  report.overview_citations = ctx.citations;
  const auto context_text = context_blocks(ctx, deps.store, deps.options.prompt_budget);
  {
    CompletionRequest req;
    req.task = Task::kResearchOverview;
    req.system = "You summarize review literature for a researcher. Cite references by number, e.g. [ref 1].";
    req.prompt = "Review material:\n\n" + (context_text.empty() ? std::string("(none found)") : context_text) +
                 "\n\nWrite a concise overview of the topic: " + request.topic;
    req.subject = request.topic;
    try {
      report.overview = deps.llm.complete(req);
    } catch (const ProviderError& e) {
      diag.warn(std::string("overview generation failed: ") + e.what());
    }
  }

  report.subquestions = generate_subquestions(request.topic, context_text, deps.llm, request.max_subquestions, diag);

  // Stage 2: expert answers, at most `parallelism` in flight, assembled in
  // sub-question order.
  const auto n = report.subquestions.size();
  std::vector<std::optional<QAResponse>> answers(n);
  std::vector<std::string> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      QARequest qa{report.subquestions[i], request.params, std::nullopt};
      try {
        answers[i] = answer_query(qa, QADeps{deps.store, deps.llm, deps.embedder, deps.compounds, deps.options});
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const auto threads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(deps.parallelism, 1)), 1, n);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (answers[i]) {
      report.sub_answers.push_back({report.subquestions[i], std::move(*answers[i])});
    } else {
      report.failures.push_back({report.subquestions[i], errors[i]});
      diag.warn("sub-question failed: " + report.subquestions[i] + ": " + errors[i]);
    }
  }
  if (report.sub_answers.empty()) throw ProviderError("research: every sub-question failed");

  std::vector<std::vector<Citation>> lists{report.overview_citations};
  for (const auto& sa : report.sub_answers) lists.push_back(sa.response.citations);
  report.bibliography = merge_bibliography(lists);

  // Stage 3: synthesis with citation numbers remapped to the bibliography.
  std::string material;
  if (!report.overview.empty()) {
    material += "Overview: " + remap_refs(report.overview, report.overview_citations, report.bibliography) + "\n\n";
  }
  for (std::size_t i = 0; i < report.sub_answers.size(); ++i) {
    const auto& sa = report.sub_answers[i];
    std::vector<std::string> refs;
    for (const auto& c : sa.response.citations) {
      refs.push_back("[ref " + std::to_string(bibliography_index(report.bibliography, c.doc_id)) + "]");
    }
    material += "Sub-question " + std::to_string(i + 1) + ": " + sa.question + "\nAnswer: " +
                remap_refs(sa.response.answer_text, sa.response.citations, report.bibliography) + "\nSources: " +
                (refs.empty() ? std::string("none") : text::join(refs, ", ")) + "\n\n";
  }
  std::string bib;
  for (const auto& c : report.bibliography) bib += "[ref " + std::to_string(c.ref_index) + "] " + c.formatted + "\n";

  CompletionRequest req;
  req.task = Task::kSynthesis;
  req.system = "You synthesize expert answers into one coherent research report. Cite sources by bibliography number.";
  req.prompt = "Topic: " + request.topic + "\n\n" + material + "Bibliography:\n" + (bib.empty() ? "(empty)\n" : bib) +
               "\nWrite a synthesis of the findings above, citing sources as [ref k] with the bibliography numbers.";
  req.subject = request.topic;
  try {
    report.synthesis = deps.llm.complete(req);
  } catch (const ProviderError& e) {
    diag.warn(std::string("synthesis failed: ") + e.what());
  }
  report.warnings = std::move(diag.warnings);
  return report;
}

}  // namespace litrag
