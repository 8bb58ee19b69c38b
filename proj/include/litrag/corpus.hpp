#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "litrag/defaults.hpp"
#include "litrag/providers.hpp"

namespace litrag {

enum class DocType { kResearch, kReview };

const char* to_string(DocType type);
DocType parse_doc_type(std::string_view s);

struct DocumentMetadata {
  std::string doc_id;
  std::string title;
  // Each entry is already in citation form, e.g. "Dhingra A K".
  std::vector<std::string> authors;
  std::string journal;
  std::string doi;
  std::optional<int> year;
  DocType doc_type = DocType::kResearch;
  std::optional<std::string> source_url;
  std::string volume;
  std::string issue;
  std::string pages;

  bool operator==(const DocumentMetadata&) const = default;
};

/// Throws ValidationError when doc_id is empty or year is outside [1800, 2100].
void validate(const DocumentMetadata& meta);

struct RawDocument {
  DocumentMetadata metadata;
  std::string abstract;
  std::string body_markdown;
};

struct Section {
  std::vector<std::string> heading_path;
  int level = 0;
  std::string body;

  bool operator==(const Section&) const = default;
};

struct Chunk {
  std::string chunk_id;
  std::string doc_id;
  std::vector<std::string> heading_path;
  int level = 0;
  std::string text;
  std::size_t char_count = 0;

  bool operator==(const Chunk&) const = default;
};

Chunk make_chunk(std::string chunk_id, std::string doc_id, std::vector<std::string> heading_path,
                 std::string text);

struct MergePlan {
  std::vector<std::vector<std::string>> groups;

  bool empty() const { return groups.empty(); }
};

/// Collects non-fatal problems (degraded provider output, skipped stages).
struct Diagnostics {
  std::vector<std::string> warnings;

  void warn(std::string message) { warnings.push_back(std::move(message)); }
  bool empty() const { return warnings.empty(); }
};

/// Splits Markdown at heading lines of one to three '#' followed by a space.
/// Text before the first heading forms a level-0 section when non-blank;
/// "####" and deeper are ordinary body text. A heading whose parent levels are
/// missing attaches to the nearest shallower heading, so `level` is always the
/// length of `heading_path`. Section bodies are trimmed of surrounding
/// whitespace. Never fails.
std::vector<Section> parse_markdown(std::string_view markdown);

/// Inverse of parse_markdown up to whitespace; used to check idempotence.
std::string render_sections(const std::vector<Section>& sections);

/// One chunk per section with a non-blank body, ids "<doc_id>#0001" onwards.
std::vector<Chunk> segment_document(const RawDocument& doc);

/// Replaces the chunk text with the provider's cleaned version. Blank provider
/// output keeps the original text and records a warning. ProviderError from
/// the provider propagates.
Chunk clean_chunk(const Chunk& chunk, TextProvider& llm, Diagnostics& diag);

/// Checks MergePlan invariants against `chunks` (document order): every id is
/// known, used at most once, groups have two or more members of one document,
/// and each group is a run of consecutive chunks. Returns an empty string when
/// valid, otherwise a description of the first violation.
std::string check_merge_group(const std::vector<Chunk>& chunks,
                              const std::vector<std::string>& group,
                              const std::vector<bool>& used);
void validate_plan(const std::vector<Chunk>& chunks, const MergePlan& plan);

/// Offers chunks shorter than `min_chunk_chars` to the provider and keeps the
/// valid groups it suggests. Provider failure yields an empty plan.
MergePlan propose_merges(const std::vector<Chunk>& chunks, TextProvider& llm, Diagnostics& diag,
                         std::size_t min_chunk_chars = defaults::kMinChunkChars);

/// Collapses each group into its first member, texts joined by a blank line.
/// Throws ValidationError (and changes nothing) when the plan is invalid.
std::vector<Chunk> apply_merges(const std::vector<Chunk>& chunks, const MergePlan& plan);

/// "Surname I, Surname I, Surname I, et al. Journal, Year, Vol(Issue): Pages."
/// Missing fields are omitted together with their separators. Without authors
/// the title leads. Throws ValidationError when both are absent.
std::string format_citation(const DocumentMetadata& meta);

}  // namespace litrag
