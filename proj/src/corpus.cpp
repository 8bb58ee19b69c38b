#include "litrag/corpus.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "litrag/error.hpp"
#include "litrag/text_util.hpp"

namespace litrag {

const char* to_string(DocType type) { return type == DocType::kReview ? "review" : "research"; }

DocType parse_doc_type(std::string_view s) {
  if (s == "review") return DocType::kReview;
  if (s == "research") return DocType::kResearch;
  throw ValidationError("doc_type must be \"research\" or \"review\", got \"" + std::string(s) + "\"");
}

void validate(const DocumentMetadata& meta) {
  if (meta.doc_id.empty()) throw ValidationError("doc_id is empty");
  if (meta.doc_id.find('#') != std::string::npos) {
    throw ValidationError("doc_id must not contain '#': " + meta.doc_id);
  }
  if (meta.year && (*meta.year < 1800 || *meta.year > 2100)) {
    throw ValidationError(meta.doc_id + ": year " + std::to_string(*meta.year) + " outside [1800, 2100]");
  }
}

Chunk make_chunk(std::string chunk_id, std::string doc_id, std::vector<std::string> heading_path,
                 std::string text) {
  Chunk c;
  c.chunk_id = std::move(chunk_id);
  c.doc_id = std::move(doc_id);
  c.level = static_cast<int>(heading_path.size());
  c.heading_path = std::move(heading_path);
  c.char_count = text::utf8_length(text);
  c.text = std::move(text);
  return c;
}

// ---------------------------------------------------------------------------
// Segmentation

namespace {

// Level 1-3 for "#", "##", "###" followed by a space; 0 otherwise.
int heading_level(std::string_view line, std::string_view& title) {
  std::size_t hashes = 0;
  while (hashes < line.size() && line[hashes] == '#') ++hashes;
  if (hashes == 0 || hashes > 3 || hashes >= line.size() || line[hashes] != ' ') return 0;
  title = text::trim(line.substr(hashes + 1));
  return static_cast<int>(hashes);
}

}  // namespace

std::vector<Section> parse_markdown(std::string_view markdown) {
  std::vector<Section> sections;
  // Titles by source heading level (index 0..2); empty slot = level absent.
  std::vector<std::optional<std::string>> open(3);
  std::vector<std::string> path;
  int level = 0;
  bool have_section = false;
  std::vector<std::string_view> body;

  auto flush = [&] {
    std::string joined;
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (i) joined += '\n';
      joined += body[i];
    }
    auto trimmed = std::string(text::trim(joined));
    if (have_section || !trimmed.empty()) sections.push_back(Section{path, level, std::move(trimmed)});
    body.clear();
  };

  for (auto line : text::split_lines(markdown)) {
    std::string_view title;
    const int h = heading_level(line, title);
    if (h == 0) {
      body.push_back(line);
      continue;
    }
    flush();
    have_section = true;
    open[h - 1] = std::string(title);
    for (int deeper = h; deeper < 3; ++deeper) open[deeper].reset();
    path.clear();
    for (int i = 0; i < h; ++i) {
      if (open[i]) path.push_back(*open[i]);
    }
    level = static_cast<int>(path.size());
  }
  flush();
  return sections;
}

std::string render_sections(const std::vector<Section>& sections) {
  std::string out;
  for (const auto& s : sections) {
    if (s.level > 0) {
      out += std::string(static_cast<std::size_t>(s.level), '#');
      out += ' ';
      out += s.heading_path.back();
      out += '\n';
    }
    if (!s.body.empty()) {
      out += s.body;
      out += '\n';
    }
  }
  return out;
}

std::vector<Chunk> segment_document(const RawDocument& doc) {
  std::vector<Chunk> chunks;
  int ordinal = 0;
  for (auto& section : parse_markdown(doc.body_markdown)) {
    if (section.body.empty()) continue;
    std::ostringstream id;
    id << doc.metadata.doc_id << '#';
    id.width(4);
    id.fill('0');
    id << ++ordinal;
    chunks.push_back(make_chunk(id.str(), doc.metadata.doc_id, std::move(section.heading_path),
                                std::move(section.body)));
  }
  return chunks;
}

// ---------------------------------------------------------------------------
// Cleaning and merging

Chunk clean_chunk(const Chunk& chunk, TextProvider& llm, Diagnostics& diag) {
  CompletionRequest req;
  req.task = Task::kCleanChunk;
  req.system =
      "You clean text extracted from scientific papers. Remove non-content elements such as formatting "
      "symbols, figure and table captions, page furniture and irrelevant fragments. Keep every factual "
      "statement. Return only the cleaned text.";
  req.prompt = "Clean the following passage:\n\n" + chunk.text;
  req.subject = chunk.text;
  auto cleaned = std::string(text::trim(llm.complete(req)));

  Chunk out = chunk;
  if (cleaned.empty()) {
    diag.warn("clean_chunk: empty provider output for " + chunk.chunk_id + ", original text kept");
  } else {
    out.text = std::move(cleaned);
  }
  out.char_count = text::utf8_length(out.text);
  return out;
}

std::string check_merge_group(const std::vector<Chunk>& chunks, const std::vector<std::string>& group,
                              const std::vector<bool>& used) {
  if (group.size() < 2) return "group has fewer than two members";
  std::optional<std::size_t> prev;
  for (const auto& id : group) {
    auto it = std::find_if(chunks.begin(), chunks.end(), [&](const Chunk& c) { return c.chunk_id == id; });
    if (it == chunks.end()) return "unknown chunk_id " + id;
    auto pos = static_cast<std::size_t>(it - chunks.begin());
    if (used[pos]) return "chunk_id " + id + " appears in more than one group";
    if (prev) {
      if (chunks[*prev].doc_id != it->doc_id) return "group spans documents " + chunks[*prev].doc_id + " and " + it->doc_id;
      if (pos != *prev + 1) return "group members are not consecutive at " + id;
    }
    prev = pos;
  }
  return {};
}

void validate_plan(const std::vector<Chunk>& chunks, const MergePlan& plan) {
  std::vector<bool> used(chunks.size(), false);
  for (const auto& group : plan.groups) {
    auto problem = check_merge_group(chunks, group, used);
    if (!problem.empty()) throw ValidationError("invalid merge plan: " + problem);
    for (const auto& id : group) {
      auto it = std::find_if(chunks.begin(), chunks.end(), [&](const Chunk& c) { return c.chunk_id == id; });
      used[static_cast<std::size_t>(it - chunks.begin())] = true;
    }
  }
}

namespace {

std::vector<std::string> split_ids(std::string_view line) {
  std::vector<std::string> ids;
  std::string cur;
  for (char c : line) {
    if (c == ',' || c == ' ' || c == '\t' || c == ';' || c == '[' || c == ']' || c == '"') {
      if (!cur.empty()) ids.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) ids.push_back(std::move(cur));
  return ids;
}

}  // namespace

MergePlan propose_merges(const std::vector<Chunk>& chunks, TextProvider& llm, Diagnostics& diag,
                         std::size_t min_chunk_chars) {
  std::set<std::string> candidates;
  std::string listing;
  for (const auto& c : chunks) {
    if (c.char_count >= min_chunk_chars) continue;
    candidates.insert(c.chunk_id);
    listing += c.chunk_id + " [" + text::join(c.heading_path, " > ") + "]: " + text::normalize_whitespace(c.text) + "\n";
  }
  if (candidates.size() < 2) return {};

  CompletionRequest req;
  req.task = Task::kProposeMerges;
  req.system =
      "You consolidate short passages from one scientific paper. Propose merges only for adjacent passages "
      "that are too short to stand alone or that cover the same topic.";
  req.prompt =
      "Candidate passages (id [heading path]: text), in document order:\n\n" + listing +
      "\nReply with one merge group per line as comma-separated ids of consecutive passages. Reply with "
      "nothing if no merge is useful.";
  req.subject = listing;

  std::string reply;
  try {
    reply = llm.complete(req);
  } catch (const ProviderError& e) {
    diag.warn(std::string("propose_merges: provider failed, document left unmerged: ") + e.what());
    return {};
  }

  MergePlan plan;
  std::vector<bool> used(chunks.size(), false);
  for (auto line : text::split_lines(reply)) {
    auto group = split_ids(line);
    if (group.empty()) continue;
    bool all_candidates = std::all_of(group.begin(), group.end(), [&](const auto& id) { return candidates.count(id) > 0; });
    auto problem = all_candidates ? check_merge_group(chunks, group, used) : std::string("non-candidate chunk in group");
    if (!problem.empty()) {
      diag.warn("propose_merges: dropped group \"" + std::string(text::trim(line)) + "\": " + problem);
      continue;
    }
    for (const auto& id : group) {
      auto it = std::find_if(chunks.begin(), chunks.end(), [&](const Chunk& c) { return c.chunk_id == id; });
      used[static_cast<std::size_t>(it - chunks.begin())] = true;
    }
    plan.groups.push_back(std::move(group));
  }
  return plan;
}

std::vector<Chunk> apply_merges(const std::vector<Chunk>& chunks, const MergePlan& plan) {
  validate_plan(chunks, plan);
  std::map<std::string, const std::vector<std::string>*> group_of_first;
  std::set<std::string> absorbed;
  for (const auto& g : plan.groups) {
    group_of_first[g.front()] = &g;
    absorbed.insert(g.begin() + 1, g.end());
  }
  std::map<std::string, const Chunk*> by_id;
  for (const auto& c : chunks) by_id[c.chunk_id] = &c;

  std::vector<Chunk> out;
  out.reserve(chunks.size());
  for (const auto& c : chunks) {
    if (absorbed.count(c.chunk_id)) continue;
    auto g = group_of_first.find(c.chunk_id);
    if (g == group_of_first.end()) {
      out.push_back(c);
      continue;
    }
    std::vector<std::string> texts;
    for (const auto& id : *g->second) texts.push_back(by_id.at(id)->text);
    out.push_back(make_chunk(c.chunk_id, c.doc_id, c.heading_path, text::join(texts, "\n\n")));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Citations

std::string format_citation(const DocumentMetadata& meta) {
  std::vector<std::string> authors;
  for (const auto& a : meta.authors) {
    auto t = std::string(text::trim(a));
    if (!t.empty()) authors.push_back(std::move(t));
  }
  const auto title = std::string(text::trim(meta.title));
  if (authors.empty() && title.empty()) {
    throw ValidationError("format_citation: " + meta.doc_id + " has neither authors nor title");
  }

  std::string lead;
  if (authors.empty()) {
    lead = title;
  } else {
    const std::size_t shown = std::min<std::size_t>(authors.size(), 3);
    lead = text::join(std::vector<std::string>(authors.begin(), authors.begin() + static_cast<long>(shown)), ", ");
    if (authors.size() > 3) lead += ", et al";
  }

  // Source part: "Journal, Year, Vol(Issue): Pages"
  std::vector<std::string> parts;
  const auto journal = std::string(text::trim(meta.journal));
  if (!journal.empty()) parts.push_back(journal);
  if (meta.year) parts.push_back(std::to_string(*meta.year));
  std::string volume = std::string(text::trim(meta.volume));
  const auto issue = std::string(text::trim(meta.issue));
  if (!issue.empty()) volume += "(" + issue + ")";
  const auto pages = std::string(text::trim(meta.pages));
  if (!volume.empty()) {
    parts.push_back(pages.empty() ? volume : volume + ": " + pages);
  } else if (!pages.empty()) {
    parts.push_back(pages);
  }

  std::string out = lead;
  if (out.back() != '.') out += '.';
  if (!parts.empty()) {
    out += ' ';
    out += text::join(parts, ", ");
    out += '.';
  }
  return out;
}

}  // namespace litrag
