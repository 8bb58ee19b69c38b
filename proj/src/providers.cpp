#include "litrag/providers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "litrag/embedding.hpp"
#include "litrag/error.hpp"
#include "litrag/text_util.hpp"

namespace litrag {

const char* task_name(Task task) {
  switch (task) {
    case Task::kGeneric: return "generic";
    case Task::kScreenDocument: return "screen_document";
    case Task::kCleanChunk: return "clean_chunk";
    case Task::kProposeMerges: return "propose_merges";
    case Task::kGenerateQuestions: return "generate_questions";
    case Task::kAssessRelevance: return "assess_relevance";
    case Task::kAnswer: return "answer";
    case Task::kResearchOverview: return "research_overview";
    case Task::kSubquestions: return "subquestions";
    case Task::kSynthesis: return "synthesis";
    case Task::kMultipleChoice: return "multiple_choice";
  }
  return "generic";
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<std::string> words_of(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || u >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace

HashEmbedder::HashEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw ConfigError("embedding dimension must be positive");
}

std::vector<float> HashEmbedder::embed_one(const std::string& text) const {
  std::uint64_t state = text::fnv1a64(text);
  std::vector<double> raw(dimension_);
  for (auto& v : raw) {
    const double unit = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    v = 2.0 * unit - 1.0;
  }
  auto vec = EmbeddingVector::normalized(std::span<const double>(raw));
  return {vec.values().begin(), vec.values().end()};
}

std::vector<std::vector<float>> HashEmbedder::embed(const std::vector<std::string>& texts) {
  std::vector<std::vector<float>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_one(t));
  return out;
}

TokenHashEmbedder::TokenHashEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw ConfigError("embedding dimension must be positive");
}

std::vector<std::vector<float>> TokenHashEmbedder::embed(const std::vector<std::string>& texts) {
  std::vector<std::vector<float>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    std::vector<float> v(dimension_, 0.0f);
    for (const auto& w : words_of(t)) {
      if (w.size() < 3) continue;
      const auto h = text::fnv1a64(w);
      v[h % dimension_] += (h >> 63) ? -1.0f : 1.0f;
    }
    // A constant component keeps word-less texts embeddable.
    v[0] += 0.01f;
    out.push_back(std::move(v));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<int> ref_numbers(const std::string& prompt) {
  static const std::regex re(R"(\[ref (\d+)\])");
  std::set<int> seen;
  std::vector<int> out;
  for (auto it = std::sregex_iterator(prompt.begin(), prompt.end(), re); it != std::sregex_iterator(); ++it) {
    int k = std::stoi((*it)[1].str());
    if (seen.insert(k).second) out.push_back(k);
  }
  return out;
}

std::string ref_list(const std::vector<int>& refs) {
  std::string out;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (i) out += ", ";
    out += "[ref " + std::to_string(refs[i]) + "]";
  }
  return out;
}

bool mentions_domain(const std::string& s) {
  static const char* const kStems[] = {"terpen", "paclitaxel", "taxol", "artemisinin", "molecule",
                                       "compound", "menthol", "limonene", "smiles", "natural product"};
  const auto lower = text::to_lower(s);
  return std::any_of(std::begin(kStems), std::end(kStems),
                     [&](const char* stem) { return lower.find(stem) != std::string::npos; });
}

std::string offline_clean(const std::string& input) {
  static const std::regex image(R"(^\s*!\[[^\]]*\]\([^)]*\)\s*$)");
  static const std::regex rule(R"(^\s*([-*_]\s*){3,}$)");
  std::vector<std::string> kept;
  for (auto line : text::split_lines(input)) {
    std::string l(line);
    if (std::regex_match(l, image) || std::regex_match(l, rule)) continue;
    kept.push_back(std::move(l));
  }
  return std::string(text::trim(text::join(kept, "\n")));
}

std::vector<std::string> paragraphs(const std::string& input) {
  std::vector<std::string> out;
  std::string cur;
  for (auto line : text::split_lines(input)) {
    if (text::trim(line).empty()) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
      continue;
    }
    if (!cur.empty()) cur += ' ';
    cur += text::trim(line);
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string leading_words(const std::string& s, std::size_t n) {
  std::istringstream in(s);
  std::string w;
  std::string out;
  for (std::size_t i = 0; i < n && in >> w; ++i) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  while (!out.empty() && std::ispunct(static_cast<unsigned char>(out.back()))) out.pop_back();
  return out;
}

}  // namespace

std::string OfflineTextProvider::complete(const CompletionRequest& request) {
  const auto& subject = request.subject;
  switch (request.task) {
    case Task::kScreenDocument:
      return "yes";
    case Task::kAssessRelevance:
      return mentions_domain(subject) ? "yes" : "no";
    case Task::kCleanChunk:
      return offline_clean(subject);
    case Task::kProposeMerges:
      return "";
    case Task::kGenerateQuestions: {
      std::string out;
      for (const auto& p : paragraphs(subject)) {
        out += "What does the literature report about \"" + leading_words(p, 8) + "\"?\n";
      }
      return out;
    }
    case Task::kAnswer: {
      const auto refs = ref_numbers(request.prompt);
      if (refs.empty()) return "No knowledge-base support was found for this question.";
      return "The indexed literature addresses \"" + subject + "\" in " + ref_list(refs) + ".";
    }
    case Task::kResearchOverview: {
      const auto refs = ref_numbers(request.prompt);
      return "Overview of \"" + subject + "\" drawn from " + std::to_string(refs.size()) + " review reference(s)" +
             (refs.empty() ? std::string(".") : " " + ref_list(refs) + ".");
    }
    case Task::kSubquestions:
      return "What is known about " + subject + "?\nWhich mechanisms are reported for " + subject +
             "?\nWhat open problems remain for " + subject + "?\n";
    case Task::kSynthesis: {
      const auto refs = ref_numbers(request.prompt);
      return "Synthesis on \"" + subject + "\"" + (refs.empty() ? std::string(".") : " citing " + ref_list(refs) + ".");
    }
    case Task::kMultipleChoice:
      return "A";
    case Task::kGeneric:
      break;
  }
  return subject;
}

// ---------------------------------------------------------------------------

FixtureCompoundProvider::FixtureCompoundProvider(std::vector<MoleculeRecord> table) : table_(std::move(table)) {}

FixtureCompoundProvider FixtureCompoundProvider::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open compound table " + path.string());
  std::vector<MoleculeRecord> table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      auto tab = line.find('\t', start);
      fields.emplace_back(text::trim(std::string_view(line).substr(start, tab - start)));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() < 2 || fields[0].empty() || fields[1].empty()) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": expected name<TAB>smiles[<TAB>url]");
    }
    MoleculeRecord rec{fields[0], fields[1], std::nullopt};
    if (fields.size() > 2 && !fields[2].empty()) rec.detail_url = fields[2];
    table.push_back(std::move(rec));
  }
  return FixtureCompoundProvider(std::move(table));
}

std::vector<MoleculeRecord> FixtureCompoundProvider::lookup(const std::string& query) {
  static const std::set<std::string> kStop = {"what", "which", "when", "where", "does", "with", "that", "this",
                                              "from", "have", "target", "about", "into", "their", "there"};
  std::vector<std::string> words;
  for (auto& w : words_of(query)) {
    if (w.size() >= 4 && !kStop.count(w)) words.push_back(std::move(w));
  }
  std::vector<MoleculeRecord> exact;
  std::vector<MoleculeRecord> partial;
  for (const auto& rec : table_) {
    const auto name = text::to_lower(rec.name);
    bool is_exact = false;
    bool is_partial = false;
    for (const auto& w : words) {
      if (name == w) is_exact = true;
      else if (name.find(w) != std::string::npos) is_partial = true;
    }
    if (is_exact) exact.push_back(rec);
    else if (is_partial) partial.push_back(rec);
  }
  exact.insert(exact.end(), partial.begin(), partial.end());
  return exact;
}

}  // namespace litrag
