#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "litrag/defaults.hpp"
#include "litrag/providers.hpp"
#include "litrag/vector_store.hpp"

namespace litrag::eval {

struct MCQuestion {
  std::string qid;
  std::string stem;
  std::array<std::string, 4> options;
  int correct = 0;
  std::string discipline;
  std::optional<std::string> source_ref;
};

enum class Mode { kBaseline, kRag };

const char* to_string(Mode mode);
Mode parse_mode(std::string_view s);

struct TrialResult {
  std::string qid;
  std::string model_id;
  Mode mode = Mode::kBaseline;
  int run_index = 1;
  std::optional<int> chosen;
  bool parse_failed = false;

  bool operator==(const TrialResult&) const = default;
};

/// One JSON object per line. Throws ValidationError naming the offending qid
/// (or line) for a wrong option count, missing/out-of-range answer or a
/// duplicate qid.
std::vector<MCQuestion> load_testset(const std::filesystem::path& path);
std::vector<MCQuestion> parse_testset(std::string_view jsonl);

/// Letter A-D from a completion: the single distinct standalone capital letter
/// token if there is exactly one, otherwise an "Answer: X" / "answer is X"
/// pattern, otherwise nothing.
std::optional<int> parse_choice(std::string_view completion);

std::string format_question(const MCQuestion& q);

struct ModelUnderTest {
  std::string id;
  TextProvider* provider;
};

struct RagContext {
  const StoreSnapshot* store = nullptr;
  EmbeddingProvider* embedder = nullptr;
  SearchParams params{};
  std::size_t prompt_budget = defaults::kPromptBudget;
};

struct RunOptions {
  int n_trials = defaults::kEvalTrials;
  Mode mode = Mode::kBaseline;
  std::optional<RagContext> rag;
  // Append-only trial log. Cells already present are skipped, so a run that
  // was interrupted resumes where it stopped.
  std::optional<std::filesystem::path> log_path;
  int parallelism = 1;
  // Stop after this many new trials; used to simulate interruption.
  std::optional<std::size_t> max_new_trials;
};

/// n_trials results per (model, question). Provider failure records a
/// parse-failed trial. Returns the complete set for this mode (resumed plus
/// new) ordered by model, question and run index.
std::vector<TrialResult> run_trials(const std::vector<ModelUnderTest>& models,
                                    const std::vector<MCQuestion>& questions, const RunOptions& options);

std::vector<TrialResult> load_trial_log(const std::filesystem::path& path);
std::string to_json_line(const TrialResult& r);
TrialResult trial_from_json_line(std::string_view line);

/// Keeps the questions that are not answered correctly in every trial by
/// every compared model. Throws ValidationError listing missing
/// (model, qid, run) cells when coverage is incomplete.
std::set<std::string> refine_testset(const std::vector<TrialResult>& results,
                                     const std::vector<MCQuestion>& questions,
                                     const std::vector<std::string>& models, int n_trials);

struct Tally {
  std::size_t correct = 0;
  std::size_t trials = 0;
  std::size_t parse_failed = 0;

  double accuracy() const { return trials == 0 ? 0.0 : static_cast<double>(correct) / trials; }
};

struct EvalReport {
  std::set<std::string> refined_qids;
  // Keyed by "<model_id>/<mode>".
  std::map<std::string, Tally> per_model;
  std::map<std::string, std::map<std::string, Tally>> per_discipline;
};

/// Per-trial accuracy over the refined set; parse failures count as wrong.
/// Throws ValidationError for an empty refined set or unknown qids.
EvalReport score(const std::vector<TrialResult>& results, const std::vector<MCQuestion>& questions,
                 const std::set<std::string>& refined);

std::string render_table(const EvalReport& report);

}  // namespace litrag::eval
