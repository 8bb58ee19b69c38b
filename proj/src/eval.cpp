#include "litrag/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <regex>
#include <sstream>
#include <thread>
#include <tuple>

#include <nlohmann/json.hpp>

#include "litrag/enrichment.hpp"
#include "litrag/error.hpp"
#include "litrag/qa.hpp"
#include "litrag/text_util.hpp"

namespace litrag::eval {

using nlohmann::json;

const char* to_string(Mode mode) { return mode == Mode::kRag ? "rag" : "baseline"; }

Mode parse_mode(std::string_view s) {
  if (s == "baseline") return Mode::kBaseline;
  if (s == "rag") return Mode::kRag;
  throw ValidationError("mode must be \"baseline\" or \"rag\", got \"" + std::string(s) + "\"");
}

// ---------------------------------------------------------------------------

std::vector<MCQuestion> parse_testset(std::string_view jsonl) {
  std::vector<MCQuestion> out;
  std::set<std::string> seen;
  std::size_t lineno = 0;
  for (auto line : text::split_lines(jsonl)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ValidationError("test set line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("qid") || !j["qid"].is_string() || j["qid"].get<std::string>().empty()) {
      throw ValidationError("test set line " + std::to_string(lineno) + ": missing qid");
    }
    MCQuestion q;
    q.qid = j["qid"].get<std::string>();
    const auto where = "question " + q.qid + ": ";
    if (!seen.insert(q.qid).second) throw ValidationError(where + "duplicate qid");
    if (!j.contains("stem") || !j["stem"].is_string() || text::trim(j["stem"].get<std::string>()).empty()) {
      throw ValidationError(where + "missing stem");
    }
    q.stem = j["stem"].get<std::string>();
    if (!j.contains("options") || !j["options"].is_array() || j["options"].size() != 4) {
      throw ValidationError(where + "expected exactly 4 options");
    }
    for (std::size_t i = 0; i < 4; ++i) {
      if (!j["options"][i].is_string()) throw ValidationError(where + "options must be strings");
      q.options[i] = j["options"][i].get<std::string>();
    }
    if (!j.contains("correct") || !j["correct"].is_number_integer()) throw ValidationError(where + "missing correct answer");
    q.correct = j["correct"].get<int>();
    if (q.correct < 0 || q.correct > 3) throw ValidationError(where + "correct must be in 0..3");
    q.discipline = j.value("discipline", std::string("unspecified"));
    if (j.contains("source_ref") && j["source_ref"].is_string()) q.source_ref = j["source_ref"].get<std::string>();
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<MCQuestion> load_testset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open test set " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_testset(ss.str());
}

std::optional<int> parse_choice(std::string_view completion) {
  std::set<char> letters;
  std::string token;
  auto flush = [&] {
    if (token.size() == 1 && token[0] >= 'A' && token[0] <= 'D') letters.insert(token[0]);
    token.clear();
  };
  for (char c : completion) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      token.push_back(c);
    } else {
      flush();
    }
  }
  flush();
  if (letters.size() == 1) return *letters.begin() - 'A';

  static const std::regex pattern(R"(answer\s*(?:is\s*|:\s*|is\s*:\s*)\(?([A-Da-d])\b)", std::regex::icase);
  std::set<char> named;
  const std::string s(completion);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), pattern); it != std::sregex_iterator(); ++it) {
    named.insert(static_cast<char>(std::toupper(static_cast<unsigned char>((*it)[1].str()[0]))));
  }
  if (named.size() == 1) return *named.begin() - 'A';
  return std::nullopt;
}

std::string format_question(const MCQuestion& q) {
  std::string out = q.stem + "\n";
  for (int i = 0; i < 4; ++i) out += std::string(1, static_cast<char>('A' + i)) + ". " + q.options[static_cast<std::size_t>(i)] + "\n";
  out += "Reply with the single letter (A, B, C or D) of the correct option.";
  return out;
}

// ---------------------------------------------------------------------------

std::string to_json_line(const TrialResult& r) {
  json j{{"qid", r.qid},
         {"model_id", r.model_id},
         {"mode", to_string(r.mode)},
         {"run_index", r.run_index},
         {"chosen", r.chosen ? json(*r.chosen) : json(nullptr)},
         {"parse_failed", r.parse_failed}};
  return j.dump();
}

TrialResult trial_from_json_line(std::string_view line) {
  try {
    const auto j = json::parse(line);
    TrialResult r;
    r.qid = j.at("qid").get<std::string>();
    r.model_id = j.at("model_id").get<std::string>();
    r.mode = parse_mode(j.value("mode", std::string("baseline")));
    r.run_index = j.at("run_index").get<int>();
    if (!j.at("chosen").is_null()) r.chosen = j.at("chosen").get<int>();
    r.parse_failed = j.at("parse_failed").get<bool>();
    if (r.parse_failed == r.chosen.has_value()) throw ValidationError("chosen must be present iff parse_failed is false");
    return r;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad trial record: ") + e.what());
  }
}

std::vector<TrialResult> load_trial_log(const std::filesystem::path& path) {
  std::vector<TrialResult> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    // A torn final line from an interrupted writer is ignored.
    if (in.eof() && line.back() != '}') break;
    out.push_back(trial_from_json_line(line));
  }
  return out;
}

namespace {

using CellKey = std::tuple<std::string, std::string, int>;

CellKey key_of(const TrialResult& r) { return {r.model_id, r.qid, r.run_index}; }

// An interrupted writer can leave a partial last line; cut it so the next
// append starts on a fresh line.
void drop_torn_tail(const std::filesystem::path& path) {
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec || size == 0) return;
  std::ifstream in(path, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  if (content.back() == '\n') return;
  const auto last_newline = content.rfind('\n');
  std::filesystem::resize_file(path, last_newline == std::string::npos ? 0 : last_newline + 1);
}

std::string rag_prompt(const MCQuestion& q, const RagContext& rag) {
  const auto query = q.stem + "\n" + q.options[0] + "\n" + q.options[1] + "\n" + q.options[2] + "\n" + q.options[3];
  const auto qvec = embed_texts({query}, *rag.embedder, rag.store->dimension()).front();
  const auto hits = rag.store->hierarchical_search(qvec, rag.params);
  const auto citations = build_citations(hits, *rag.store);
  std::map<std::string, std::string> texts;
  for (const auto& h : hits) {
    if (const auto* c = rag.store->find_chunk(h.chunk_id)) texts[h.chunk_id] = c->text;
  }
  return build_prompt(format_question(q), hits, texts, citations, rag.prompt_budget);
}

}  // namespace

std::vector<TrialResult> run_trials(const std::vector<ModelUnderTest>& models, const std::vector<MCQuestion>& questions,
                                    const RunOptions& options) {
  if (options.n_trials < 1) throw ValidationError("n_trials must be at least 1");
  if (options.mode == Mode::kRag && (!options.rag || !options.rag->store || !options.rag->embedder)) {
    throw ValidationError("rag mode requires a loaded store and an embedder");
  }

  std::map<CellKey, TrialResult> done;
  if (options.log_path) {
    for (auto& r : load_trial_log(*options.log_path)) {
      if (r.mode == options.mode) done[key_of(r)] = std::move(r);
    }
  }

  std::map<std::string, std::string> prompts;
  for (const auto& q : questions) {
    prompts[q.qid] = options.mode == Mode::kRag ? rag_prompt(q, *options.rag) : format_question(q);
  }

  struct Cell {
    const ModelUnderTest* model;
    const MCQuestion* question;
    int run;
  };
  std::vector<Cell> pending;
  for (const auto& m : models) {
    for (const auto& q : questions) {
      for (int run = 1; run <= options.n_trials; ++run) {
        if (!done.count({m.id, q.qid, run})) pending.push_back({&m, &q, run});
      }
    }
  }
  if (options.max_new_trials && pending.size() > *options.max_new_trials) pending.resize(*options.max_new_trials);

  std::ofstream log;
  if (options.log_path) {
    drop_torn_tail(*options.log_path);
    log.open(*options.log_path, std::ios::app);
    if (!log) throw ValidationError("cannot append to trial log " + options.log_path->string());
  }
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < pending.size(); i = next++) {
      const auto& cell = pending[i];
      TrialResult r;
      r.qid = cell.question->qid;
      r.model_id = cell.model->id;
      r.mode = options.mode;
      r.run_index = cell.run;
      try {
        CompletionRequest req;
        req.task = Task::kMultipleChoice;
        req.system = "You answer multiple-choice questions. Reply with one letter.";
        req.prompt = prompts.at(r.qid);
        req.subject = cell.question->stem;
        r.chosen = parse_choice(cell.model->provider->complete(req));
      } catch (const ProviderError&) {
        r.chosen.reset();
      }
      r.parse_failed = !r.chosen.has_value();
      std::lock_guard lock(mu);
      if (log.is_open()) log << to_json_line(r) << '\n' << std::flush;
      done[key_of(r)] = std::move(r);
    }
  };
  const auto threads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(options.parallelism, 1)), 1,
                                               std::max<std::size_t>(pending.size(), 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<TrialResult> out;
  for (const auto& m : models) {
    for (const auto& q : questions) {
      for (int run = 1; run <= options.n_trials; ++run) {
        auto it = done.find({m.id, q.qid, run});
        if (it != done.end()) out.push_back(it->second);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::set<std::string> refine_testset(const std::vector<TrialResult>& results, const std::vector<MCQuestion>& questions,
                                     const std::vector<std::string>& models, int n_trials) {
  std::set<Mode> modes;
  for (const auto& r : results) modes.insert(r.mode);
  if (modes.empty()) modes.insert(Mode::kBaseline);

  std::map<std::tuple<std::string, Mode, std::string, int>, const TrialResult*> cells;
  for (const auto& r : results) cells[{r.model_id, r.mode, r.qid, r.run_index}] = &r;

  std::vector<std::string> missing;
  std::set<std::string> refined;
  for (const auto& q : questions) {
    bool unanimous = true;
    for (const auto& m : models) {
      for (Mode mode : modes) {
        for (int run = 1; run <= n_trials; ++run) {
          auto it = cells.find({m, mode, q.qid, run});
          if (it == cells.end()) {
            missing.push_back(m + "/" + to_string(mode) + "/" + q.qid + "/" + std::to_string(run));
            unanimous = false;
            continue;
          }
          if (it->second->parse_failed || it->second->chosen != q.correct) unanimous = false;
        }
      }
    }
    if (!unanimous) refined.insert(q.qid);
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) list += (i ? ", " : "") + missing[i];
    if (missing.size() > 20) list += ", ... (" + std::to_string(missing.size()) + " total)";
    throw ValidationError("incomplete trial coverage, missing cells: " + list);
  }
  return refined;
}

EvalReport score(const std::vector<TrialResult>& results, const std::vector<MCQuestion>& questions,
                 const std::set<std::string>& refined) {
  if (refined.empty()) throw ValidationError("refined question set is empty");
  std::map<std::string, const MCQuestion*> by_id;
  for (const auto& q : questions) by_id[q.qid] = &q;
  for (const auto& qid : refined) {
    if (!by_id.count(qid)) throw ValidationError("refined set names unknown question " + qid);
  }
  EvalReport report;
  report.refined_qids = refined;
  for (const auto& r : results) {
    if (!refined.count(r.qid)) continue;
    const auto& q = *by_id.at(r.qid);
    const auto key = r.model_id + "/" + to_string(r.mode);
    const bool ok = !r.parse_failed && r.chosen == q.correct;
    for (Tally* t : {&report.per_model[key], &report.per_discipline[key][q.discipline]}) {
      ++t->trials;
      if (ok) ++t->correct;
      if (r.parse_failed) ++t->parse_failed;
    }
  }
  return report;
}

std::string render_table(const EvalReport& report) {
  std::ostringstream out;
  out << "refined questions: " << report.refined_qids.size() << "\n";
  out << std::left << std::setw(32) << "model/mode" << std::right << std::setw(10) << "accuracy" << std::setw(10)
      << "correct" << std::setw(10) << "trials" << std::setw(14) << "parse_failed" << "\n";
  for (const auto& [key, t] : report.per_model) {
    out << std::left << std::setw(32) << key << std::right << std::setw(10) << std::fixed << std::setprecision(4)
        << t.accuracy() << std::setw(10) << t.correct << std::setw(10) << t.trials << std::setw(14) << t.parse_failed
        << "\n";
    for (const auto& [discipline, d] : report.per_discipline.at(key)) {
      out << "  " << std::left << std::setw(30) << discipline << std::right << std::setw(10) << std::fixed
          << std::setprecision(4) << d.accuracy() << std::setw(10) << d.correct << std::setw(10) << d.trials << "\n";
    }
  }
  return out.str();
}

}  // namespace litrag::eval
