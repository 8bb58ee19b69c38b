// Command-line front end: ingest, query, research, serve and eval.
//
// Exit codes: 0 success, 1 validation/usage error, 2 provider or store failure.

#include <algorithm>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>

#include <CLI11.hpp>

#include "litrag/config.hpp"
#include "litrag/eval.hpp"
#include "litrag/ingest.hpp"
#include "litrag/qa.hpp"
#include "litrag/research.hpp"
#include "litrag/serialize.hpp"
#include "litrag/service.hpp"

namespace {

using namespace litrag;

struct Globals {
  std::string config_path;
  std::string store_path;
  bool verbose = false;
};

ServiceConfig load_settings(const Globals& g) {
  ServiceConfig c = g.config_path.empty() ? ServiceConfig{} : load_config(g.config_path);
  if (!g.store_path.empty()) c.store_path = g.store_path;
  return c;
}

std::shared_ptr<VectorStore> open_store(const ServiceConfig& c, bool verbose) {
  if (!std::filesystem::exists(c.store_path)) {
    if (verbose) std::cerr << "store " << c.store_path << " not found, starting empty\n";
    return std::make_shared<VectorStore>(c.dimension);
  }
  auto store = std::make_shared<VectorStore>(VectorStore::load(c.store_path));
  if (store->dimension() != c.dimension) {
    throw ConfigError("store " + c.store_path.string() + " has dimension " + std::to_string(store->dimension()) +
                      ", config says " + std::to_string(c.dimension));
  }
  return store;
}

QAOptions qa_options(const ServiceConfig& c) {
  QAOptions o;
  o.prompt_budget = c.prompt_budget;
  o.domain_topic = c.domain_topic;
  return o;
}

void print_warnings(const std::vector<std::string>& warnings, bool verbose) {
  if (!verbose) return;
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

void print_qa(const QAResponse& r) {
  for (const auto& e : r.events) {
    if (e.kind == EventKind::kMolecules) {
      std::cout << "Molecules:\n";
      for (const auto& m : std::get<std::vector<MoleculeRecord>>(e.payload)) {
        std::cout << "  " << m.name << "\t" << m.smiles;
        if (m.detail_url) std::cout << "\t" << *m.detail_url;
        std::cout << "\n";
      }
      std::cout << "\n";
    } else if (e.kind == EventKind::kCitations) {
      std::cout << "References:\n";
      const auto& cits = std::get<std::vector<Citation>>(e.payload);
      if (cits.empty()) std::cout << "  (none)\n";
      for (const auto& c : cits) std::cout << "  [ref " << c.ref_index << "] " << c.formatted << "\n";
      std::cout << "\n";
    } else {
      std::cout << "Answer:\n" << std::get<std::string>(e.payload) << "\n";
    }
  }
}

int cmd_ingest(const Globals& g, const std::string& manifest) {
  const auto c = load_settings(g);
  auto store = open_store(c, g.verbose);
  auto llm = make_text_provider(c.text);
  auto embedder = make_embedding_provider(c.embedding, c.dimension);
  IngestOptions options;
  options.max_questions = c.max_questions;
  options.min_chunk_chars = c.min_chunk_chars;
  const auto summary = ingest_documents(load_manifest(manifest), *store, *llm, *embedder, options);
  store->persist(c.store_path);
  print_warnings(summary.warnings, g.verbose);
  const auto stats = store->stats();
  std::cout << "documents: " << summary.documents << "\n"
            << "skipped: " << summary.skipped << "\n"
            << "chunks: " << summary.chunks << "\n"
            << "questions: " << summary.questions << "\n"
            << "store: " << stats.docs << " docs, " << stats.chunks << " chunks, " << stats.questions << " questions\n";
  return 0;
}

int cmd_query(const Globals& g, const std::string& text, bool as_json) {
  const auto c = load_settings(g);
  QARequest request{text, c.search, std::nullopt};
  validate(request);
  auto store = open_store(c, g.verbose);
  auto llm = make_text_provider(c.text);
  auto embedder = make_embedding_provider(c.embedding, c.dimension);
  auto compounds = make_compound_provider(c.compounds);
  const auto snap = store->snapshot();
  try {
    const auto r = answer_query(request, QADeps{*snap, *llm, *embedder, compounds.get(), qa_options(c)});
    print_warnings(r.warnings, g.verbose);
    if (as_json) {
      std::cout << json(r).dump(2) << "\n";
    } else {
      print_qa(r);
    }
  } catch (const AnswerError& e) {
    // Whatever was computed before the failure is still shown.
    if (as_json) {
      std::cout << json(e.partial()).dump(2) << "\n";
    } else {
      print_qa(e.partial());
    }
    throw;
  }
  return 0;
}

int cmd_research(const Globals& g, const std::string& topic, int max_subquestions, bool as_json) {
  const auto c = load_settings(g);
  ResearchRequest request{topic, max_subquestions, c.search};
  validate(request);
  auto store = open_store(c, g.verbose);
  auto llm = make_text_provider(c.text);
  auto embedder = make_embedding_provider(c.embedding, c.dimension);
  auto compounds = make_compound_provider(c.compounds);
  const auto snap = store->snapshot();
  const auto report =
      run_research(request, ResearchDeps{*snap, *llm, *embedder, compounds.get(), qa_options(c), c.research_parallelism});
  print_warnings(report.warnings, g.verbose);
  if (as_json) {
    std::cout << json(report).dump(2) << "\n";
    return 0;
  }
  std::cout << "Topic: " << report.topic << "\n\nOverview:\n" << report.overview << "\n";
  for (std::size_t i = 0; i < report.sub_answers.size(); ++i) {
    const auto& sa = report.sub_answers[i];
    std::cout << "\n## " << (i + 1) << ". " << sa.question << "\n" << sa.response.answer_text << "\n";
  }
  for (const auto& f : report.failures) std::cout << "\n(failed) " << f.question << ": " << f.error << "\n";
  std::cout << "\nSynthesis:\n" << report.synthesis << "\n\nBibliography:\n";
  for (const auto& b : report.bibliography) std::cout << "  [ref " << b.ref_index << "] " << b.formatted << "\n";
  return 0;
}

Service* g_service = nullptr;

int cmd_serve(const Globals& g, std::string host, int port) {
  auto c = load_settings(g);
  if (host.empty()) host = c.listen_host;
  if (port < 0) port = c.listen_port;
  auto store = open_store(c, g.verbose);
  std::shared_ptr<TextProvider> llm = make_text_provider(c.text);
  std::shared_ptr<EmbeddingProvider> embedder = make_embedding_provider(c.embedding, c.dimension);
  std::shared_ptr<CompoundProvider> compounds = make_compound_provider(c.compounds);
  Service service(c, store, llm, embedder, compounds);
  g_service = &service;
  std::signal(SIGINT, [](int) {
    if (g_service) g_service->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_service) g_service->stop();
  });
  std::cerr << "listening on " << host << ":" << port << "\n";
  service.listen(host, port);
  g_service = nullptr;
  return 0;
}

struct EvalArgs {
  std::string testset;
  std::string log;
  std::string mode;
  int trials = -1;
  std::vector<std::string> models;
  std::string refined;
  std::string out;
};

std::vector<EvalModelConfig> selected_models(const ServiceConfig& c, const std::vector<std::string>& ids) {
  auto all = c.eval_models;
  if (all.empty()) all.push_back({"offline", ProviderConfig{"offline", "", "", "", "", 60.0}});
  if (ids.empty()) return all;
  std::vector<EvalModelConfig> out;
  for (const auto& id : ids) {
    auto it = std::find_if(all.begin(), all.end(), [&](const EvalModelConfig& m) { return m.id == id; });
    if (it == all.end()) throw ValidationError("unknown eval model " + id);
    out.push_back(*it);
  }
  return out;
}

int cmd_eval_run(const Globals& g, const EvalArgs& a) {
  const auto c = load_settings(g);
  const auto questions = eval::load_testset(a.testset);
  const auto models = selected_models(c, a.models);
  std::vector<std::unique_ptr<TextProvider>> providers;
  std::vector<eval::ModelUnderTest> under_test;
  for (const auto& m : models) {
    providers.push_back(make_text_provider(m.provider));
    under_test.push_back({m.id, providers.back().get()});
  }
  eval::RunOptions options;
  options.n_trials = a.trials > 0 ? a.trials : c.eval_trials;
  options.mode = a.mode.empty() ? eval::Mode::kBaseline : eval::parse_mode(a.mode);
  options.log_path = a.log;
  options.parallelism = c.eval_parallelism;
  std::shared_ptr<VectorStore> store;
  std::unique_ptr<EmbeddingProvider> embedder;
  std::shared_ptr<const StoreSnapshot> snap;
  if (options.mode == eval::Mode::kRag) {
    store = open_store(c, g.verbose);
    embedder = make_embedding_provider(c.embedding, c.dimension);
    snap = store->snapshot();
    options.rag = eval::RagContext{snap.get(), embedder.get(), c.search, c.prompt_budget};
  }
  const auto results = eval::run_trials(under_test, questions, options);
  std::size_t failed = 0;
  for (const auto& r : results) failed += r.parse_failed ? 1 : 0;
  std::cout << "trials: " << results.size() << "\nparse_failed: " << failed << "\nlog: " << a.log << "\n";
  return 0;
}

std::vector<eval::TrialResult> log_for_mode(const std::string& log, const std::string& mode) {
  if (!std::filesystem::exists(log)) throw ValidationError("trial log " + log + " not found");
  auto all = eval::load_trial_log(log);
  if (mode.empty()) return all;
  const auto m = eval::parse_mode(mode);
  std::vector<eval::TrialResult> out;
  for (auto& r : all) {
    if (r.mode == m) out.push_back(std::move(r));
  }
  return out;
}

int cmd_eval_refine(const Globals& g, const EvalArgs& a) {
  const auto c = load_settings(g);
  const auto questions = eval::load_testset(a.testset);
  const auto results = log_for_mode(a.log, a.mode);
  std::vector<std::string> models = a.models;
  if (models.empty()) {
    std::set<std::string> seen;
    for (const auto& r : results) {
      if (seen.insert(r.model_id).second) models.push_back(r.model_id);
    }
  }
  const auto refined = eval::refine_testset(results, questions, models, a.trials > 0 ? a.trials : c.eval_trials);
  std::cout << "refined: " << refined.size() << " of " << questions.size() << "\n";
  if (!a.out.empty()) {
    std::ofstream(a.out) << json(refined).dump(2) << "\n";
  } else {
    for (const auto& q : refined) std::cout << q << "\n";
  }
  return 0;
}

int cmd_eval_score(const Globals&, const EvalArgs& a) {
  const auto questions = eval::load_testset(a.testset);
  const auto results = log_for_mode(a.log, a.mode);
  std::set<std::string> refined;
  if (!a.refined.empty()) {
    std::ifstream in(a.refined);
    if (!in) throw ValidationError("cannot read " + a.refined);
    try {
      refined = json::parse(in).get<std::set<std::string>>();
    } catch (const json::exception& e) {
      throw ValidationError(a.refined + ": " + e.what());
    }
  } else {
    for (const auto& q : questions) refined.insert(q.qid);
  }
  const auto report = eval::score(results, questions, refined);
  std::cout << eval::render_table(report);
  if (!a.out.empty()) std::ofstream(a.out) << json(report).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Literature-grounded question answering over a hierarchical vector index"};
  Globals g;
  app.add_option("--config", g.config_path, "JSON configuration file");
  app.add_option("--store", g.store_path, "Store file (overrides the config)");
  app.add_flag("-v,--verbose", g.verbose, "Print warnings and diagnostics");
  app.require_subcommand(1);

  std::string manifest;
  auto* ingest = app.add_subcommand("ingest", "Ingest a corpus manifest into the store");
  ingest->add_option("manifest", manifest, "Manifest JSON listing markdown/metadata pairs")->required();

  std::string query_text;
  bool as_json = false;
  auto* query = app.add_subcommand("query", "Answer a question with citations");
  query->add_option("text", query_text, "Question")->required();
  query->add_flag("--json", as_json, "Print the response envelope as JSON");

  std::string topic;
  int max_subquestions = defaults::kResearchSubquestions;
  auto* research = app.add_subcommand("research", "Multi-step research report on a topic");
  research->add_option("topic", topic, "Research topic")->required();
  research->add_option("--max-subquestions", max_subquestions, "Sub-question cap (1-10)");
  research->add_flag("--json", as_json, "Print the report as JSON");

  std::string host;
  int port = -1;
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--host", host, "Listen address (default from config)");
  serve->add_option("--port", port, "Listen port (default from config)");

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "Multiple-choice benchmark harness");
  eval_cmd->require_subcommand(1);
  auto* eval_run = eval_cmd->add_subcommand("run", "Run trials, appending to the trial log (resumable)");
  auto* eval_score = eval_cmd->add_subcommand("score", "Score a trial log");
  auto* eval_refine = eval_cmd->add_subcommand("refine", "Drop questions every model always answers correctly");
  for (auto* sub : {eval_run, eval_score, eval_refine}) {
    sub->add_option("--testset", ea.testset, "Test set (JSON lines)")->required();
    sub->add_option("--log", ea.log, "Trial log (JSON lines)")->required();
    sub->add_option("--mode", ea.mode, "baseline or rag (run defaults to baseline, score/refine to every mode in the log)");
  }
  eval_run->add_option("--trials", ea.trials, "Trials per question (default from config)");
  eval_run->add_option("--models", ea.models, "Model ids from the config (default: all)");
  eval_refine->add_option("--trials", ea.trials, "Trials per question (default from config)");
  eval_refine->add_option("--models", ea.models, "Compared models (default: all in the log)");
  eval_refine->add_option("--out", ea.out, "Write the refined qids as JSON");
  eval_score->add_option("--refined", ea.refined, "Refined qid list from `eval refine --out`");
  eval_score->add_option("--out", ea.out, "Write the machine-readable report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*ingest) return cmd_ingest(g, manifest);
    if (*query) return cmd_query(g, query_text, as_json);
    if (*research) return cmd_research(g, topic, max_subquestions, as_json);
    if (*serve) return cmd_serve(g, host, port);
    if (*eval_run) return cmd_eval_run(g, ea);
    if (*eval_score) return cmd_eval_score(g, ea);
    if (*eval_refine) return cmd_eval_refine(g, ea);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const ProviderError& e) {
    std::cerr << "provider error: " << e.what() << "\n";
    return 2;
  } catch (const StoreError& e) {
    std::cerr << "store error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cerr << app.help();
  return 1;
}
