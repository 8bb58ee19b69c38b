#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "litrag/error.hpp"
#include "litrag/providers.hpp"
#include "litrag/vector_store.hpp"

namespace testing_support {

using namespace litrag;

inline std::filesystem::path source_dir() { return LITRAG_SOURCE_DIR; }
inline std::filesystem::path data_dir() { return source_dir() / "data"; }

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("litrag-test-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Text provider driven by a per-task function. Tasks without a handler fall
/// back to the offline provider. Counts calls per task.
class ScriptedText : public TextProvider {
 public:
  using Handler = std::function<std::string(const CompletionRequest&)>;

  ScriptedText& on(Task task, Handler h) {
    handlers_[task] = std::move(h);
    return *this;
  }
  ScriptedText& reply(Task task, std::string text) {
    return on(task, [text = std::move(text)](const CompletionRequest&) { return text; });
  }
  ScriptedText& fail(Task task, bool retryable = true) {
    return on(task, [retryable](const CompletionRequest& r) -> std::string {
      throw ProviderError(std::string("scripted failure for ") + task_name(r.task), retryable);
    });
  }

  std::string complete(const CompletionRequest& request) override {
    {
      std::lock_guard lock(mu_);
      ++counts_[request.task];
      ++total_;
      log_.push_back(request);
    }
    auto it = handlers_.find(request.task);
    if (it != handlers_.end()) return it->second(request);
    return offline_.complete(request);
  }
  std::string name() const override { return "scripted"; }

  int count(Task t) const {
    std::lock_guard lock(mu_);
    auto it = counts_.find(t);
    return it == counts_.end() ? 0 : it->second;
  }
  int total() const {
    std::lock_guard lock(mu_);
    return total_;
  }
  std::vector<CompletionRequest> log() const {
    std::lock_guard lock(mu_);
    return log_;
  }

 private:
  std::map<Task, Handler> handlers_;
  OfflineTextProvider offline_;
  mutable std::mutex mu_;
  std::map<Task, int> counts_;
  int total_ = 0;
  std::vector<CompletionRequest> log_;
};

/// Embedder returning preset vectors for known texts and hash vectors otherwise.
class TableEmbedder : public EmbeddingProvider {
 public:
  explicit TableEmbedder(std::size_t dim) : dim_(dim), hash_(dim) {}

  void set(const std::string& text, std::vector<float> v) { table_[text] = std::move(v); }

  std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) override {
    if (fail_) throw ProviderError("embedder offline", true);
    std::vector<std::vector<float>> out;
    for (const auto& t : texts) {
      auto it = table_.find(t);
      out.push_back(it != table_.end() ? it->second : hash_.embed_one(t));
    }
    return out;
  }
  std::size_t dimension() const override { return dim_; }
  std::string name() const override { return "table"; }

  bool fail_ = false;

 private:
  std::size_t dim_;
  HashEmbedder hash_;
  std::map<std::string, std::vector<float>> table_;
};

class FailingCompounds : public CompoundProvider {
 public:
  std::vector<MoleculeRecord> lookup(const std::string&) override { throw ProviderError("compound service down"); }
  std::string name() const override { return "failing"; }
  bool reachable() override { return false; }
};

// ---------------------------------------------------------------------------
// Fixture corpus: hand-counted chunk oracle.

struct DocOracle {
  std::string id;
  std::vector<std::vector<std::string>> paths;
};

// Counted by hand from data/corpus/*.md. Headings with empty bodies produce
// no chunk; "#### Note" stays inside its section; "### Cohort" under a
// level-1 heading attaches at level 2.
inline const std::vector<DocOracle>& fixture_oracle() {
  static const std::vector<DocOracle> o = {
      {"rev-artemisinin",
       {{"Background"}, {"Mechanism of action"}, {"Production", "Plant extraction"}, {"Production", "Semisynthesis"}}},
      {"rev-monoterpene",
       {{}, {"Occurrence"}, {"Biological activities", "Antimicrobial effects"}, {"Biological activities", "Analgesic effects"},
        {"Industrial uses"}}},
      {"rev-taxane",
       {{}, {"Introduction"}, {"Biosynthesis", "Taxadiene synthase"}, {"Biosynthesis", "Oxygenation"},
        {"Biosynthesis", "Oxygenation", "Side chain assembly"}, {"Clinical use"}, {"Conclusions"}}},
      {"res-artemisinic-acid-yeast",
       {{"Introduction"}, {"Strain engineering", "Mevalonate pathway"}, {"Strain engineering", "Oxidation module"},
        {"Fermentation"}, {"Conversion to artemisinin"}}},
      {"res-ginkgolide", {{"Isolation"}, {"Structure"}, {"Pharmacology"}}},
      {"res-limonene-solvent", {{}, {"Solvent recovery"}}},
      {"res-menthol-trpm8", {{"Summary"}, {"Results", "Channel activation"}, {"Results", "Binding site"}, {"Conclusion"}}},
      {"res-paclitaxel-neuropathy",
       {{}, {"Introduction"}, {"Patients and methods", "Cohort"}, {"Results"}, {"Discussion"}}},
      {"res-squalene-cyclase", {{"Introduction"}, {"Results"}, {"Discussion"}}},
      {"res-taxadiene-synthase",
       {{"Abstract"}, {"Results", "Structure determination"}, {"Results", "Product profile"}, {"Methods"}}},
  };
  return o;
}

// ---------------------------------------------------------------------------
// Random corpora for retrieval oracles.

inline std::vector<float> unit(std::vector<double> v) {
  double n = 0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i] / n);
  return out;
}

/// A vector whose cosine with `anchor` is spread over (-1, 1): anchor scaled
/// by a random weight plus Gaussian noise.
inline std::vector<float> near(const std::vector<float>& anchor, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> weight(-0.5, 6.0);
  const double w = weight(rng) * std::sqrt(static_cast<double>(anchor.size()));
  std::vector<double> v(anchor.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = w * anchor[i] + noise(rng);
  return unit(std::move(v));
}

inline std::vector<float> random_unit(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> v(dim);
  for (auto& x : v) x = noise(rng);
  return unit(std::move(v));
}

inline EmbeddingVector ev(const std::vector<float>& v) { return EmbeddingVector::normalized(std::span<const float>(v)); }

struct RandomCorpus {
  std::size_t dim = 0;
  std::vector<float> anchor;
  std::vector<DocEntry> docs;
  std::vector<std::vector<ChunkIndexEntry>> chunks;
  std::size_t chunk_count = 0;
};

/// At most `max_chunks` chunks with up to four questions each. Some vectors
/// are exact copies so that score ties occur and exercise tie-breaking.
inline RandomCorpus make_random_corpus(std::uint64_t seed, std::size_t dim = 32, std::size_t max_chunks = 500) {
  std::mt19937_64 rng(seed);
  RandomCorpus c;
  c.dim = dim;
  c.anchor = random_unit(dim, rng);
  std::uniform_int_distribution<int> ndocs(5, 60);
  std::uniform_int_distribution<int> nchunks(0, 12);
  std::uniform_int_distribution<int> nq(0, 4);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution dup(0.05);
  const int n = ndocs(rng);
  std::vector<float> last;
  for (int d = 0; d < n && c.chunk_count < max_chunks; ++d) {
    DocEntry doc;
    doc.metadata.doc_id = "d" + std::to_string(rng() % 100000) + "-" + std::to_string(d);
    doc.metadata.title = "Doc " + std::to_string(d);
    doc.metadata.authors = {"Author A"};
    doc.metadata.doc_type = coin(rng) ? DocType::kReview : DocType::kResearch;
    doc.abstract = "abstract " + std::to_string(d);
    auto av = (dup(rng) && !last.empty()) ? last : near(c.anchor, rng);
    last = av;
    doc.abstract_vector = ev(av);
    std::vector<ChunkIndexEntry> cs;
    const int k = std::min<int>(nchunks(rng), static_cast<int>(max_chunks - c.chunk_count));
    for (int i = 0; i < k; ++i) {
      ChunkIndexEntry e;
      char ord[8];
      std::snprintf(ord, sizeof ord, "%04d", i + 1);
      e.chunk_id = doc.metadata.doc_id + "#" + ord;
      e.doc_id = doc.metadata.doc_id;
      e.text = "text " + e.chunk_id;
      auto cv = (dup(rng) && !last.empty()) ? last : near(c.anchor, rng);
      last = cv;
      e.chunk_vector = ev(cv);
      const int q = nq(rng);
      for (int j = 0; j < q; ++j) {
        auto qv = (dup(rng) && !last.empty()) ? last : near(c.anchor, rng);
        last = qv;
        e.questions.push_back({e.chunk_id + "/q" + std::to_string(j + 1), "q", ev(qv)});
      }
      cs.push_back(std::move(e));
    }
    c.chunk_count += cs.size();
    c.docs.push_back(std::move(doc));
    c.chunks.push_back(std::move(cs));
  }
  return c;
}

inline void load_into(VectorStore& store, const RandomCorpus& c) {
  for (std::size_t i = 0; i < c.docs.size(); ++i) store.upsert(c.docs[i], c.chunks[i]);
}

// ---------------------------------------------------------------------------
// Exhaustive-scan reference, written independently of the store: long double
// accumulation, full sort instead of partial sort, no precomputed norms.

inline long double ref_cos(std::span<const float> a, std::span<const float> b) {
  long double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += static_cast<long double>(a[i]) * b[i];
    aa += static_cast<long double>(a[i]) * a[i];
    bb += static_cast<long double>(b[i]) * b[i];
  }
  long double c = ab / std::sqrt(aa * bb);
  return std::max<long double>(-1, std::min<long double>(1, c));
}

struct RefHit {
  std::string chunk_id;
  std::string doc_id;
  long double score;
  bool by_question;
  std::string matched_id;
};

inline std::vector<std::pair<std::string, long double>> ref_summary(const RandomCorpus& c, const EmbeddingVector& q,
                                                                     int limit, std::optional<DocType> filter) {
  std::vector<std::pair<std::string, long double>> all;
  for (const auto& d : c.docs) {
    if (filter && d.doc_type() != *filter) continue;
    all.emplace_back(d.doc_id(), ref_cos(d.abstract_vector.values(), q.values()));
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (all.size() > static_cast<std::size_t>(limit)) all.resize(static_cast<std::size_t>(limit));
  return all;
}

inline std::vector<RefHit> ref_chunks(const RandomCorpus& c, const EmbeddingVector& q, const std::set<std::string>& allowed,
                                      int limit, double min_score) {
  std::vector<RefHit> all;
  for (std::size_t d = 0; d < c.docs.size(); ++d) {
    if (!allowed.count(c.docs[d].doc_id())) continue;
    for (const auto& ch : c.chunks[d]) {
      RefHit h{ch.chunk_id, ch.doc_id, ref_cos(ch.chunk_vector.values(), q.values()), false, ch.chunk_id};
      for (const auto& qu : ch.questions) {
        auto s = ref_cos(qu.vector.values(), q.values());
        if (s > h.score) {
          h.score = s;
          h.by_question = true;
          h.matched_id = qu.question_id;
        }
      }
      if (h.score > min_score) all.push_back(h);
    }
  }
  std::sort(all.begin(), all.end(), [](const RefHit& a, const RefHit& b) {
    return a.score != b.score ? a.score > b.score : a.chunk_id < b.chunk_id;
  });
  if (all.size() > static_cast<std::size_t>(limit)) all.resize(static_cast<std::size_t>(limit));
  return all;
}

inline std::vector<RefHit> ref_hierarchical(const RandomCorpus& c, const EmbeddingVector& q, const SearchParams& p) {
  std::set<std::string> allowed;
  for (const auto& [id, s] : ref_summary(c, q, p.summary_limit, p.doc_type_filter)) allowed.insert(id);
  return ref_chunks(c, q, allowed, p.chunk_limit, p.min_score);
}

/// Empty string when `got` matches `want` in ids and order with scores within
/// `tol`; otherwise a description of the first difference.
inline std::string compare_hits(const std::vector<Hit>& got, const std::vector<RefHit>& want, double tol = 1e-9) {
  if (got.size() != want.size()) {
    return "length " + std::to_string(got.size()) + " != " + std::to_string(want.size());
  }
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (got[i].chunk_id != want[i].chunk_id) return "rank " + std::to_string(i) + ": " + got[i].chunk_id + " != " + want[i].chunk_id;
    if (got[i].doc_id != want[i].doc_id) return "rank " + std::to_string(i) + ": doc mismatch";
    if (std::fabs(static_cast<long double>(got[i].score) - want[i].score) > tol) {
      return "rank " + std::to_string(i) + ": score " + std::to_string(got[i].score);
    }
    if ((got[i].matched_kind == MatchKind::kQuestion) != want[i].by_question || got[i].matched_id != want[i].matched_id) {
      return "rank " + std::to_string(i) + ": matched " + got[i].matched_id + " != " + want[i].matched_id;
    }
  }
  return {};
}

}  // namespace testing_support
