#include <gtest/gtest.h>

#include <fstream>
#include <thread>

#include "litrag/error.hpp"
#include "litrag/vector_store.hpp"
#include "support.hpp"

using namespace litrag;
using namespace testing_support;

namespace {

DocEntry doc(const std::string& id, std::vector<float> abstract, DocType type = DocType::kResearch) {
  DocEntry d;
  d.metadata.doc_id = id;
  d.metadata.title = id;
  d.metadata.doc_type = type;
  d.abstract = "abstract of " + id;
  d.abstract_vector = ev(abstract);
  return d;
}

ChunkIndexEntry chunk(const std::string& id, const std::string& doc_id, std::vector<float> v,
                      std::vector<std::vector<float>> questions = {}) {
  ChunkIndexEntry c;
  c.chunk_id = id;
  c.doc_id = doc_id;
  c.text = "text of " + id;
  c.chunk_vector = ev(v);
  for (std::size_t i = 0; i < questions.size(); ++i) {
    c.questions.push_back({id + "/q" + std::to_string(i + 1), "q", ev(questions[i])});
  }
  return c;
}

// A unit vector in the plane of e0 and e1 with cosine `c` to e0.
std::vector<float> at_cos(double c, std::size_t dim = 4) {
  std::vector<float> v(dim, 0.0f);
  v[0] = static_cast<float>(c);
  v[1] = static_cast<float>(std::sqrt(1 - c * c));
  return v;
}

const std::vector<float> kE0{1, 0, 0, 0};

}  // namespace

TEST(Store, EmptyStoreSearches) {
  VectorStore store(4);
  auto snap = store.snapshot();
  EXPECT_TRUE(snap->search_summary(ev(kE0), 400).empty());
  EXPECT_TRUE(snap->hierarchical_search(ev(kE0), SearchParams{}).empty());
  EXPECT_EQ(store.stats(), StoreStats{});
}

TEST(Store, SelfRetrievalIsRankOneWithScoreOne) {
  VectorStore store(4);
  store.upsert(doc("a", kE0), {chunk("a#0001", "a", kE0)});
  store.upsert(doc("b", at_cos(0.2)), {chunk("b#0001", "b", at_cos(0.3))});
  auto snap = store.snapshot();
  auto s = snap->search_summary(ev(kE0), 400);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].doc_id, "a");
  EXPECT_NEAR(s[0].score, 1.0, 1e-9);
  auto h = snap->hierarchical_search(ev(kE0), SearchParams{});
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h[0].chunk_id, "a#0001");
  EXPECT_NEAR(h[0].score, 1.0, 1e-9);
  EXPECT_EQ(h[0].matched_kind, MatchKind::kChunk);
}

TEST(Store, ThresholdIsStrict) {
  VectorStore store(4);
  store.upsert(doc("a", kE0), {chunk("a#0001", "a", at_cos(0.75)), chunk("a#0002", "a", at_cos(0.5))});
  auto snap = store.snapshot();
  SearchParams p;
  p.min_score = 0.7;
  EXPECT_EQ(snap->hierarchical_search(ev(kE0), p).size(), 1u);
  // A chunk scoring exactly the threshold is excluded.
  auto exact = snap->search_chunks(ev(kE0), {"a"}, 20, snap->search_chunks(ev(kE0), {"a"}, 1, -1)[0].score);
  EXPECT_TRUE(exact.empty());
  p.min_score = 0.8;
  EXPECT_TRUE(snap->hierarchical_search(ev(kE0), p).empty());
}

TEST(Store, AllBelowThresholdGivesNothing) {
  VectorStore store(4);
  store.upsert(doc("a", kE0), {chunk("a#0001", "a", at_cos(0.7)), chunk("a#0002", "a", at_cos(0.1))});
  SearchParams p;
  for (const auto& h : store.snapshot()->hierarchical_search(ev(kE0), p)) EXPECT_GT(h.score, 0.7);
  store.upsert(doc("a", kE0), {chunk("a#0001", "a", at_cos(0.69))});
  EXPECT_TRUE(store.snapshot()->hierarchical_search(ev(kE0), p).empty());
}

TEST(Store, QuestionVectorMaxAggregation) {
  VectorStore store(4);
  store.upsert(doc("a", kE0), {chunk("a#0001", "a", at_cos(0.5), {at_cos(0.2), at_cos(0.9)})});
  auto h = store.snapshot()->hierarchical_search(ev(kE0), SearchParams{});
  ASSERT_EQ(h.size(), 1u);
  EXPECT_NEAR(h[0].score, 0.9, 1e-6);
  EXPECT_EQ(h[0].matched_kind, MatchKind::kQuestion);
  EXPECT_EQ(h[0].matched_id, "a#0001/q2");
}

TEST(Store, TiesBrokenById) {
  VectorStore store(4);
  store.upsert(doc("b", kE0), {chunk("b#0002", "b", kE0), chunk("b#0001", "b", kE0)});
  store.upsert(doc("a", kE0), {chunk("a#0001", "a", kE0)});
  auto snap = store.snapshot();
  auto s = snap->search_summary(ev(kE0), 400);
  EXPECT_EQ(s[0].doc_id, "a");
  EXPECT_EQ(s[1].doc_id, "b");
  auto h = snap->hierarchical_search(ev(kE0), SearchParams{});
  ASSERT_EQ(h.size(), 3u);
  EXPECT_EQ(h[0].chunk_id, "a#0001");
  EXPECT_EQ(h[1].chunk_id, "b#0001");
  EXPECT_EQ(h[2].chunk_id, "b#0002");
}

TEST(Store, DocTypeFilter) {
  VectorStore store(4);
  store.upsert(doc("r", kE0, DocType::kResearch), {chunk("r#0001", "r", kE0)});
  store.upsert(doc("v", at_cos(0.5), DocType::kReview), {chunk("v#0001", "v", at_cos(0.8))});
  SearchParams p;
  p.doc_type_filter = DocType::kReview;
  auto h = store.snapshot()->hierarchical_search(ev(kE0), p);
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h[0].doc_id, "v");
  auto s = store.snapshot()->search_summary(ev(kE0), 400, DocType::kReview);
  ASSERT_EQ(s.size(), 1u);
}

TEST(Store, SummaryLimitRestrictsStageTwo) {
  VectorStore store(4);
  store.upsert(doc("a", kE0), {chunk("a#0001", "a", at_cos(0.8))});
  store.upsert(doc("b", at_cos(0.5)), {chunk("b#0001", "b", kE0)});
  SearchParams p;
  p.summary_limit = 1;
  auto h = store.snapshot()->hierarchical_search(ev(kE0), p);
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h[0].doc_id, "a");
}

TEST(Store, UpsertReplacesDocument) {
  VectorStore store(4);
  store.upsert(doc("a", kE0), {chunk("a#0001", "a", kE0), chunk("a#0002", "a", kE0)});
  store.upsert(doc("a", kE0), {chunk("a#0003", "a", kE0)});
  auto snap = store.snapshot();
  EXPECT_EQ(snap->stats().chunks, 1u);
  EXPECT_EQ(snap->find_chunk("a#0001"), nullptr);
  auto h = snap->hierarchical_search(ev(kE0), SearchParams{});
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h[0].chunk_id, "a#0003");
}

TEST(Store, MismatchedVectorRejectsWholeDocument) {
  VectorStore store(4);
  store.upsert(doc("keep", kE0), {chunk("keep#0001", "keep", kE0)});
  const auto before = store.snapshot();
  auto bad = chunk("a#0002", "a", {1, 0, 0});
  EXPECT_THROW(store.upsert(doc("a", kE0), {chunk("a#0001", "a", kE0), bad}), ValidationError);
  EXPECT_THROW(store.upsert(doc("a", {1, 0}), {}), ValidationError);
  EXPECT_THROW(store.upsert(doc("a", kE0), {chunk("a#0001", "other", kE0)}), ValidationError);
  EXPECT_THROW(store.upsert(doc("a", kE0), {chunk("a#0001", "a", kE0), chunk("a#0001", "a", kE0)}), ValidationError);
  EXPECT_THROW(store.upsert(doc("a", kE0), {chunk("keep#0001", "a", kE0)}), ValidationError);
  EXPECT_THROW(store.upsert(doc("a", kE0), {chunk("a#0001", "a", kE0, {kE0, kE0, kE0, kE0, kE0})}), ValidationError);
  EXPECT_EQ(store.snapshot(), before);
  EXPECT_EQ(store.stats().docs, 1u);
}

TEST(Store, QueryDimensionMismatch) {
  VectorStore store(4);
  EXPECT_THROW(store.snapshot()->search_summary(ev({1, 0}), 5), ConfigError);
}

TEST(Store, InvalidParams) {
  SearchParams p;
  p.chunk_limit = 0;
  EXPECT_THROW(validate(p), ValidationError);
  p = {};
  p.summary_limit = 0;
  EXPECT_THROW(validate(p), ValidationError);
  p = {};
  p.min_score = 1.5;
  EXPECT_THROW(validate(p), ValidationError);
}

// ---------------------------------------------------------------------------
// Oracle equivalence on random corpora.

TEST(StoreOracle, SummaryMatchesBruteForce) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto c = make_random_corpus(seed);
    VectorStore store(c.dim);
    load_into(store, c);
    std::mt19937_64 rng(seed * 31);
    auto snap = store.snapshot();
    for (int q = 0; q < 10; ++q) {
      auto qv = ev(near(c.anchor, rng));
      for (int limit : {1, 7, 50, 400}) {
        auto got = snap->search_summary(qv, limit);
        auto want = ref_summary(c, qv, limit, std::nullopt);
        ASSERT_EQ(got.size(), want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
          EXPECT_EQ(got[i].doc_id, want[i].first);
          EXPECT_NEAR(got[i].score, static_cast<double>(want[i].second), 1e-9);
        }
      }
    }
  }
}

TEST(StoreOracle, HierarchicalMatchesBruteForce) {
  std::size_t nonempty = 0;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    auto c = make_random_corpus(seed);
    ASSERT_LE(c.chunk_count, 500u);
    VectorStore store(c.dim);
    load_into(store, c);
    auto snap = store.snapshot();
    std::mt19937_64 rng(seed * 17);
    for (int q = 0; q < 20; ++q) {
      auto qv = ev(near(c.anchor, rng));
      for (SearchParams p : {SearchParams{}, SearchParams{5, 3, 0.5, std::nullopt}, SearchParams{400, 20, 0.7, DocType::kReview},
                             SearchParams{2, 100, -1.0, std::nullopt}}) {
        auto got = snap->hierarchical_search(qv, p);
        nonempty += !got.empty();
        EXPECT_EQ(compare_hits(got, ref_hierarchical(c, qv, p)), "") << "seed " << seed;
      }
    }
  }
  EXPECT_GT(nonempty, 100u);
}

TEST(StoreOracle, Properties) {
  for (std::uint64_t seed = 40; seed < 45; ++seed) {
    auto c = make_random_corpus(seed);
    VectorStore store(c.dim);
    load_into(store, c);
    auto snap = store.snapshot();
    std::mt19937_64 rng(seed);
    for (int q = 0; q < 10; ++q) {
      auto qv = ev(near(c.anchor, rng));
      SearchParams p{10, 20, 0.3, std::nullopt};
      std::set<std::string> allowed;
      for (const auto& s : snap->search_summary(qv, p.summary_limit)) allowed.insert(s.doc_id);
      auto hits = snap->hierarchical_search(qv, p);
      std::set<std::string> seen;
      for (const auto& h : hits) {
        EXPECT_GT(h.score, p.min_score);
        EXPECT_TRUE(allowed.count(h.doc_id));
        EXPECT_TRUE(seen.insert(h.chunk_id).second);
      }
      for (int k = 1; k < 25; ++k) {
        auto a = snap->search_chunks(qv, allowed, k, p.min_score);
        auto b = snap->search_chunks(qv, allowed, k + 1, p.min_score);
        ASSERT_LE(a.size(), b.size());
        EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
      }
    }
  }
}

TEST(StoreConcurrency, ReadersNeverSeePartialDocuments) {
  const std::size_t dim = 8;
  VectorStore store(dim);
  std::vector<float> e0(dim, 0.0f);
  e0[0] = 1;
  std::atomic<bool> done{false};
  std::atomic<int> violations{0};
  std::thread reader([&] {
    while (!done) {
      auto snap = store.snapshot();
      for (const auto& [id, block] : snap->blocks()) {
        // Every version of doc "x" has exactly 3 chunks carrying its version tag.
        if (block->chunks.size() != 3) ++violations;
        for (const auto& ch : block->chunks) {
          if (ch.text != block->doc.abstract) ++violations;
        }
      }
      if (snap->stats().chunks != snap->stats().docs * 3) ++violations;
    }
  });
  for (int v = 0; v < 300; ++v) {
    DocEntry d;
    d.metadata.doc_id = "x" + std::to_string(v % 5);
    d.metadata.title = "x";
    d.abstract = "v" + std::to_string(v);
    d.abstract_vector = ev(e0);
    std::vector<ChunkIndexEntry> cs;
    for (int i = 0; i < 3; ++i) {
      ChunkIndexEntry c;
      c.chunk_id = d.metadata.doc_id + "#000" + std::to_string(i + 1);
      c.doc_id = d.metadata.doc_id;
      c.text = d.abstract;
      c.chunk_vector = ev(e0);
      cs.push_back(std::move(c));
    }
    store.upsert(std::move(d), std::move(cs));
  }
  done = true;
  reader.join();
  EXPECT_EQ(violations.load(), 0);
}

// ---------------------------------------------------------------------------
// Persistence.

namespace {

std::string read_all(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_all(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary | std::ios::trunc).write(s.data(), static_cast<std::streamsize>(s.size()));
}

LoadErrorKind load_error(const std::filesystem::path& p) {
  try {
    VectorStore::load(p);
  } catch (const StoreLoadError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "load succeeded";
  return LoadErrorKind::kIo;
}

}  // namespace

TEST(Persistence, RoundTripPreservesSearchResults) {
  auto dir = scratch_dir("persist");
  for (std::uint64_t seed : {5u, 6u, 7u}) {
    auto c = make_random_corpus(seed);
    VectorStore store(c.dim);
    load_into(store, c);
    store.persist(dir / "s.lrag");
    auto loaded = VectorStore::load(dir / "s.lrag");
    EXPECT_EQ(loaded.stats(), store.stats());
    EXPECT_EQ(loaded.dimension(), store.dimension());
    std::mt19937_64 rng(seed);
    for (int q = 0; q < 20; ++q) {
      auto qv = ev(near(c.anchor, rng));
      EXPECT_EQ(loaded.snapshot()->hierarchical_search(qv, SearchParams{}),
                store.snapshot()->hierarchical_search(qv, SearchParams{}));
    }
    const auto* a = store.snapshot()->find_chunk(c.chunks[0].empty() ? "" : c.chunks[0][0].chunk_id);
    const auto* b = loaded.snapshot()->find_chunk(c.chunks[0].empty() ? "" : c.chunks[0][0].chunk_id);
    ASSERT_EQ(a == nullptr, b == nullptr);
    if (a) {
      EXPECT_EQ(a->chunk_vector, b->chunk_vector);
      EXPECT_EQ(a->text, b->text);
    }
    // Persisting the loaded store reproduces the file byte for byte.
    loaded.persist(dir / "again.lrag");
    EXPECT_EQ(read_all(dir / "s.lrag"), read_all(dir / "again.lrag"));
  }
  std::filesystem::remove_all(dir);
}

TEST(Persistence, EmptyStoreRoundTrip) {
  auto dir = scratch_dir("persist-empty");
  VectorStore(16).persist(dir / "e.lrag");
  auto loaded = VectorStore::load(dir / "e.lrag");
  EXPECT_EQ(loaded.dimension(), 16u);
  EXPECT_EQ(loaded.stats(), StoreStats{});
  std::filesystem::remove_all(dir);
}

TEST(Persistence, CorruptionIsTyped) {
  auto dir = scratch_dir("persist-corrupt");
  auto c = make_random_corpus(3, 8, 40);
  VectorStore store(c.dim);
  load_into(store, c);
  store.persist(dir / "good.lrag");
  const auto good = read_all(dir / "good.lrag");

  EXPECT_EQ(load_error(dir / "missing.lrag"), LoadErrorKind::kIo);

  write_all(dir / "zero.lrag", "");
  EXPECT_EQ(load_error(dir / "zero.lrag"), LoadErrorKind::kCorrupt);

  auto magic = good;
  magic[0] = 'X';
  write_all(dir / "magic.lrag", magic);
  EXPECT_EQ(load_error(dir / "magic.lrag"), LoadErrorKind::kCorrupt);

  auto version = good;
  version[8] = 2;
  write_all(dir / "version.lrag", version);
  EXPECT_EQ(load_error(dir / "version.lrag"), LoadErrorKind::kVersionMismatch);

  write_all(dir / "truncated.lrag", good.substr(0, good.size() - 5));
  EXPECT_EQ(load_error(dir / "truncated.lrag"), LoadErrorKind::kTruncated);

  write_all(dir / "header-only.lrag", good.substr(0, 64));
  EXPECT_EQ(load_error(dir / "header-only.lrag"), LoadErrorKind::kTruncated);

  auto checksum = good;
  checksum[56] ^= 0x01;
  write_all(dir / "checksum.lrag", checksum);
  EXPECT_EQ(load_error(dir / "checksum.lrag"), LoadErrorKind::kChecksum);

  auto payload = good;
  payload[payload.size() - 3] ^= 0x40;
  write_all(dir / "payload.lrag", payload);
  EXPECT_EQ(load_error(dir / "payload.lrag"), LoadErrorKind::kChecksum);

  write_all(dir / "trailing.lrag", good + "xx");
  EXPECT_EQ(load_error(dir / "trailing.lrag"), LoadErrorKind::kCorrupt);

  std::filesystem::remove_all(dir);
}

TEST(Persistence, HeaderLayout) {
  auto dir = scratch_dir("persist-header");
  VectorStore store(4);
  store.upsert(doc("a", kE0), {chunk("a#0001", "a", kE0, {kE0, at_cos(0.5)})});
  store.persist(dir / "s.lrag");
  const auto bytes = read_all(dir / "s.lrag");
  EXPECT_EQ(bytes.substr(0, 8), "LITRAGKB");
  auto u64 = [&](std::size_t off) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(bytes[off + static_cast<std::size_t>(i)]);
    return v;
  };
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 1u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 4u);
  EXPECT_EQ(u64(16), 1u);
  EXPECT_EQ(u64(24), 1u);
  EXPECT_EQ(u64(32), 2u);
  EXPECT_EQ(u64(48), 4u);
  EXPECT_EQ(bytes.size(), 64 + u64(40) + 4 * 4 * 4);
  // The abstract vector (e0) opens the vector section: 1.0f little-endian.
  EXPECT_EQ(bytes.substr(64 + u64(40), 4), std::string("\x00\x00\x80\x3f", 4));
  std::filesystem::remove_all(dir);
}
