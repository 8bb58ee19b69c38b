#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <random>

#include "litrag/embedding.hpp"
#include "litrag/enrichment.hpp"
#include "litrag/error.hpp"
#include "support.hpp"

using namespace litrag;
using testing_support::ScriptedText;

namespace {

// Independent reimplementation of the deterministic test embedder.
std::vector<float> reference_hash_embedding(const std::string& text, std::size_t dim) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::vector<long double> raw(dim);
  long double norm = 0;
  for (auto& v : raw) {
    h += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = h;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    v = 2.0L * std::ldexp(static_cast<long double>(z >> 11), -53) - 1.0L;
    norm += v * v;
  }
  norm = std::sqrt(norm);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(raw[i] / norm);
  return out;
}

std::vector<std::uint32_t> bits(const std::vector<float>& v, std::size_t n) {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < n && i < v.size(); ++i) out.push_back(std::bit_cast<std::uint32_t>(v[i]));
  return out;
}

}  // namespace

// Frozen values produced by a separate script (arbitrary-precision integers,
// double normalization, IEEE single rounding).
TEST(HashEmbedder, FrozenValues) {
  HashEmbedder e8(8);
  EXPECT_EQ(bits(e8.embed_one("abc"), 8),
            (std::vector<std::uint32_t>{0xbeeec26f, 0xbe9732ae, 0xbf2e3dff, 0x3e383d09, 0xbe4543b0, 0x3e2e2f97,
                                        0x3d1bc74f, 0xbeba2a0b}));
  HashEmbedder e2048(2048);
  EXPECT_EQ(bits(e2048.embed_one("abc"), 8),
            (std::vector<std::uint32_t>{0xbcd03188, 0xbc83d772, 0xbd17ef88, 0x3c20a6f5, 0xbc2c02b6, 0x3c17e2f8,
                                        0x3b07d5f4, 0xbca254da}));
  HashEmbedder e4(4);
  EXPECT_EQ(bits(e4.embed_one("taxadiene synthase"), 4),
            (std::vector<std::uint32_t>{0x3f145e6f, 0x3f23eea9, 0xbecbf24c, 0xbe9e1e45}));
}

TEST(HashEmbedder, MatchesIndependentReimplementation) {
  std::mt19937_64 rng(3);
  for (std::size_t dim : {1u, 3u, 64u, 2048u}) {
    HashEmbedder e(dim);
    for (int i = 0; i < 20; ++i) {
      std::string s;
      for (auto n = rng() % 40; n > 0; --n) s.push_back(static_cast<char>(rng() % 256));
      const auto got = e.embed_one(s);
      const auto want = reference_hash_embedding(s, dim);
      ASSERT_EQ(got.size(), want.size());
      for (std::size_t k = 0; k < dim; ++k) EXPECT_NEAR(got[k], want[k], 1e-7) << dim << " " << k;
    }
  }
}

TEST(HashEmbedder, DeterministicAndUnitNorm) {
  HashEmbedder e(2048);
  auto a = e.embed({"same text", "same text", "other"});
  EXPECT_EQ(a[0], a[1]);
  EXPECT_NE(a[0], a[2]);
  for (const auto& v : a) EXPECT_NEAR(EmbeddingVector::normalized(std::span<const float>(v)).norm(), 1.0, 1e-6);
}

TEST(EmbeddingVector, RejectsDegenerateInput) {
  std::vector<float> empty;
  std::vector<float> zero(4, 0.0f);
  std::vector<float> nan{1.0f, std::nanf("")};
  EXPECT_THROW(EmbeddingVector::normalized(std::span<const float>(empty)), ProviderError);
  EXPECT_THROW(EmbeddingVector::normalized(std::span<const float>(zero)), ProviderError);
  EXPECT_THROW(EmbeddingVector::normalized(std::span<const float>(nan)), ProviderError);
}

TEST(Cosine, IdentityOrthogonalityAndMismatch) {
  std::vector<float> v{0.6f, 0.8f};
  auto a = EmbeddingVector::normalized(std::span<const float>(v));
  EXPECT_NEAR(cosine(a, a), 1.0, 1e-9);
  std::vector<float> e1{1, 0, 0}, e2{0, 1, 0};
  EXPECT_EQ(cosine(testing_support::ev(e1), testing_support::ev(e2)), 0.0);
  EXPECT_THROW(cosine(a, testing_support::ev(e1)), ConfigError);
}

TEST(Cosine, MatchesHighPrecisionOracle) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 100; ++i) {
    auto a = testing_support::ev(testing_support::random_unit(2048, rng));
    auto b = testing_support::ev(testing_support::random_unit(2048, rng));
    long double d = 0;
    for (std::size_t k = 0; k < 2048; ++k) d += static_cast<long double>(a.values()[k]) * b.values()[k];
    long double na = 0, nb = 0;
    for (std::size_t k = 0; k < 2048; ++k) {
      na += static_cast<long double>(a.values()[k]) * a.values()[k];
      nb += static_cast<long double>(b.values()[k]) * b.values()[k];
    }
    EXPECT_NEAR(cosine(a, b), static_cast<double>(d / std::sqrt(na * nb)), 1e-9);
    EXPECT_LE(std::fabs(cosine(a, b)), 1.0);
  }
}

// ---------------------------------------------------------------------------
// enrichment

TEST(Questions, SixLinesCappedAtFour) {
  auto c = make_chunk("d#0001", "d", {"A"}, "text");
  ScriptedText llm;
  llm.reply(Task::kGenerateQuestions, "q1?\nq2?\nq3?\nq4?\nq5?\nq6?\n");
  Diagnostics diag;
  auto qs = generate_questions(c, llm, diag);
  ASSERT_EQ(qs.size(), 4u);
  EXPECT_EQ(qs[3].text, "q4?");
}

TEST(Questions, EmptyOutputWarns) {
  auto c = make_chunk("d#0001", "d", {"A"}, "text");
  ScriptedText llm;
  llm.reply(Task::kGenerateQuestions, "");
  Diagnostics diag;
  EXPECT_TRUE(generate_questions(c, llm, diag).empty());
  EXPECT_EQ(diag.warnings.size(), 1u);
}

TEST(Questions, IdsAndBlankLines) {
  auto c = make_chunk("d#0001", "d", {"A"}, "text");
  ScriptedText llm;
  llm.reply(Task::kGenerateQuestions, "\nFirst?\n\n  \nSecond?\n");
  Diagnostics diag;
  auto qs = generate_questions(c, llm, diag);
  ASSERT_EQ(qs.size(), 2u);
  EXPECT_EQ(qs[0], (HypotheticalQuestion{"d#0001/q1", "d#0001", "First?"}));
  EXPECT_EQ(qs[1], (HypotheticalQuestion{"d#0001/q2", "d#0001", "Second?"}));
}

TEST(Questions, ProviderFailureGivesEmptyList) {
  auto c = make_chunk("d#0001", "d", {"A"}, "text");
  ScriptedText llm;
  llm.fail(Task::kGenerateQuestions);
  Diagnostics diag;
  EXPECT_TRUE(generate_questions(c, llm, diag).empty());
  EXPECT_FALSE(diag.empty());
}

TEST(EmbedTexts, OrderDimensionAndErrors) {
  HashEmbedder e(16);
  auto v = embed_texts({"a", "b"}, e, 16);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].dimension(), 16u);
  EXPECT_EQ(std::vector<float>(v[1].values().begin(), v[1].values().end()), e.embed_one("b"));
  EXPECT_THROW(embed_texts({"a"}, e, 32), ConfigError);
  EXPECT_THROW(embed_texts({"a", ""}, e, 16), ValidationError);
  testing_support::TableEmbedder failing(16);
  failing.fail_ = true;
  try {
    embed_texts({"a"}, failing, 16);
    FAIL();
  } catch (const ProviderError& err) {
    EXPECT_TRUE(err.retryable());
  }
}

TEST(EmbedTexts, ClipsLongText) {
  const std::string long_text(9000, 'x');
  EXPECT_EQ(clip_for_embedding(long_text).size(), 8000u);
  HashEmbedder e(8);
  EXPECT_EQ(embed_texts({long_text}, e, 8)[0], embed_texts({std::string(8000, 'x')}, e, 8)[0]);
}
