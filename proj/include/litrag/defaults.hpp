#pragma once

#include <cstddef>

namespace litrag::defaults {

// Retrieval parameters of the two-stage search.
inline constexpr int kSummaryLimit = 400;
inline constexpr int kChunkLimit = 20;
inline constexpr double kMinScore = 0.7;

inline constexpr std::size_t kEmbeddingDimension = 2048;
inline constexpr int kMaxQuestionsPerChunk = 4;
inline constexpr int kEvalTrials = 5;

inline constexpr std::size_t kMinChunkChars = 200;
inline constexpr std::size_t kEmbedTextLimit = 8000;
inline constexpr std::size_t kPromptBudget = 24000;
inline constexpr std::size_t kMaxQueryChars = 8000;
inline constexpr std::size_t kMaxCompounds = 10;
inline constexpr int kResearchSubquestions = 5;
inline constexpr int kMaxResearchSubquestions = 10;
inline constexpr int kResearchParallelism = 2;

}  // namespace litrag::defaults
