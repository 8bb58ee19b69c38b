#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace litrag {

/// Unit-length float vector. Construct through `normalized`; `from_unit` is
/// for values already normalized (e.g. read back from disk).
class EmbeddingVector {
 public:
  EmbeddingVector() = default;

  /// Throws ProviderError for an empty, zero or non-finite input.
  static EmbeddingVector normalized(std::span<const float> raw);
  static EmbeddingVector normalized(std::span<const double> raw);
  static EmbeddingVector from_unit(std::vector<float> values);

  std::size_t dimension() const { return values_.size(); }
  std::span<const float> values() const { return values_; }
  double norm() const;

  bool operator==(const EmbeddingVector&) const = default;

 private:
  explicit EmbeddingVector(std::vector<float> values) : values_(std::move(values)) {}
  std::vector<float> values_;
};

/// Cosine similarity accumulated in double. Throws ConfigError on a dimension
/// mismatch.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);
double dot(std::span<const float> a, std::span<const float> b);

}  // namespace litrag
