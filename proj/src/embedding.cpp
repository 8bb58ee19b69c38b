#include "litrag/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "litrag/error.hpp"

namespace litrag {

namespace {

template <typename T>
EmbeddingVector normalize_impl(std::span<const T> raw, std::vector<float>& out) {
  if (raw.empty()) throw ProviderError("embedding is empty", false);
  double sum = 0.0;
  for (T v : raw) {
    if (!std::isfinite(static_cast<double>(v))) throw ProviderError("embedding has non-finite values", false);
    sum += static_cast<double>(v) * static_cast<double>(v);
  }
  if (sum == 0.0) throw ProviderError("embedding is the zero vector", false);
  const double inv = 1.0 / std::sqrt(sum);
  out.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = static_cast<float>(static_cast<double>(raw[i]) * inv);
  return EmbeddingVector::from_unit(std::move(out));
}

}  // namespace

EmbeddingVector EmbeddingVector::normalized(std::span<const float> raw) {
  std::vector<float> out;
  return normalize_impl(raw, out);
}

EmbeddingVector EmbeddingVector::normalized(std::span<const double> raw) {
  std::vector<float> out;
  return normalize_impl(raw, out);
}

EmbeddingVector EmbeddingVector::from_unit(std::vector<float> values) {
  return EmbeddingVector(std::move(values));
}

double EmbeddingVector::norm() const { return std::sqrt(dot(values_, values_)); }

double dot(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return acc;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension()) {
    throw ConfigError("cosine: dimension mismatch (" + std::to_string(a.dimension()) + " vs " +
                      std::to_string(b.dimension()) + ")");
  }
  const double na = dot(a.values(), a.values());
  const double nb = dot(b.values(), b.values());
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot(a.values(), b.values()) / std::sqrt(na * nb), -1.0, 1.0);
}

}  // namespace litrag
