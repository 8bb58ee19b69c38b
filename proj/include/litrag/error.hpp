#pragma once

#include <stdexcept>
#include <string>

namespace litrag {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied malformed input (bad request, invalid file contents).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Misconfiguration, e.g. an embedder whose dimension disagrees with the store.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A text, embedding or compound provider failed.
class ProviderError : public Error {
 public:
  explicit ProviderError(const std::string& what, bool retryable = true)
      : Error(what), retryable_(retryable) {}

  bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

class StoreError : public Error {
 public:
  using Error::Error;
};

enum class LoadErrorKind { kIo, kCorrupt, kTruncated, kVersionMismatch, kChecksum };

class StoreLoadError : public StoreError {
 public:
  StoreLoadError(LoadErrorKind kind, const std::string& what) : StoreError(what), kind_(kind) {}

  LoadErrorKind kind() const noexcept { return kind_; }

 private:
  LoadErrorKind kind_;
};

}  // namespace litrag
