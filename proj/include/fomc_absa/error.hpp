#pragma once

#include <stdexcept>
#include <string>

namespace fomc_absa {

// Bad input data: malformed files, duplicate keys, unparseable rows.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Misconfiguration detected before any work starts (CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A stage was asked to run before the artifact it consumes exists (exit code 2).
class MissingArtifactError : public std::runtime_error {
 public:
  explicit MissingArtifactError(const std::string& path)
      : std::runtime_error("missing upstream artifact: " + path), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Encoder or tokenizer failure, carrying the sentence it happened on.
class EmbeddingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical preconditions violated (zero-norm vectors, degenerate regressors).
class NumericError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace fomc_absa
