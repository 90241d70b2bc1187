#pragma once

#include <stdexcept>
#include <string>

namespace gmp {

// Error classes double as the CLI's exit-code categories.
enum class ErrorCategory { kConfig = 2, kData = 3, kTraining = 4, kIo = 5 };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorCategory::kConfig, w) {}
};

struct DataError : Error {
  explicit DataError(const std::string& w) : Error(ErrorCategory::kData, w) {}
};

// Index outside [1, l_t] or outside the target space.
struct RangeError : DataError {
  using DataError::DataError;
};

// Malformed target sequence; `position` is the offending index in the sequence.
struct ParseError : DataError {
  ParseError(const std::string& w, std::size_t position)
      : DataError(w + " (at position " + std::to_string(position) + ")"),
        position(position) {}
  std::size_t position;
};

struct ValidationError : DataError {
  using DataError::DataError;
};

struct QuotaError : DataError {
  using DataError::DataError;
};

struct DimensionError : DataError {
  using DataError::DataError;
};

struct VocabError : DataError {
  using DataError::DataError;
};

struct CapacityError : DataError {
  using DataError::DataError;
};

struct TrainingError : Error {
  explicit TrainingError(const std::string& w) : Error(ErrorCategory::kTraining, w) {}
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorCategory::kIo, w) {}
};

}  // namespace gmp
