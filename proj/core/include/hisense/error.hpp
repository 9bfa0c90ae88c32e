#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hisense {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Two operands disagree on dimensionality.
class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t lhs, std::size_t rhs, const std::string& what)
      : Error(what + ": dimension mismatch (" + std::to_string(lhs) + " vs " +
              std::to_string(rhs) + ")"),
        lhs_(lhs),
        rhs_(rhs) {}

  std::size_t lhs() const noexcept { return lhs_; }
  std::size_t rhs() const noexcept { return rhs_; }

 private:
  std::size_t lhs_;
  std::size_t rhs_;
};

// Cosine similarity is undefined for a zero vector.
class ZeroNormError : public Error {
 public:
  using Error::Error;
};

class WavError : public Error {
 public:
  enum class Kind { kMissingFile, kMalformedHeader, kUnsupportedCodec, kWriteFailed };

  WavError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// Input tensor is too small or has the wrong layout for a model.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Operation requires a state the object is not in (untrained, uncalibrated).
class StateError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class DatasetError : public Error {
 public:
  enum class Kind {
    kMissingColumns,
    kUnreadableFile,
    kEmptyManifest,
    kNoPositives,
    kBadSplit,
  };

  DatasetError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// Corrupt or incompatible serialized container.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace hisense
