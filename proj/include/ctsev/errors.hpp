#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ctsev {

/// Bad argument values (degenerate shapes, non-positive spacing, std <= 0).
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A precondition on the data (unit tag, value range, state) was violated.
class ContractError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// Malformed or unsupported file content. Carries the path and byte offset.
class FormatError : public std::runtime_error {
  public:
    FormatError(std::string path, std::size_t offset, const std::string& what)
        : std::runtime_error(path + " @" + std::to_string(offset) + ": " + what),
          path_(std::move(path)), offset_(offset) {}

    const std::string& path() const { return path_; }
    std::size_t offset() const { return offset_; }

  private:
    std::string path_;
    std::size_t offset_;
};

/// Row-numbered CSV/record parse failure.
class ParseError : public std::runtime_error {
  public:
    ParseError(std::string path, std::size_t row, const std::string& what)
        : std::runtime_error(path + ":" + std::to_string(row) + ": " + what),
          path_(std::move(path)), row_(row) {}

    const std::string& path() const { return path_; }
    std::size_t row() const { return row_; }

  private:
    std::string path_;
    std::size_t row_;
};

/// A mask has no lung voxels, so ILR or the lung crop is undefined.
class NoLungError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A metric is undefined for the given input (e.g. AUC with a single class).
class UndefinedMetricError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class StratificationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Non-finite loss during training.
class TrainingError : public std::runtime_error {
  public:
    TrainingError(int epoch, const std::string& what)
        : std::runtime_error("epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}
    int epoch() const { return epoch_; }

  private:
    int epoch_;
};

/// Argument outside a function's mathematical domain (e.g. log of p <= 0).
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace ctsev
