#pragma once

#include <stdexcept>
#include <string>

namespace bzlab {

/// Bad caller input: dimension mismatch, non-positive smearing width, L = 0 ...
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// The operation is not defined for this kind of model.
class UnsupportedOperation : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// Base for failures of a numerical procedure on valid input.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class NoRootError : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

class NonFiniteError : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

/// A computed property disagrees with what the object declares about itself.
class ConsistencyError : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& what, int line = 0, const std::string& file = "")
        : std::runtime_error(prefix(file, line) + what), line_(line), file_(file), detail_(what) {}
    int line() const { return line_; }
    const std::string& file() const { return file_; }
    /// Message without the line prefix.
    const std::string& detail() const { return detail_; }

  private:
    static std::string prefix(const std::string& file, int line)
    {
        if (!file.empty()) {
            return line > 0 ? file + ":" + std::to_string(line) + ": " : file + ": ";
        }
        return line > 0 ? "line " + std::to_string(line) + ": " : "";
    }

    int line_;
    std::string file_;
    std::string detail_;
};

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace bzlab
