#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cameo {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- workflow documents ---------------------------------------------------

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t line, std::size_t column, const std::string& what)
      : Error("syntax error at " + std::to_string(line) + ":" + std::to_string(column) + ": " +
              what),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class CycleError : public Error {
 public:
  explicit CycleError(std::vector<std::string> processes);
  const std::vector<std::string>& processes() const { return processes_; }

 private:
  std::vector<std::string> processes_;
};

class OperatorArity : public Error {
 public:
  using Error::Error;
};

class UnresolvedCardinality : public Error {
 public:
  using Error::Error;
};

// ---- execution ------------------------------------------------------------

class SerializationError : public Error {
 public:
  using Error::Error;
};

class TaskFailed : public Error {
 public:
  using Error::Error;
};

class Timeout : public Error {
 public:
  using Error::Error;
};

class RunAborted : public Error {
 public:
  using Error::Error;
};

// ---- files and data -------------------------------------------------------

class IoError : public Error {
 public:
  using Error::Error;
};

class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Malformed input. `line` and `column` are 1-based; 0 means unknown.
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, std::size_t column, const std::string& what)
      : Error(source + ":" + std::to_string(line) + (column ? ":" + std::to_string(column) : "") +
              ": " + what),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class GapError : public Error {
 public:
  GapError(std::string missing_timestamp, const std::string& what)
      : Error(what), missing_(std::move(missing_timestamp)) {}
  const std::string& missing_timestamp() const { return missing_; }

 private:
  std::string missing_;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

// ---- optimization ---------------------------------------------------------

class TreeInvalid : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class InstanceTooLarge : public Error {
 public:
  using Error::Error;
};

// ---- reporting ------------------------------------------------------------

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class UnknownSite : public Error {
 public:
  using Error::Error;
};

}  // namespace cameo
