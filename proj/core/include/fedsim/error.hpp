#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fedsim {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two vectors or a vector and a model do not agree on shape.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// An operation was called outside its documented domain.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A non-finite value escaped an arithmetic routine.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// The mean update is zero so the unit-mean perturbation is undefined.
class DegenerateDirectionError : public Error {
 public:
  using Error::Error;
};

class PartitionError : public Error {
 public:
  PartitionError(std::size_t client, const std::string& what)
      : Error("partition: client " + std::to_string(client) + ": " + what),
        client_(client) {}
  std::size_t client() const noexcept { return client_; }

 private:
  std::size_t client_;
};

/// A reviewer submitted a report the server cannot use.
class ReportRejectedError : public Error {
 public:
  ReportRejectedError(std::size_t reviewer, const std::string& what)
      : Error("report from reviewer " + std::to_string(reviewer) +
              " rejected: " + what),
        reviewer_(reviewer) {}
  std::size_t reviewer() const noexcept { return reviewer_; }

 private:
  std::size_t reviewer_;
};

/// Invalid configuration. `line` is 0 when the error is not tied to a line.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what, std::size_t line = 0)
      : Error(format(field, what, line)), field_(std::move(field)), line_(line) {}
  const std::string& field() const noexcept { return field_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& field, const std::string& what,
                            std::size_t line) {
    std::string out = "config";
    if (line > 0) out += " line " + std::to_string(line);
    if (!field.empty()) out += " [" + field + "]";
    return out + ": " + what;
  }
  std::string field_;
  std::size_t line_;
};

/// Malformed input text (CSV rows, config lines). `line` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Wraps a failure that happened while executing a training round.
class RoundError : public Error {
 public:
  RoundError(std::size_t round, const std::string& what)
      : Error("round " + std::to_string(round) + ": " + what), round_(round) {}
  std::size_t round() const noexcept { return round_; }

 private:
  std::size_t round_;
};

}  // namespace fedsim
