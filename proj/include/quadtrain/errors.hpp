#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace quadtrain {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value outside the domain of an operation, e.g. a joint angle past its
// limit. `what()` names the offending quantity.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, const std::string& source = "")
      : Error((source.empty() ? "" : source + ":") + "line " + std::to_string(line) + ": " +
              message),
        message_(message),
        line_(line) {}

  std::size_t line() const { return line_; }
  const std::string& message() const { return message_; }

 private:
  std::string message_;
  std::size_t line_;
};

class ContractViolation : public Error {
 public:
  using Error::Error;
};

class SimulationDiverged : public Error {
 public:
  explicit SimulationDiverged(long step)
      : Error("simulation diverged (non-finite state) at step " +
              std::to_string(step)),
        step_(step) {}

  long step() const { return step_; }

 private:
  long step_;
};

// Every rollout of a training epoch diverged; there is nothing to update from.
class TrainingAborted : public Error {
 public:
  using Error::Error;
};

}  // namespace quadtrain
