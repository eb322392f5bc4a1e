#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace mcfsing {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An operation's stated hypotheses could not be verified on the input.
class PreconditionFailed : public Error {
 public:
  using Error::Error;
};

/// A checked lemma produced a counterexample. This indicates a bug (or a
/// falsified theorem) and is never expected on valid input.
class LemmaViolation : public Error {
 public:
  using Error::Error;
};

/// Two distinct samples collide under a map that must be injective.
class InjectivityFailure : public Error {
 public:
  InjectivityFailure(std::string what, std::size_t first, std::size_t second)
      : Error(std::move(what)), first_(first), second_(second) {}
  std::pair<std::size_t, std::size_t> witness() const { return {first_, second_}; }

 private:
  std::size_t first_;
  std::size_t second_;
};

/// A numerical run could not be resolved (step underflow, divergence, ...).
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace mcfsing
