#pragma once

#include <stdexcept>
#include <string>

namespace sumpref {

// Base class for every error raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition was violated by the caller.
class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

// Template rendering hit a placeholder with no binding.
class MissingBinding : public Error {
 public:
  explicit MissingBinding(const std::string& placeholder)
      : Error("missing binding for placeholder {" + placeholder + "}"),
        placeholder_(placeholder) {}
  const std::string& placeholder() const { return placeholder_; }

 private:
  std::string placeholder_;
};

// Fact-list parsing produced zero facts.
class EmptyFactList : public Error {
 public:
  using Error::Error;
};

// A verdict response contained no recognizable label word.
class UnrecognizedLabel : public Error {
 public:
  using Error::Error;
};

// Network / HTTP failure after all retries were exhausted.
class TransportError : public Error {
 public:
  using Error::Error;
};

// The backend answered but the payload violated the expected schema.
class BadResponse : public Error {
 public:
  using Error::Error;
};

// The scripted backend has no remaining entry for the requested tag.
class ScriptExhausted : public Error {
 public:
  using Error::Error;
};

// Neither a yes-variant nor a no-variant token appeared in the top-k map.
class VerdictTokensAbsent : public Error {
 public:
  using Error::Error;
};

// Atomic-fact extraction failed after all parse retries.
class ExtractionFailed : public Error {
 public:
  using Error::Error;
};

// A critique strategy could not produce a result for a sample.
class CritiqueFailed : public Error {
 public:
  using Error::Error;
};

// A selection operation was applied to a pool with no entries.
class EmptyPool : public Error {
 public:
  using Error::Error;
};

// Every sample of a document errored out.
class DocumentFailed : public Error {
 public:
  using Error::Error;
};

// A corpus contained two documents with the same id.
class DuplicateId : public Error {
 public:
  using Error::Error;
};

// Configuration file or flag validation failure.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// File could not be read, parsed, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Toy-trainer loss became NaN or infinite.
class NonFiniteLoss : public Error {
 public:
  using Error::Error;
};

// A preference example referenced a candidate index outside the policy.
class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

// Batch operations require at least one example.
class EmptyDataset : public Error {
 public:
  using Error::Error;
};

}  // namespace sumpref
