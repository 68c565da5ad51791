#pragma once

#include <stdexcept>
#include <string>

namespace rtmw {

// Every failure raised by the library derives from Error; the concrete type
// tells callers which contract was broken.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent PolicyConfig or a model that cannot run under it.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Life-cycle call issued in the wrong phase.
class PhaseError : public Error {
 public:
  using Error::Error;
};

// API misuse: unknown ids, calls from the wrong context, re-entrant locks.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Version selection could not produce a valid version.
class SelectionError : public Error {
 public:
  using Error::Error;
};

// SDF balance equations have no positive solution.
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

// SDF graph cannot complete one iteration.
class DeadlockError : public Error {
 public:
  using Error::Error;
};

// A trace whose events do not pair up.
class TraceIntegrityError : public Error {
 public:
  using Error::Error;
};

// Malformed input document.
class DocumentError : public Error {
 public:
  using Error::Error;
};

}  // namespace rtmw
