#ifndef DFMSYNTH_ERRORS_H_
#define DFMSYNTH_ERRORS_H_

#include <stdexcept>
#include <string>

namespace dfmsynth {

// Every error raised by the library derives from Error so callers can catch
// the whole family at once.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A symbol that is not part of the alphabet it was looked up in.
class AlphabetError : public Error {
 public:
  using Error::Error;
};

// Invalid construction parameter (non-positive constant, level < 1, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Argument outside the domain of an operation (state outside [0,h], empty
// interval, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Structurally malformed graph or machine.
class MalformedError : public Error {
 public:
  using Error::Error;
};

// Feedback interconnection with an algebraic loop.
class IllPosedError : public Error {
 public:
  using Error::Error;
};

// Synthesis requested on a diverged value function.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Certificate construction or re-verification failed.
class CertificateError : public Error {
 public:
  using Error::Error;
};

// Scenario or file-format problem.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// An internal invariant was violated. Always a defect.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace dfmsynth

#endif  // DFMSYNTH_ERRORS_H_
