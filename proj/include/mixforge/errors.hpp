#ifndef MIXFORGE_ERRORS_HPP_
#define MIXFORGE_ERRORS_HPP_

#include <stdexcept>

namespace mixforge {

// Base type for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Missing files, unreadable trees, unwritable outputs.
struct IoError : Error {
  using Error::Error;
};

// Structurally broken inputs: bad RIFF headers, malformed plan/manifest/config lines.
struct FormatError : Error {
  using Error::Error;
};

// Well-formed but out of contract: non-PCM16 wav, multichannel audio.
struct UnsupportedError : Error {
  using Error::Error;
};

// Caller broke a precondition: shape/rate/length mismatch, bad parameter.
struct InvalidArgument : Error {
  using Error::Error;
};

// The planner cannot satisfy the requested constraints; the message names the
// binding constraint.
struct InfeasibleError : Error {
  using Error::Error;
};

// Formally valid input with no usable signal (all-zero reference, silent mix).
struct DegenerateInput : Error {
  using Error::Error;
};

}  // namespace mixforge

#endif  // MIXFORGE_ERRORS_HPP_
