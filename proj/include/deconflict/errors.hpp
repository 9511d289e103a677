#pragma once

#include <stdexcept>
#include <string>

namespace deconflict {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Two aircraft are already closer than the separation norm at t = 0.
struct InitialLossError : Error {
  using Error::Error;
};

/// Relative velocity too small to define a time of minimum separation.
struct ZeroRelativeVelocityError : Error {
  using Error::Error;
};

/// Random instance generation exhausted its resampling budget.
struct GenerationFailureError : Error {
  using Error::Error;
};

/// Malformed instance file, unknown field, or invalid parameter.
struct InputError : Error {
  using Error::Error;
};

/// A solver produced a state that violates one of its own guarantees.
struct InternalError : Error {
  using Error::Error;
};

}  // namespace deconflict
