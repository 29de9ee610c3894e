#pragma once

#include <stdexcept>
#include <string>

namespace sme {

// Base class for every error raised by the library. Each subclass maps to one
// failure mode named in the public contracts so callers (the CLI in particular)
// can translate them into exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain (negative x, p outside (0,1), ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Weight vector or parameter that violates a construction invariant.
class InvalidDistribution : public Error {
public:
    using Error::Error;
};

// Components that must share one Erlang scale do not.
class ScaleMismatch : public Error {
public:
    using Error::Error;
};

// Rescaling to a smaller rate is not representable as an Erlang mixture.
class RescaleDownward : public Error {
public:
    using Error::Error;
};

// Root bracketing failed (e.g. a quantile of a defective law above its mass).
class BracketFailure : public Error {
public:
    using Error::Error;
};

// A closed form produced materially negative mixing weights; the model is
// infeasible or mis-specified.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

// Malformed model file or schema violation.
class ParseError : public Error {
public:
    using Error::Error;
};

// Alpha outside the admissible range for the chosen kernel.
class OutOfBounds : public Error {
public:
    using Error::Error;
};

// Rejection envelope exceeded by the Sarmanov bracket.
class EnvelopeViolation : public Error {
public:
    using Error::Error;
};

}  // namespace sme
