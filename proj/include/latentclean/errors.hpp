#pragma once

#include <stdexcept>
#include <string>

namespace latentclean {

/// Base class for every error this library raises on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A file does not follow the binary format it claims to be in.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Two inputs that must describe the same data disagree (e.g. image/label counts).
class ConsistencyError : public Error {
public:
    using Error::Error;
};

/// A file ends before its declared payload does.
class TruncationError : public Error {
public:
    using Error::Error;
};

/// A caller-supplied argument is outside its documented domain.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Tensor or matrix shapes are incompatible for the requested operation.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A numeric contract was violated (NaN/Inf, nonpositive sigma, failed convergence).
class NumericError : public Error {
public:
    using Error::Error;
};

/// An operation was invoked in the wrong lifecycle state (e.g. backward without forward).
class StateError : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite loss; carries the epoch where it happened.
class TrainingDivergedError : public Error {
public:
    TrainingDivergedError(const std::string& what, int epoch)
        : Error(what), epoch_(epoch) {}
    int epoch() const { return epoch_; }

private:
    int epoch_;
};

/// A metric was requested on an empty or otherwise meaningless input.
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// File system failure, annotated with the path involved.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace latentclean
