#pragma once

#include <stdexcept>
#include <string>

namespace sico {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data violates a documented invariant (empty field, bad range, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A file or payload could not be parsed.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Filesystem failure; message names the path involved.
class IoError : public Error {
public:
    using Error::Error;
};

/// Run configuration is missing or inconsistent.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Transient transport failure. The gateway retries these with backoff;
/// anything else aborts immediately.
class TransportError : public Error {
public:
    using Error::Error;
};

/// Replay-mode request whose key has no recording.
class ReplayMissError : public Error {
public:
    using Error::Error;
};

/// A detector could not produce a verdict.
class DetectorError : public Error {
public:
    using Error::Error;
};

} // namespace sico
