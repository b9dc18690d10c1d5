#pragma once

#include <stdexcept>
#include <string>

namespace rlaa {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A model reply could not be mapped to the expected structure.
class ParseError : public Error {
public:
    using Error::Error;
};

/// A prompt template is missing a placeholder or was given degenerate input.
class TemplateError : public Error {
public:
    using Error::Error;
};

/// build_anonymizer_prompt was called with nothing to act on.
class EmptyPolicyError : public Error {
public:
    using Error::Error;
};

class TransportError : public Error {
public:
    using Error::Error;
};

/// The completion envelope came back but did not have the expected shape.
class ProtocolError : public Error {
public:
    using Error::Error;
};

class AuthError : public Error {
public:
    using Error::Error;
};

/// Replay was asked for a request digest the cassette does not hold.
class CassetteMiss : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class EmptyProtectedSetError : public DomainError {
public:
    using DomainError::DomainError;
};

}  // namespace rlaa
