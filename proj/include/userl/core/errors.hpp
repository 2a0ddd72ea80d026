#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace userl {

/// Root of every error the engine throws. Callers that do not care about the
/// specific failure can catch this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// --- env-core -------------------------------------------------------------

class SchemaError : public Error {
public:
    using Error::Error;
};

class UnsupportedGym : public Error {
public:
    using Error::Error;
};

class VerbNotAllowed : public Error {
public:
    using Error::Error;
};

class SessionTerminated : public Error {
public:
    using Error::Error;
};

class InvalidChoice : public Error {
public:
    using Error::Error;
};

// --- user ports -----------------------------------------------------------

/// Any failure to obtain a usable reply from a user port. A session whose
/// step throws one of these is left exactly as it was before the step.
class UserPortFailure : public Error {
public:
    using Error::Error;
};

class EndpointTimeout : public UserPortFailure {
public:
    using UserPortFailure::UserPortFailure;
};

class HumanTimeout : public UserPortFailure {
public:
    using UserPortFailure::UserPortFailure;
};

class MalformedUserReply : public UserPortFailure {
public:
    using UserPortFailure::UserPortFailure;
};

class BackendUnavailable : public UserPortFailure {
public:
    using UserPortFailure::UserPortFailure;
};

class MissingPlaceholder : public Error {
public:
    explicit MissingPlaceholder(std::vector<std::string> names);
    const std::vector<std::string>& names() const noexcept { return names_; }

private:
    std::vector<std::string> names_;
};

class ReplyParseError : public Error {
public:
    using Error::Error;
};

class NoStructuredContent : public ReplyParseError {
public:
    using ReplyParseError::ReplyParseError;
};

class SchemaViolation : public ReplyParseError {
public:
    SchemaViolation(std::string field, const std::string& what);
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class CriterionCountMismatch : public ReplyParseError {
public:
    using ReplyParseError::ReplyParseError;
};

// --- reward engine ----------------------------------------------------------

class DomainError : public Error {
public:
    using Error::Error;
};

class GroupTooSmall : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

// --- orchestrator / lab -------------------------------------------------------

class PolicyMalformedToolCall : public Error {
public:
    using Error::Error;
};

class PolicyEndpointError : public Error {
public:
    using Error::Error;
};

class NonFiniteGradient : public Error {
public:
    using Error::Error;
};

}  // namespace userl
