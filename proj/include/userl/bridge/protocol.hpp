#pragma once

#include <string>
#include <string_view>

#include "userl/core/errors.hpp"
#include "userl/env/types.hpp"
#include "userl/usersim/reply_parser.hpp"

namespace userl::bridge {

/// A line that is not a valid bridge message.
class ProtocolError : public Error {
public:
    using Error::Error;
};

// Message constructors. Every message is a JSON object with a "type" field.
Json session_start(const std::string& session_id, GymKind gym, const std::string& task_id,
                   const std::string& ground_truth);
Json agent_turn(int turn_index, Verb verb, const std::string& role, const std::string& content,
                const usersim::ReplySchema* schema);
Json human_reply_content(const std::string& content);
Json human_reply_choice(const std::string& enum_choice);
Json human_reply_fields(const Json& fields);
Json turn_reward(int turn_index, double value);
Json session_end(const Json& metrics, const std::string& status);
Json error_message(const std::string& code, const std::string& message);

/// One message per line: compact JSON plus '\n'.
std::string encode(const Json& message);

/// Parses and validates one line (a trailing newline is optional).
/// Throws ProtocolError.
Json decode(std::string_view line);

/// Checks type and required fields of an already parsed message.
void validate(const Json& message);

Json schema_to_json(const usersim::ReplySchema& schema);

/// Turns a human_reply into the structured fields the gym expects:
/// `fields` is taken as is, `enum_choice` fills the schema's first enum
/// field and `content` its first free-text field (or the enum field when
/// the schema has no free-text field). The result is checked against the
/// schema; throws SchemaViolation or NoStructuredContent on a bad reply.
Json reply_to_fields(const Json& human_reply, const usersim::ReplySchema& schema);

}  // namespace userl::bridge
