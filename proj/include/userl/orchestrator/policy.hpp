#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "userl/env/types.hpp"
#include "userl/net/chat_http.hpp"

namespace userl::orchestrator {

struct PolicyEndpoint {
    net::ChatEndpoint chat;
    double temperature = 1.0;
    int max_response_tokens = 2048;
};

struct PolicyCall {
    double temperature = 1.0;
    std::uint64_t seed = 0;
    int max_tokens = 2048;
};

struct PolicyReply {
    Json message = Json::object();  // the assistant message
    std::optional<int> completion_tokens;
};

/// pi_theta behind a chat interface. Implementations must allow concurrent
/// `complete` calls from different episodes.
class PolicyClient {
public:
    virtual ~PolicyClient() = default;
    virtual PolicyReply complete(const Json& messages, const Json& tools, const PolicyCall& call) = 0;
    virtual bool healthy() { return true; }
};

class HttpPolicyClient final : public PolicyClient {
public:
    explicit HttpPolicyClient(PolicyEndpoint endpoint, net::RetryPolicy retry = {});

    PolicyReply complete(const Json& messages, const Json& tools, const PolicyCall& call) override;
    bool healthy() override;

    const PolicyEndpoint& endpoint() const { return endpoint_; }

private:
    PolicyEndpoint endpoint_;
    net::RetryPolicy retry_;
};

/// Replays canned assistant messages: the reply to a conversation holding k
/// assistant messages is script[k] (the last entry repeats). Stateless, so
/// every episode sees the same script.
class ScriptedPolicy final : public PolicyClient {
public:
    explicit ScriptedPolicy(std::vector<Json> script);

    /// Shorthand for a script of well-formed tool calls.
    static ScriptedPolicy from_choices(const std::vector<StepChoice>& choices);

    PolicyReply complete(const Json& messages, const Json& tools, const PolicyCall& call) override;

private:
    std::vector<Json> script_;
};

/// An assistant message carrying one `interact_with_env` call.
Json tool_call_message(const StepChoice& choice, const std::string& thought = {}, const std::string& call_id = {});

struct ParsedToolCall {
    std::optional<StepChoice> choice;
    std::string error;    // set when choice is empty
    std::string call_id;  // from the wire, or empty for text-embedded calls
};

/// Extracts the single `interact_with_env` call from an assistant message:
/// `tool_calls[0]`, or one `<tool_call>{"name": ..., "arguments": ...}</tool_call>`
/// block in the content. More than one call, an unknown tool, a bad
/// `choice`, a verb the gym does not allow or empty content is an error.
ParsedToolCall parse_tool_call(const Json& assistant_message, GymKind gym);

}  // namespace userl::orchestrator
