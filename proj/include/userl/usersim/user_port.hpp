#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "userl/env/types.hpp"
#include "userl/usersim/reply_parser.hpp"

namespace userl::usersim {

enum class UserRole { responder, judge };

std::string_view to_string(UserRole role);
UserRole parse_user_role(std::string_view name);

struct ChatMessage {
    std::string role;  // "system" | "user" | "assistant" | "tool"
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

/// One request to the simulated user. `conversation` is what an LLM sees
/// after the system text; `agent_input` is the latest agent utterance on its
/// own, which scripted and human ports key on.
struct UserQuery {
    GymKind gym = GymKind::function;
    UserRole role = UserRole::responder;
    Verb verb = Verb::action;
    std::string system;
    std::vector<ChatMessage> conversation;
    std::string agent_input;
    const ReplySchema* schema = nullptr;
    double temperature = 0.0;
};

/// Sampling temperature for a (gym, role) pair. Judges always run at 0.0;
/// IntentionGym's free-form responder runs at 0.7 and every other
/// responder call at 0.0.
double default_temperature(GymKind gym, UserRole role);

/// The pluggable user simulator. Implementations must be safe to call from
/// several sessions at once unless `supports_concurrent_queries` is false.
class UserPort {
public:
    virtual ~UserPort() = default;

    virtual std::string_view implementation() const = 0;
    virtual std::string query(const UserQuery& query) = 0;
    virtual bool supports_concurrent_queries() const { return true; }
    virtual double temperature(GymKind gym, UserRole role) const { return default_temperature(gym, role); }
};

/// Fills in the port's temperature for (gym, role) and issues the query.
std::string query_user(UserPort& port, GymKind gym, UserRole role, std::string rendered_system,
                       std::vector<ChatMessage> conversation, std::string agent_input = {},
                       const ReplySchema* schema = nullptr, Verb verb = Verb::action);

std::string query_user(UserPort& port, UserQuery query);

struct JudgeResult {
    Json fields;
    int retry_count = 0;
};

/// Extra validation a gym applies to parsed fields; throws ReplyParseError
/// (or a subclass) to trigger the single re-ask.
using ReplyCheck = std::function<void(const Json&)>;

/// The follow-up query sent after an unusable reply: the bad reply plus a
/// format reminder appended to the conversation.
UserQuery reask_query(const UserQuery& query, const std::string& bad_reply, const std::exception& error);

/// query_user + parse_structured_reply with one re-ask on parse failure. On
/// the second failure the parse error propagates to the caller.
JudgeResult judge_with_retry(UserPort& port, UserQuery query, const ReplySchema& schema,
                             const ReplyCheck& check = {});

}  // namespace userl::usersim
