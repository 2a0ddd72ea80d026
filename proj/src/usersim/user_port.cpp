#include "userl/usersim/user_port.hpp"

#include "userl/core/errors.hpp"
#include "userl/core/text.hpp"

namespace userl::usersim {

std::string_view to_string(UserRole role) { return role == UserRole::judge ? "judge" : "responder"; }

UserRole parse_user_role(std::string_view name) {
    const auto n = text::to_lower(text::trim(name));
    if (n == "judge") return UserRole::judge;
    if (n == "responder") return UserRole::responder;
    throw SchemaError("unknown user role '" + std::string(name) + "'");
}

double default_temperature(GymKind gym, UserRole role) {
    if (role == UserRole::judge) return 0.0;
    return gym == GymKind::intention ? 0.7 : 0.0;
}

std::string query_user(UserPort& port, UserQuery query) {
    if (query.conversation.empty()) throw std::invalid_argument("query_user: conversation must be non-empty");
    query.temperature = port.temperature(query.gym, query.role);
    return port.query(query);
}

std::string query_user(UserPort& port, GymKind gym, UserRole role, std::string rendered_system,
                       std::vector<ChatMessage> conversation, std::string agent_input, const ReplySchema* schema,
                       Verb verb) {
    UserQuery q;
    q.gym = gym;
    q.role = role;
    q.verb = verb;
    q.system = std::move(rendered_system);
    q.conversation = std::move(conversation);
    q.agent_input = std::move(agent_input);
    q.schema = schema;
    return query_user(port, std::move(q));
}

JudgeResult judge_with_retry(UserPort& port, UserQuery query, const ReplySchema& schema, const ReplyCheck& check) {
    query.schema = &schema;
    auto parse = [&](const std::string& raw) {
        Json fields = parse_structured_reply(raw, schema);
        if (check) check(fields);
        return fields;
    };
    const std::string first_raw = query_user(port, query);
    try {
        return {parse(first_raw), 0};
    } catch (const ReplyParseError& first) {
        return {parse(query_user(port, reask_query(query, first_raw, first))), 1};
    }
}

UserQuery reask_query(const UserQuery& query, const std::string& bad_reply, const std::exception& error) {
    UserQuery again = query;
    again.conversation.push_back({"assistant", bad_reply});
    again.conversation.push_back(
        {"user", std::string("Your previous reply could not be used (") + error.what() +
                     "). Reply again using exactly the JSON format given in your instructions, "
                     "inside a ```json fenced block."});
    return again;
}

}  // namespace userl::usersim
