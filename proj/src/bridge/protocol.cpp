#include "userl/bridge/protocol.hpp"

#include <set>

#include "userl/core/text.hpp"

namespace userl::bridge {

namespace {

std::string_view kind_name(usersim::FieldKind k) {
    using usersim::FieldKind;
    switch (k) {
        case FieldKind::string: return "string";
        case FieldKind::enumeration: return "enum";
        case FieldKind::number: return "number";
        case FieldKind::boolean: return "boolean";
        case FieldKind::integer_list: return "integer_list";
        case FieldKind::array: return "array";
    }
    return "string";
}

void need(const Json& m, const char* field, bool (Json::*check)() const noexcept, const char* what) {
    if (!m.contains(field) || !(m[field].*check)()) {
        throw ProtocolError(m["type"].get<std::string>() + " needs " + what + " field '" + field + "'");
    }
}

}  // namespace

Json session_start(const std::string& session_id, GymKind gym, const std::string& task_id,
                   const std::string& ground_truth) {
    Json m{{"type", "session_start"}, {"session_id", session_id}, {"gym", to_string(gym)}, {"task_id", task_id}};
    if (!ground_truth.empty()) m["ground_truth"] = ground_truth;
    return m;
}

Json agent_turn(int turn_index, Verb verb, const std::string& role, const std::string& content,
                const usersim::ReplySchema* schema) {
    Json m{{"type", "agent_turn"}, {"turn_index", turn_index}, {"verb", to_string(verb)}, {"role", role},
           {"content", content}};
    if (schema) m["reply_schema"] = schema_to_json(*schema);
    return m;
}

Json human_reply_content(const std::string& content) { return {{"type", "human_reply"}, {"content", content}}; }
Json human_reply_choice(const std::string& choice) { return {{"type", "human_reply"}, {"enum_choice", choice}}; }
Json human_reply_fields(const Json& fields) { return {{"type", "human_reply"}, {"fields", fields}}; }

Json turn_reward(int turn_index, double value) {
    return {{"type", "turn_reward"}, {"turn_index", turn_index}, {"value", value}};
}

Json session_end(const Json& metrics, const std::string& status) {
    return {{"type", "session_end"}, {"metrics", metrics}, {"status", status}};
}

Json error_message(const std::string& code, const std::string& message) {
    return {{"type", "error"}, {"code", code}, {"message", message}};
}

std::string encode(const Json& message) {
    validate(message);
    return message.dump() + "\n";
}

Json decode(std::string_view line) {
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
    if (line.find('\n') != std::string_view::npos) throw ProtocolError("one message per line");
    auto m = Json::parse(line, nullptr, false);
    if (m.is_discarded()) throw ProtocolError("message is not valid JSON");
    validate(m);
    return m;
}

void validate(const Json& m) {
    if (!m.is_object() || !m.contains("type") || !m["type"].is_string()) {
        throw ProtocolError("message must be an object with a string 'type'");
    }
    const auto type = m["type"].get<std::string>();
    if (type == "session_start") {
        need(m, "session_id", &Json::is_string, "a string");
        need(m, "gym", &Json::is_string, "a string");
        need(m, "task_id", &Json::is_string, "a string");
        if (m.contains("ground_truth") && !m["ground_truth"].is_string()) throw ProtocolError("ground_truth must be a string");
    } else if (type == "agent_turn") {
        need(m, "turn_index", &Json::is_number_integer, "an integer");
        need(m, "verb", &Json::is_string, "a string");
        need(m, "content", &Json::is_string, "a string");
        parse_verb(m["verb"].get<std::string>());
    } else if (type == "human_reply") {
        const bool has_content = m.contains("content");
        const bool has_choice = m.contains("enum_choice");
        const bool has_fields = m.contains("fields");
        if (!has_content && !has_choice && !has_fields) {
            throw ProtocolError("human_reply needs content, enum_choice or fields");
        }
        if (has_content && !m["content"].is_string()) throw ProtocolError("content must be a string");
        if (has_choice && !m["enum_choice"].is_string()) throw ProtocolError("enum_choice must be a string");
        if (has_fields && !m["fields"].is_object()) throw ProtocolError("fields must be an object");
    } else if (type == "turn_reward") {
        need(m, "value", &Json::is_number, "a numeric");
    } else if (type == "session_end") {
        need(m, "metrics", &Json::is_object, "an object");
        need(m, "status", &Json::is_string, "a string");
    } else if (type == "error") {
        need(m, "code", &Json::is_string, "a string");
        need(m, "message", &Json::is_string, "a string");
    } else {
        throw ProtocolError("unknown message type '" + type + "'");
    }
}

Json schema_to_json(const usersim::ReplySchema& schema) {
    Json fields = Json::array();
    for (const auto& f : schema.fields) {
        Json j{{"name", f.name}, {"kind", kind_name(f.kind)}, {"required", f.required}};
        if (!f.labels.empty()) j["labels"] = f.labels;
        fields.push_back(std::move(j));
    }
    return Json{{"fields", fields}};
}

Json reply_to_fields(const Json& reply, const usersim::ReplySchema& schema) {
    using usersim::FieldKind;
    Json fields = reply.contains("fields") ? reply["fields"] : Json::object();
    const usersim::FieldSpec* enum_field = nullptr;
    const usersim::FieldSpec* text_field = nullptr;
    for (const auto& f : schema.fields) {
        if (!enum_field && f.kind == FieldKind::enumeration) enum_field = &f;
        if (!text_field && f.kind == FieldKind::string) text_field = &f;
    }
    if (reply.contains("enum_choice")) {
        if (!enum_field) throw SchemaViolation("enum_choice", "this turn takes no enumerated reply");
        fields[enum_field->name] = reply["enum_choice"];
    }
    if (reply.contains("content")) {
        const auto content = text::trim(reply["content"].get<std::string>());
        if (content.empty()) throw SchemaViolation("content", "reply is empty");
        const auto* target = text_field ? text_field : enum_field;
        if (!target) throw SchemaViolation("content", "this turn takes structured fields");
        if (!fields.contains(target->name)) fields[target->name] = content;
    }
    return usersim::parse_structured_reply(usersim::render_fenced(fields), schema);
}

}  // namespace userl::bridge
