#include "userl/usersim/scripted_user.hpp"

#include <memory>

#include "userl/core/errors.hpp"
#include "userl/core/text.hpp"

namespace userl::usersim {

namespace {

std::string reply_text(const Json& j) {
    if (j.is_string()) return j.get<std::string>();
    return render_fenced(j);
}

constexpr std::string_view kNeutral = "```json\n{\"response\": \"Maybe\"}\n```";

}  // namespace

ScriptedUser::ScriptedUser(std::vector<Rule> rules, std::map<UserRole, std::string> defaults)
    : rules_(std::move(rules)), defaults_(std::move(defaults)) {
    for (auto& r : rules_) r.pattern = text::canonicalize(r.pattern);
}

ScriptedUser ScriptedUser::from_json(const Json& script) {
    std::vector<Rule> rules;
    std::map<UserRole, std::string> defaults;
    if (!script.is_object()) throw SchemaError("script must be a JSON object");
    for (const auto& r : script.value("rules", Json::array())) {
        Rule rule;
        if (r.contains("role")) rule.role = parse_user_role(r["role"].get<std::string>());
        if (r.contains("verb")) rule.verb = parse_verb(r["verb"].get<std::string>());
        if (r.contains("input")) {
            rule.match = Rule::Match::exact;
            rule.pattern = r["input"].get<std::string>();
        } else if (r.contains("contains")) {
            rule.match = Rule::Match::contains;
            rule.pattern = r["contains"].get<std::string>();
        } else if (r.value("any", false)) {
            rule.match = Rule::Match::any;
        } else {
            throw SchemaError("script rule needs one of 'input', 'contains' or 'any'");
        }
        if (!r.contains("reply")) throw SchemaError("script rule without 'reply'");
        rule.reply = reply_text(r["reply"]);
        rules.push_back(std::move(rule));
    }
    const Json default_replies = script.value("defaults", Json::object());
    for (const auto& [role, reply] : default_replies.items()) {
        defaults[parse_user_role(role)] = reply_text(reply);
    }
    return ScriptedUser(std::move(rules), std::move(defaults));
}

std::string ScriptedUser::reply_for(UserRole role, Verb verb, std::string_view agent_input) const {
    const std::string key = text::canonicalize(agent_input);
    for (const auto& rule : rules_) {
        if (rule.role && *rule.role != role) continue;
        if (rule.verb && *rule.verb != verb) continue;
        switch (rule.match) {
            case Rule::Match::exact:
                if (key == rule.pattern) return rule.reply;
                break;
            case Rule::Match::contains:
                if (key.find(rule.pattern) != std::string::npos) return rule.reply;
                break;
            case Rule::Match::any:
                return rule.reply;
        }
    }
    if (auto it = defaults_.find(role); it != defaults_.end()) return it->second;
    return std::string(kNeutral);
}

std::string ScriptedUser::query(const UserQuery& query) { return reply_for(query.role, query.verb, query.agent_input); }

std::unique_ptr<UserPort> make_scripted_port(const TaskSpec& task) {
    if (task.metadata.contains("script")) {
        return std::make_unique<ScriptedUser>(ScriptedUser::from_json(task.metadata["script"]));
    }
    return std::make_unique<ScriptedUser>();
}

}  // namespace userl::usersim
