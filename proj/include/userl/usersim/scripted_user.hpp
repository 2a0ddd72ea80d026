#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "userl/usersim/user_port.hpp"

namespace userl::usersim {

/// Deterministic user double. Rules are tried in order; the first whose
/// role, verb and input class match the canonicalized agent input wins,
/// otherwise the per-role default reply is returned.
///
/// JSON form (as carried in a task's `metadata.script`):
///
///     {"rules": [{"role": "responder", "input": "is it man-made?", "reply": "..."},
///                {"role": "judge", "contains": "eiffel", "reply": "..."},
///                {"role": "judge", "verb": "answer", "any": true, "reply": "..."}],
///      "defaults": {"responder": "...", "judge": "..."}}
///
/// A reply may be a string or a JSON object; objects are rendered as a
/// fenced json block.
class ScriptedUser final : public UserPort {
public:
    struct Rule {
        std::optional<UserRole> role;
        std::optional<Verb> verb;
        enum class Match { exact, contains, any } match = Match::exact;
        std::string pattern;  // canonicalized
        std::string reply;
    };

    ScriptedUser() = default;
    ScriptedUser(std::vector<Rule> rules, std::map<UserRole, std::string> defaults);

    static ScriptedUser from_json(const Json& script);

    std::string_view implementation() const override { return "scripted"; }
    std::string query(const UserQuery& query) override;

    /// Pure lookup used by `query`.
    std::string reply_for(UserRole role, Verb verb, std::string_view agent_input) const;

private:
    std::vector<Rule> rules_;
    std::map<UserRole, std::string> defaults_;
};

/// Routes each query to the scripted user of the task it belongs to. The
/// orchestrator binds one of these per session.
std::unique_ptr<UserPort> make_scripted_port(const TaskSpec& task);

}  // namespace userl::usersim
