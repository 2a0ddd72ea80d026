#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "userl/usersim/reply_parser.hpp"
#include "userl/usersim/user_port.hpp"

namespace userl::usersim {

/// System instruction for one simulated-user call. Placeholders are written
/// `{{name}}`.
struct PromptTemplate {
    std::string id;
    GymKind gym = GymKind::function;
    UserRole role = UserRole::responder;
    std::string system_text;
    ReplySchema reply_schema;
};

using Bindings = std::map<std::string, std::string, std::less<>>;

/// Placeholder names in order of first appearance.
std::vector<std::string> placeholders(std::string_view text);

/// Single-pass substitution; bound values are not rescanned. Extra bindings
/// are ignored. Throws MissingPlaceholder naming every unresolved name.
std::string render(std::string_view text, const Bindings& bindings);
std::string render_prompt(const PromptTemplate& tmpl, const Bindings& bindings);

namespace templates {

const PromptTemplate& intention_response();
const PromptTemplate& intention_coverage();
const PromptTemplate& persuade_stance();
const PromptTemplate& turtle_inquiry();
const PromptTemplate& turtle_scoring();
const PromptTemplate& telepathy_question();
const PromptTemplate& telepathy_guess();
const PromptTemplate& search_answer();
const PromptTemplate& travel_utterance();

std::vector<const PromptTemplate*> all();

}  // namespace templates

}  // namespace userl::usersim
