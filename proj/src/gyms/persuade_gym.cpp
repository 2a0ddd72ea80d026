#include <iostream>

#include "payload.hpp"
#include "userl/core/text.hpp"
#include "userl/gyms/gyms.hpp"
#include "userl/usersim/prompt.hpp"

namespace userl::gyms {

namespace {

constexpr const char* kGym = "persuade";

// Best-effort recovery of the conversational reply when the stance label
// could not be used.
std::string salvage_response(const std::string& raw) {
    try {
        const Json j = Json::parse(usersim::extract_structured_text(raw), nullptr, false);
        if (j.is_object() && j.contains("response") && j["response"].is_string()) return j["response"];
    } catch (const Error&) {
    }
    return "I need to think about that.";
}

}  // namespace

std::optional<int> stance_level(std::string_view label) {
    const auto folded = text::to_lower(text::trim(label));
    for (std::size_t i = 0; i < kStanceLabels.size(); ++i) {
        if (text::to_lower(kStanceLabels[i]) == folded) return static_cast<int>(i);
    }
    return std::nullopt;
}

double stance_value(int level) { return static_cast<double>(level) / kMaxStanceLevel; }

PersuadeGym::PersuadeGym(const TaskSpec& task) {
    state_.statement = detail::require_string(task.payload, "statement", kGym);
    state_.initial_argument = detail::require_string(task.payload, "initial_argument", kGym);
}

std::string PersuadeGym::initial_observation() const {
    return "The user strongly agrees with this statement: \"" + state_.statement + "\"\nTheir argument: " +
           state_.initial_argument +
           "\nUse `action` to present arguments that persuade the user to disagree with the statement.";
}

GymReply PersuadeGym::step(const StepChoice& choice, const GymServices& services, const EnvConfig&) {
    using namespace usersim;
    UserPort& port = detail::require_user(services, kGym);
    const auto& tmpl = templates::persuade_stance();
    UserQuery q;
    q.gym = GymKind::persuade;
    q.role = UserRole::responder;
    q.verb = choice.verb;
    q.system = render_prompt(tmpl, {{"statement", state_.statement},
                                    {"initial_argument", state_.initial_argument},
                                    {"current_stance", std::string(kStanceLabels[state_.stance_level])}});
    q.conversation = detail::dialogue(state_.conversation, choice.content);
    q.agent_input = choice.content;
    q.schema = &tmpl.reply_schema;

    GymReply reply;
    const int old_level = state_.stance_level;
    auto apply = [&](const Json& fields) {
        const int new_level = *stance_level(fields["stance"].get<std::string>());
        reply.observation = fields["response"].get<std::string>();
        reply.raw_reward = new_level > old_level ? stance_value(new_level - old_level) : 0.0;
        state_.stance_level = new_level;
    };
    const std::string first = query_user(port, q);
    try {
        apply(parse_structured_reply(first, tmpl.reply_schema));
    } catch (const ReplyParseError& first_error) {
        const std::string second = query_user(port, reask_query(q, first, first_error));
        try {
            apply(parse_structured_reply(second, tmpl.reply_schema));
        } catch (const SchemaViolation& e) {
            if (e.field() != "stance") throw MalformedUserReply(std::string("persuade user: ") + e.what());
            // Unknown stance label after one re-ask: keep the stance, pay nothing.
            std::clog << "[persuade] unknown stance label, stance unchanged: " << e.what() << "\n";
            reply.observation = salvage_response(second);
            reply.info["unknown_stance"] = true;
        } catch (const ReplyParseError& e) {
            throw MalformedUserReply(std::string("persuade user: ") + e.what());
        }
    }
    state_.conversation.emplace_back(choice.content, reply.observation);
    reply.goal_reached = state_.stance_level == kMaxStanceLevel;
    reply.info["stance"] = std::string(kStanceLabels[state_.stance_level]);
    reply.info["stance_level"] = state_.stance_level;
    return reply;
}

Json PersuadeGym::state() const {
    return Json{{"statement", state_.statement},
                {"initial_argument", state_.initial_argument},
                {"stance", std::string(kStanceLabels[state_.stance_level])},
                {"stance_level", state_.stance_level}};
}

}  // namespace userl::gyms
