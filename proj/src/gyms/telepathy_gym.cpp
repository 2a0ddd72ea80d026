#include "payload.hpp"
#include "userl/gyms/gyms.hpp"
#include "userl/usersim/prompt.hpp"

namespace userl::gyms {

namespace {

constexpr const char* kGym = "telepathy";

}  // namespace

TelepathyGym::TelepathyGym(const TaskSpec& task) {
    const Json& p = task.payload;
    state_.target_entity = detail::require_string(p, "target_entity", kGym);
    state_.category = detail::optional_string(p, "category", "an entity");
    state_.entity_description = detail::optional_string(p, "entity_description", state_.target_entity);
}

std::string TelepathyGym::initial_observation() const {
    return "I am thinking of " + state_.category +
           ". Ask yes/no questions with `action` to narrow it down, then make your final guess with `answer`.";
}

GymReply TelepathyGym::step(const StepChoice& choice, const GymServices& services, const EnvConfig&) {
    using namespace usersim;
    UserPort& port = detail::require_user(services, kGym);
    GymReply reply;
    if (choice.verb == Verb::action) {
        const auto& tmpl = templates::telepathy_question();
        UserQuery q;
        q.gym = GymKind::telepathy;
        q.role = UserRole::responder;
        q.verb = choice.verb;
        q.system = render_prompt(tmpl, {{"target_entity", state_.target_entity},
                                        {"entity_description", state_.entity_description}});
        q.conversation = detail::dialogue(state_.clue_history, choice.content);
        q.agent_input = choice.content;
        JudgeResult r;
        try {
            r = judge_with_retry(port, std::move(q), tmpl.reply_schema);
        } catch (const ReplyParseError& e) {
            throw MalformedUserReply(std::string("telepathy responder: ") + e.what());
        }
        const auto answer = r.fields["response"].get<std::string>();
        state_.clue_history.emplace_back(choice.content, answer);
        reply.observation = answer;
        reply.info["reply"] = answer;
        return reply;
    }

    const auto& tmpl = templates::telepathy_guess();
    UserQuery q;
    q.gym = GymKind::telepathy;
    q.role = UserRole::judge;
    q.verb = choice.verb;
    q.system = render_prompt(tmpl, {{"target_entity", state_.target_entity}});
    q.conversation = {{"user", "My final guess is: " + choice.content}};
    q.agent_input = choice.content;
    JudgeResult r;
    try {
        r = judge_with_retry(port, std::move(q), tmpl.reply_schema);
    } catch (const ReplyParseError& e) {
        throw MalformedUserReply(std::string("telepathy judge: ") + e.what());
    }
    const bool correct = r.fields["judgment"].get<std::string>() == "Yes";
    if (correct) {
        state_.solved = true;
        reply.raw_reward = 1.0;
        reply.goal_reached = true;
    }
    const std::string feedback = r.fields.value("feedback", std::string{});
    reply.observation = !feedback.empty() ? feedback
                        : correct         ? "Yes, you guessed it!"
                                          : "No, that is not what I am thinking of.";
    reply.info["judgment"] = correct ? "Yes" : "No";
    return reply;
}

Json TelepathyGym::state() const {
    Json clues = Json::array();
    for (const auto& [q, a] : state_.clue_history) clues.push_back({{"question", q}, {"reply", a}});
    return Json{{"target_entity", state_.target_entity},
                {"category", state_.category},
                {"clue_history", clues},
                {"solved", state_.solved}};
}

std::vector<std::string> TelepathyGym::secrets() const { return {state_.target_entity}; }

double TelepathyGym::task_metric(std::span<const double>) const { return state_.solved ? 1.0 : 0.0; }

}  // namespace userl::gyms
