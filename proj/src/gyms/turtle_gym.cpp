#include <algorithm>
#include <cmath>

#include "payload.hpp"
#include "userl/core/text.hpp"
#include "userl/gyms/gyms.hpp"
#include "userl/usersim/prompt.hpp"

namespace userl::gyms {

namespace {

constexpr const char* kGym = "turtle";

double score_value(const Json& entry) {
    const Json& v = entry.is_object() ? entry.value("score", Json()) : entry;
    std::optional<double> s;
    if (v.is_number()) s = v.get<double>();
    if (v.is_string()) s = text::parse_number(v.get<std::string>());
    if (!s || (*s != 0.0 && *s != 0.5 && *s != 1.0)) {
        throw SchemaViolation("scores", "each score must be 0, 0.5 or 1.0");
    }
    return *s;
}

std::vector<double> score_list(const Json& scores) {
    std::vector<double> out;
    for (const auto& e : scores) out.push_back(score_value(e));
    return out;
}

}  // namespace

TurtleGym::TurtleGym(const TaskSpec& task) {
    const Json& p = task.payload;
    state_.surface = detail::require_string(p, "surface", kGym);
    state_.bottom = detail::require_string(p, "bottom", kGym);
    const Json& criteria = detail::require(p, "criteria", kGym);
    if (!criteria.is_array() || criteria.empty()) throw SchemaError("turtle payload 'criteria' must be a non-empty list");
    double total = 0.0;
    for (const auto& c : criteria) {
        TurtleCriterion tc;
        tc.statement = detail::require_string(c, "statement", kGym);
        if (!c.contains("weight") || !c["weight"].is_number() || c["weight"].get<double>() < 0.0) {
            throw SchemaError("turtle criterion weight must be a non-negative number");
        }
        tc.weight = c["weight"].get<double>();
        total += tc.weight;
        state_.criteria.push_back(std::move(tc));
    }
    if (std::fabs(total - 1.0) > 1e-9) throw SchemaError("turtle criterion weights must sum to 1");
}

double TurtleGym::weighted_score(const std::vector<TurtleCriterion>& criteria, const std::vector<double>& scores) {
    if (scores.size() != criteria.size()) throw CriterionCountMismatch("score count differs from criterion count");
    double s = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) s += criteria[i].weight * scores[i];
    return std::clamp(s, 0.0, 1.0);
}

std::string TurtleGym::initial_observation() const {
    return "Here is a mysterious story (the surface):\n" + state_.surface +
           "\nAsk yes/no questions with `action` to uncover the hidden truth, and explain the full story with "
           "`answer` when ready.";
}

GymReply TurtleGym::step(const StepChoice& choice, const GymServices& services, const EnvConfig& config) {
    using namespace usersim;
    UserPort& port = detail::require_user(services, kGym);
    GymReply reply;
    if (choice.verb == Verb::action) {
        const auto& tmpl = templates::turtle_inquiry();
        UserQuery q;
        q.gym = GymKind::turtle;
        q.role = UserRole::responder;
        q.verb = choice.verb;
        q.system = render_prompt(tmpl, {{"surface", state_.surface}, {"bottom", state_.bottom}});
        q.conversation = detail::dialogue(state_.inquiry_history, choice.content);
        q.agent_input = choice.content;
        JudgeResult r;
        try {
            r = judge_with_retry(port, std::move(q), tmpl.reply_schema);
        } catch (const ReplyParseError& e) {
            throw MalformedUserReply(std::string("turtle responder: ") + e.what());
        }
        const auto answer = r.fields["response"].get<std::string>();
        state_.inquiry_history.emplace_back(choice.content, answer);
        reply.observation = answer;
        reply.info["reply"] = answer;
        return reply;
    }

    std::string protocol;
    for (std::size_t i = 0; i < state_.criteria.size(); ++i) {
        protocol += std::to_string(i + 1) + ". " + state_.criteria[i].statement + "\n";
    }
    const auto& tmpl = templates::turtle_scoring();
    UserQuery q;
    q.gym = GymKind::turtle;
    q.role = UserRole::judge;
    q.verb = choice.verb;
    q.system = render_prompt(tmpl, {{"surface", state_.surface}, {"bottom", state_.bottom}, {"criteria", protocol}});
    q.conversation = {{"user", "My explanation of the story: " + choice.content}};
    q.agent_input = choice.content;
    const auto check = [this](const Json& fields) { weighted_score(state_.criteria, score_list(fields["scores"])); };
    JudgeResult r;
    try {
        r = judge_with_retry(port, std::move(q), tmpl.reply_schema, check);
    } catch (const CriterionCountMismatch&) {
        throw;
    } catch (const ReplyParseError& e) {
        throw MalformedUserReply(std::string("turtle judge: ") + e.what());
    }
    const auto scores = score_list(r.fields["scores"]);
    const double s = weighted_score(state_.criteria, scores);
    // Only strict improvements over the best answer so far pay out.
    reply.raw_reward = s > state_.best_score ? s - state_.best_score : 0.0;
    state_.best_score = std::max(state_.best_score, s);
    reply.goal_reached = s >= config.success_threshold;
    const std::string feedback = r.fields.value("feedback", std::string{});
    reply.observation = !feedback.empty() ? feedback : "Your explanation has been evaluated.";
    reply.info["score"] = s;
    reply.info["best_score"] = state_.best_score;
    reply.info["criterion_scores"] = scores;
    return reply;
}

Json TurtleGym::state() const {
    Json criteria = Json::array();
    for (const auto& c : state_.criteria) criteria.push_back({{"statement", c.statement}, {"weight", c.weight}});
    return Json{{"surface", state_.surface},
                {"bottom", state_.bottom},
                {"criteria", criteria},
                {"best_score", state_.best_score},
                {"inquiries", state_.inquiry_history.size()}};
}

std::vector<std::string> TurtleGym::secrets() const { return {state_.bottom}; }

}  // namespace userl::gyms
