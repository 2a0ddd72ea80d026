#include "payload.hpp"
#include "userl/core/text.hpp"
#include "userl/gyms/gyms.hpp"
#include "userl/gyms/search_backend.hpp"
#include "userl/usersim/prompt.hpp"

namespace userl::gyms {

namespace {

constexpr const char* kGym = "search";

}  // namespace

SearchGym::SearchGym(const TaskSpec& task) {
    const Json& p = task.payload;
    state_.question = detail::require_string(p, "question", kGym);
    state_.gold_answer = detail::require_string(p, "gold_answer", kGym);
    const auto method = detail::optional_string(p, "eval_method", "llm_judge");
    if (method == "llm_judge") {
        state_.evaluation = AnswerEvaluation::llm_judge;
    } else if (method == "rule" || method == "rule_normalized_match") {
        state_.evaluation = AnswerEvaluation::rule_normalized_match;
    } else {
        throw SchemaError("search 'eval_method' must be llm_judge or rule_normalized_match");
    }
}

std::string SearchGym::initial_observation() const {
    return "Question: " + state_.question +
           "\nUse `search` with a query to look up information (at most " + std::to_string(kSearchCap) +
           " searches), then `answer` with your final answer.";
}

GymReply SearchGym::step(const StepChoice& choice, const GymServices& services, const EnvConfig&) {
    GymReply reply;
    if (choice.verb == Verb::search) {
        if (state_.search_count >= kSearchCap) {
            reply.observation = "Search limit reached: at most " + std::to_string(kSearchCap) +
                                " searches are allowed. Please submit your answer.";
            reply.info["search_budget_exhausted"] = true;
            reply.info["search_count"] = state_.search_count;
            return reply;
        }
        if (services.search == nullptr) throw std::invalid_argument("search gym needs a search backend");
        const auto hits = services.search->search(choice.content);
        ++state_.search_count;
        reply.observation = format_hits(hits);
        reply.info["search_count"] = state_.search_count;
        reply.info["hits"] = hits.size();
        return reply;
    }

    bool correct = false;
    std::string feedback;
    if (state_.evaluation == AnswerEvaluation::rule_normalized_match) {
        correct = text::normalize_answer(choice.content) == text::normalize_answer(state_.gold_answer);
    } else {
        using namespace usersim;
        UserPort& port = detail::require_user(services, kGym);
        const auto& tmpl = templates::search_answer();
        UserQuery q;
        q.gym = GymKind::search;
        q.role = UserRole::judge;
        q.verb = choice.verb;
        q.system = render_prompt(tmpl, {{"question", state_.question}, {"gold_answer", state_.gold_answer}});
        q.conversation = {{"user", "Model's answer: " + choice.content}};
        q.agent_input = choice.content;
        JudgeResult r;
        try {
            r = judge_with_retry(port, std::move(q), tmpl.reply_schema);
        } catch (const ReplyParseError& e) {
            throw MalformedUserReply(std::string("search judge: ") + e.what());
        }
        correct = r.fields["judgment"].get<std::string>() == "Yes";
        feedback = r.fields.value("feedback", std::string{});
    }
    if (correct) {
        state_.answered = true;
        reply.raw_reward = 1.0;
        reply.goal_reached = true;
    }
    reply.observation = !feedback.empty() ? feedback : correct ? "Your answer is correct." : "Your answer is incorrect.";
    reply.info["correct"] = correct;
    return reply;
}

Json SearchGym::state() const {
    return Json{{"question", state_.question},
                {"search_count", state_.search_count},
                {"answered", state_.answered},
                {"eval_method", state_.evaluation == AnswerEvaluation::llm_judge ? "llm_judge" : "rule_normalized_match"}};
}

std::vector<std::string> SearchGym::secrets() const { return {state_.gold_answer}; }

double SearchGym::task_metric(std::span<const double>) const { return state_.answered ? 1.0 : 0.0; }

}  // namespace userl::gyms
