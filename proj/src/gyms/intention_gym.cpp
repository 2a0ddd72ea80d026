#include <algorithm>
#include <future>
#include <iostream>
#include <set>

#include "payload.hpp"
#include "userl/gyms/gyms.hpp"
#include "userl/usersim/prompt.hpp"

namespace userl::gyms {

namespace {

constexpr const char* kGym = "intention";

std::string_view importance_name(int importance) {
    switch (importance) {
        case 3: return "High";
        case 2: return "Medium";
        default: return "Low";
    }
}

}  // namespace

double intention_base_reward(int importance) {
    switch (importance) {
        case 3: return 1.0;
        case 2: return 0.7;
        case 1: return 0.4;
        default: throw std::out_of_range("importance must be 1, 2 or 3");
    }
}

double intention_reward(const std::vector<int>& newly_covered_importances) {
    if (newly_covered_importances.empty()) return 0.0;
    double sum = 0.0;
    for (int imp : newly_covered_importances) sum += intention_base_reward(imp);
    return sum - 0.2 * static_cast<double>(newly_covered_importances.size() - 1);
}

IntentionGym::IntentionGym(const TaskSpec& task) {
    const Json& p = task.payload;
    state_.vague_task = detail::require_string(p, "task", kGym);
    const Json& details = detail::require(p, "missing_details", kGym);
    if (!details.is_array() || details.empty()) {
        throw SchemaError("intention payload 'missing_details' must be a non-empty list");
    }
    for (const auto& d : details) {
        MissingDetail md;
        md.text = detail::require_string(d, "description", kGym);
        if (!d.contains("importance") || !d["importance"].is_number_integer()) {
            throw SchemaError("intention detail importance must be an integer 1..3");
        }
        md.importance = d["importance"].get<int>();
        if (md.importance < 1 || md.importance > 3) throw SchemaError("intention detail importance must be 1..3");
        state_.missing_details.push_back(std::move(md));
    }
}

std::string IntentionGym::initial_observation() const {
    return "A user posted this request: \"" + state_.vague_task +
           "\"\nThe request is vague. Ask clarifying questions with `action` to uncover what the user really needs.";
}

GymReply IntentionGym::step(const StepChoice& choice, const GymServices& services, const EnvConfig&) {
    using namespace usersim;
    UserPort& port = detail::require_user(services, kGym);

    std::string remaining;
    for (std::size_t i = 0; i < state_.missing_details.size(); ++i) {
        const auto& d = state_.missing_details[i];
        if (d.covered) continue;
        remaining += std::to_string(i + 1) + ". [" + std::string(importance_name(d.importance)) + "] " + d.text + "\n";
    }

    const auto& resp_tmpl = templates::intention_response();
    UserQuery resp_q;
    resp_q.gym = GymKind::intention;
    resp_q.role = UserRole::responder;
    resp_q.verb = choice.verb;
    resp_q.system = render_prompt(resp_tmpl, {{"vague_task", state_.vague_task}});
    resp_q.conversation = detail::dialogue(state_.conversation, choice.content);
    resp_q.agent_input = choice.content;

    const auto& cov_tmpl = templates::intention_coverage();
    UserQuery cov_q;
    cov_q.gym = GymKind::intention;
    cov_q.role = UserRole::judge;
    cov_q.verb = choice.verb;
    cov_q.system = render_prompt(cov_tmpl, {{"vague_task", state_.vague_task}, {"missing_details", remaining}});
    cov_q.conversation = {{"user", "Latest question: " + choice.content}};
    cov_q.agent_input = choice.content;

    auto respond = [&] { return judge_with_retry(port, resp_q, resp_tmpl.reply_schema); };
    auto evaluate = [&] { return judge_with_retry(port, cov_q, cov_tmpl.reply_schema); };

    JudgeResult response;
    JudgeResult coverage;
    try {
        if (port.supports_concurrent_queries()) {
            auto pending = std::async(std::launch::async, respond);
            coverage = evaluate();
            response = pending.get();
        } else {
            response = respond();
            coverage = evaluate();
        }
    } catch (const ReplyParseError& e) {
        throw MalformedUserReply(std::string("intention user: ") + e.what());
    }

    std::set<long long> seen;
    std::vector<int> newly_importances;
    Json newly = Json::array();
    Json dropped = Json::array();
    for (const auto& idx_json : coverage.fields["covered_detail_indices"]) {
        const long long idx = idx_json.get<long long>();
        if (!seen.insert(idx).second) continue;
        if (idx < 1 || idx > static_cast<long long>(state_.missing_details.size())) {
            dropped.push_back(idx);
            continue;
        }
        auto& d = state_.missing_details[static_cast<std::size_t>(idx - 1)];
        if (d.covered) continue;
        d.covered = true;
        newly_importances.push_back(d.importance);
        newly.push_back(idx);
    }
    if (!dropped.empty()) {
        std::clog << "[intention] coverage judge returned out-of-range indices " << dropped.dump() << ", dropped\n";
    }

    const std::string text = response.fields["response"].get<std::string>();
    state_.conversation.emplace_back(choice.content, text);

    GymReply reply;
    reply.observation = text;
    reply.raw_reward = intention_reward(newly_importances);
    reply.goal_reached = std::all_of(state_.missing_details.begin(), state_.missing_details.end(),
                                     [](const MissingDetail& d) { return d.covered; });
    reply.info["newly_covered"] = newly;
    if (!dropped.empty()) reply.info["dropped_indices"] = dropped;
    return reply;
}

Json IntentionGym::state() const {
    Json details = Json::array();
    for (const auto& d : state_.missing_details) {
        details.push_back({{"description", d.text}, {"importance", d.importance}, {"covered", d.covered}});
    }
    return Json{{"vague_task", state_.vague_task}, {"missing_details", details}};
}

std::vector<std::string> IntentionGym::secrets() const {
    std::vector<std::string> out;
    for (const auto& d : state_.missing_details) out.push_back(d.text);
    return out;
}

}  // namespace userl::gyms
