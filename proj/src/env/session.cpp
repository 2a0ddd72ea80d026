#include "userl/env/session.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "userl/core/errors.hpp"

namespace userl {

void to_json(Json& j, const HistoryEntry& e) { j = Json{{"choice", e.choice}, {"outcome", e.outcome}}; }

void from_json(const Json& j, HistoryEntry& e) {
    e.choice = j.at("choice").get<StepChoice>();
    e.outcome = j.at("outcome").get<StepOutcome>();
}

double postprocess_reward(double raw, const EnvConfig& config, int /*step_index*/) {
    double r = raw * config.reward_scale - config.step_penalty;
    if (config.normalize_to_unit) r = std::clamp(r, 0.0, 1.0);
    return r;
}

EnvSession::EnvSession(TaskSpec task, EnvConfig config, GymServices services, std::unique_ptr<Gym> gym)
    : task_(std::move(task)), config_(config), services_(services), gym_(std::move(gym)) {}

Json EnvSession::info() const {
    return Json{{"task_id", task_.task_id},
                {"gym", to_string(task_.gym_kind)},
                {"initial_observation", gym_->initial_observation()},
                {"step_count", step_count()},
                {"gym_state", gym_->state()}};
}

StepOutcome EnvSession::step(const StepChoice& choice) {
    if (terminated()) throw SessionTerminated("session " + task_.task_id + " has already terminated");
    if (!verb_allowed(task_.gym_kind, choice.verb)) {
        throw VerbNotAllowed(std::string(to_string(task_.gym_kind)) + " gym does not accept '" +
                             std::string(to_string(choice.verb)) + "'");
    }
    if (choice.content.empty()) throw InvalidChoice("choice content must be non-empty");

    auto next = gym_->clone();
    GymReply reply = next->step(choice, services_, config_);
    if (!std::isfinite(reply.raw_reward)) throw std::logic_error("gym emitted a non-finite reward");

    // Commit.
    gym_ = std::move(next);
    const int index = step_count() + 1;
    StepOutcome outcome;
    outcome.observation = std::move(reply.observation);
    outcome.raw_reward = reply.raw_reward;
    outcome.reward = postprocess_reward(reply.raw_reward, config_, index);
    outcome.info = std::move(reply.info);
    if (reply.goal_reached) {
        reason_ = TerminationReason::goal;
    } else if (index >= config_.max_steps) {
        reason_ = TerminationReason::budget;
    }
    outcome.done = terminated();
    history_.push_back({choice, outcome});
    return outcome;
}

std::vector<double> EnvSession::rewards() const {
    std::vector<double> out;
    out.reserve(history_.size());
    for (const auto& h : history_) out.push_back(h.outcome.reward);
    return out;
}

EnvSession reset(const TaskSpec& task, const EnvConfig& config, GymServices services) {
    config.validate();
    auto gym = make_gym(task);
    if (gym->needs_user() && services.user == nullptr) {
        throw std::invalid_argument(std::string(to_string(task.gym_kind)) + " gym needs a user port");
    }
    if (gym->needs_search() && services.search == nullptr) {
        throw std::invalid_argument(std::string(to_string(task.gym_kind)) + " gym needs a search backend");
    }
    return EnvSession(task, config, services, std::move(gym));
}

Json history_to_json(const std::vector<HistoryEntry>& history) { return Json(history); }

std::vector<HistoryEntry> history_from_json(const Json& j) { return j.get<std::vector<HistoryEntry>>(); }

}  // namespace userl
