#include "userl/reward/trajectory.hpp"

#include <algorithm>
#include <ostream>

namespace userl::reward {

std::string_view to_string(TrajectoryEnd e) {
    switch (e) {
        case TrajectoryEnd::goal: return "goal";
        case TrajectoryEnd::budget: return "budget";
        case TrajectoryEnd::aborted: return "aborted";
    }
    return "aborted";
}

TrajectoryEnd parse_trajectory_end(std::string_view name) {
    if (name == "goal") return TrajectoryEnd::goal;
    if (name == "budget") return TrajectoryEnd::budget;
    if (name == "aborted") return TrajectoryEnd::aborted;
    throw SchemaError("unknown termination reason '" + std::string(name) + "'");
}

std::vector<double> Trajectory::rewards() const {
    std::vector<double> out;
    out.reserve(turns.size());
    for (const auto& t : turns) out.push_back(t.raw_reward);
    return out;
}

std::vector<int> Trajectory::token_counts() const {
    std::vector<int> out;
    out.reserve(turns.size());
    for (const auto& t : turns) out.push_back(t.token_count);
    return out;
}

bool RolloutGroup::flagged() const {
    return std::any_of(trajectories.begin(), trajectories.end(),
                       [](const Trajectory& t) { return t.terminated_reason == TrajectoryEnd::aborted; });
}

AdvantageTensor group_advantages(RolloutGroup& group, const ShapingSpec& spec) {
    std::vector<Eigen::VectorXd> rewards;
    rewards.reserve(group.trajectories.size());
    for (const auto& t : group.trajectories) {
        if (t.task_id != group.task_id) throw std::invalid_argument("trajectory task_id differs from its group");
        rewards.push_back(as_vector(t.rewards()));
    }
    const auto result = compute_group(spec, rewards);
    group.group_mean = result.stats.mean;
    group.group_std = result.stats.std;

    AdvantageTensor out;
    for (std::size_t i = 0; i < group.trajectories.size(); ++i) {
        const auto& t = group.trajectories[i];
        TrajectoryAdvantage a;
        a.task_id = t.task_id;
        a.trajectory_index = t.trajectory_index;
        a.turn_rewards = to_std(rewards[i]);
        a.shaped_rewards = to_std(result.shaped[i]);
        a.trajectory_score = result.scores[static_cast<Eigen::Index>(i)];
        a.per_turn_advantages = to_std(result.advantages[i]);
        a.token_counts = t.token_counts();
        a.token_advantages = to_std(broadcast_to_tokens<double>(result.advantages[i], a.token_counts));
        out.push_back(std::move(a));
    }
    return out;
}

void to_json(Json& j, const TurnRecord& t) {
    j = Json{{"turn_index", t.turn_index},
             {"choice", t.choice},
             {"observation", t.observation},
             {"raw_reward", t.raw_reward},
             {"token_count", t.token_count},
             {"token_count_estimated", t.token_count_estimated}};
}

void from_json(const Json& j, TurnRecord& t) {
    t.turn_index = j.at("turn_index").get<int>();
    t.choice = j.at("choice").get<StepChoice>();
    t.observation = j.at("observation").get<std::string>();
    t.raw_reward = j.at("raw_reward").get<double>();
    t.token_count = j.at("token_count").get<int>();
    t.token_count_estimated = j.value("token_count_estimated", false);
}

void to_json(Json& j, const Trajectory& t) {
    j = Json{{"task_id", t.task_id},
             {"gym", to_string(t.gym_kind)},
             {"trajectory_index", t.trajectory_index},
             {"seed", t.seed},
             {"turns", t.turns},
             {"rewards", t.rewards()},
             {"terminated_reason", to_string(t.terminated_reason)},
             {"task_metric", t.task_metric}};
    if (!t.abort_detail.empty()) j["abort_detail"] = t.abort_detail;
}

void from_json(const Json& j, Trajectory& t) {
    t.task_id = j.at("task_id").get<std::string>();
    t.gym_kind = parse_gym_kind(j.at("gym").get<std::string>());
    t.trajectory_index = j.at("trajectory_index").get<int>();
    t.seed = j.value("seed", std::uint64_t{0});
    t.turns = j.at("turns").get<std::vector<TurnRecord>>();
    t.terminated_reason = parse_trajectory_end(j.at("terminated_reason").get<std::string>());
    t.abort_detail = j.value("abort_detail", std::string{});
    t.task_metric = j.value("task_metric", 0.0);
}

void to_json(Json& j, const TrajectoryAdvantage& a) {
    j = Json{{"task_id", a.task_id},
             {"trajectory_index", a.trajectory_index},
             {"turn_rewards", a.turn_rewards},
             {"shaped_rewards", a.shaped_rewards},
             {"trajectory_score", a.trajectory_score},
             {"per_turn_advantages", a.per_turn_advantages},
             {"token_counts", a.token_counts}};
}

void from_json(const Json& j, TrajectoryAdvantage& a) {
    a.task_id = j.at("task_id").get<std::string>();
    a.trajectory_index = j.at("trajectory_index").get<int>();
    a.turn_rewards = j.at("turn_rewards").get<std::vector<double>>();
    a.shaped_rewards = j.at("shaped_rewards").get<std::vector<double>>();
    a.trajectory_score = j.at("trajectory_score").get<double>();
    a.per_turn_advantages = j.at("per_turn_advantages").get<std::vector<double>>();
    a.token_counts = j.at("token_counts").get<std::vector<int>>();
    a.token_advantages = broadcast_to_tokens(a.per_turn_advantages, a.token_counts);
}

void write_advantages_jsonl(std::ostream& out, const AdvantageTensor& tensor) {
    for (const auto& a : tensor) out << Json(a).dump() << '\n';
}

}  // namespace userl::reward
