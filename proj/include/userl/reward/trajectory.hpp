#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "userl/env/types.hpp"
#include "userl/reward/shaping.hpp"

namespace userl::reward {

struct TurnRecord {
    int turn_index = 1;  // 1-based
    StepChoice choice;
    std::string observation;
    double raw_reward = 0.0;  // post-processed by the session
    int token_count = 1;
    bool token_count_estimated = false;

    friend bool operator==(const TurnRecord&, const TurnRecord&) = default;
};

enum class TrajectoryEnd { goal, budget, aborted };

std::string_view to_string(TrajectoryEnd e);
TrajectoryEnd parse_trajectory_end(std::string_view name);

struct Trajectory {
    std::string task_id;
    GymKind gym_kind = GymKind::function;
    int trajectory_index = 0;
    std::uint64_t seed = 0;
    std::vector<TurnRecord> turns;
    TrajectoryEnd terminated_reason = TrajectoryEnd::budget;
    std::string abort_detail;
    double task_metric = 0.0;

    std::vector<double> rewards() const;
    std::vector<int> token_counts() const;

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct RolloutGroup {
    std::string task_id;
    std::vector<Trajectory> trajectories;
    double group_mean = 0.0;
    double group_std = 0.0;

    bool flagged() const;
};

struct TrajectoryAdvantage {
    std::string task_id;
    int trajectory_index = 0;
    std::vector<double> turn_rewards;
    std::vector<double> shaped_rewards;
    double trajectory_score = 0.0;
    std::vector<double> per_turn_advantages;
    std::vector<int> token_counts;
    std::vector<double> token_advantages;
};

using AdvantageTensor = std::vector<TrajectoryAdvantage>;

/// Fills group.group_mean / group_std and returns one record per trajectory.
/// Throws GroupTooSmall for fewer than 2 trajectories.
AdvantageTensor group_advantages(RolloutGroup& group, const ShapingSpec& spec);

void to_json(Json& j, const TurnRecord& t);
void from_json(const Json& j, TurnRecord& t);
void to_json(Json& j, const Trajectory& t);
void from_json(const Json& j, Trajectory& t);
void to_json(Json& j, const TrajectoryAdvantage& a);
void from_json(const Json& j, TrajectoryAdvantage& a);

/// One JSON object per line, in trajectory order.
void write_advantages_jsonl(std::ostream& out, const AdvantageTensor& tensor);

}  // namespace userl::reward
