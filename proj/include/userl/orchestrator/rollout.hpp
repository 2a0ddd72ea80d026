#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "userl/env/types.hpp"
#include "userl/gyms/search_backend.hpp"
#include "userl/orchestrator/policy.hpp"
#include "userl/reward/trajectory.hpp"
#include "userl/usersim/user_port.hpp"

namespace userl::orchestrator {

using reward::RolloutGroup;
using reward::Trajectory;
using reward::TrajectoryEnd;
using reward::TurnRecord;

struct RolloutPlan {
    std::vector<TaskSpec> tasks;
    int group_size = 8;
    int max_turns = 16;
    reward::ShapingSpec shaping;
    EnvConfig env;
    double policy_temperature = 1.0;
    int max_response_tokens = 2048;
    std::uint64_t seed = 0;
    int workers = 4;
    std::filesystem::path out = "out";
    bool allow_aborted = false;

    /// Throws std::invalid_argument on a bad plan.
    void validate() const;
    int turn_cap() const;
};

struct SessionTranscript {
    std::string task_id;
    int trajectory_index = 0;
    Json messages = Json::array();
    std::vector<std::string> parse_status;  // per turn: ok | reprompted | malformed
};

void to_json(Json& j, const SessionTranscript& t);
void from_json(const Json& j, SessionTranscript& t);

/// Gives each episode its user port and search backend. Returning nullptr
/// is fine for gyms that do not need one.
using UserPortProvider = std::function<std::shared_ptr<usersim::UserPort>(const TaskSpec&, int trajectory_index)>;
using SearchProvider = std::function<std::shared_ptr<gyms::SearchBackend>(const TaskSpec&)>;

/// Scripted user from the task's metadata.script, and canned search results
/// from its metadata.search_results.
UserPortProvider scripted_users();
SearchProvider canned_search();

struct RolloutServices {
    PolicyClient* policy = nullptr;
    UserPortProvider users = scripted_users();
    SearchProvider search = canned_search();
};

/// A user port that also wants to hear about rewards and the end of the
/// episode (the human bridge does).
class EpisodeObserver {
public:
    virtual ~EpisodeObserver() = default;
    virtual void on_turn(const TurnRecord& turn, const StepOutcome& outcome) = 0;
    virtual void on_end(const Trajectory& trajectory, const Json& metrics) = 0;
};

struct Episode {
    Trajectory trajectory;
    SessionTranscript transcript;
};

Episode run_episode(const RolloutPlan& plan, const TaskSpec& task, int trajectory_index,
                    const RolloutServices& services);

struct GroupRun {
    RolloutGroup group;
    std::vector<SessionTranscript> transcripts;
};

/// n episodes on one task, in index order.
GroupRun run_group(const RolloutPlan& plan, const TaskSpec& task, const RolloutServices& services);

/// One group per task in plan order; all episodes share one worker pool.
std::vector<GroupRun> run_plan(const RolloutPlan& plan, const RolloutServices& services);

/// Policy-bound messages (everything not written by the policy itself) that
/// contain any secret, case-insensitively. Returns "message index: secret".
std::vector<std::string> scan_for_leaks(const Json& messages, const std::vector<std::string>& secrets);

}  // namespace userl::orchestrator
