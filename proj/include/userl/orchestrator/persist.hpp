#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "userl/env/task_set.hpp"
#include "userl/orchestrator/metrics.hpp"
#include "userl/orchestrator/rollout.hpp"

namespace userl::orchestrator {

struct AdvantageExport {
    reward::AdvantageTensor records;
    std::vector<std::string> skipped;  // "task_id: reason"
};

/// Advantage records for every group that qualifies: at least 2
/// trajectories, and no aborted trajectory unless allow_aborted.
AdvantageExport export_advantages(std::vector<RolloutGroup>& groups, const reward::ShapingSpec& spec,
                                  bool allow_aborted);

struct PersistResult {
    MetricsReport report;
    std::size_t trajectory_records = 0;
    std::size_t advantage_records = 0;
    std::vector<std::string> skipped_groups;
};

/// Writes trajectories.jsonl, transcripts.jsonl, advantages.jsonl,
/// report.json and report.txt under plan.out. Every file is written to a
/// temporary name first and renamed only once all of them are complete.
PersistResult persist_and_report(std::vector<GroupRun>& runs, const RolloutPlan& plan);

/// Trajectories from a trajectories.jsonl stream, regrouped by task in
/// first-seen order.
std::vector<RolloutGroup> load_groups(const std::filesystem::path& trajectories_jsonl);

/// Writes files atomically: all temporaries, then all renames.
void write_files_atomically(const std::vector<std::pair<std::filesystem::path, std::string>>& files);

struct ReplayResult {
    std::vector<double> recorded;
    std::vector<double> replayed;
    bool matches = false;
    std::string detail;
};

/// Re-steps the recorded choices through a fresh session of the task with
/// the given services and compares the rewards.
ReplayResult replay_trajectory(const Trajectory& trajectory, const TaskSpec& task, const EnvConfig& config,
                               const RolloutServices& services);

}  // namespace userl::orchestrator
