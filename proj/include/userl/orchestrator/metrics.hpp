#pragma once

#include <map>
#include <string>
#include <vector>

#include "userl/reward/trajectory.hpp"

namespace userl::orchestrator {

/// 1-based index of the last turn with a positive reward; 0 if none.
int effective_turns(const std::vector<double>& rewards);

/// sum_i r_i / (i + 1) with 1-based i.
double time_weighted_performance(const std::vector<double>& rewards);

struct GymMetrics {
    GymKind gym = GymKind::function;
    int trajectories = 0;
    double score = 0.0;  // mean of the gym's task metric
    double reward_sum_mean = 0.0;
    double effective_turns_mean = 0.0;
    double time_weighted_mean = 0.0;
    double turns_mean = 0.0;
    std::map<std::string, int> termination;
};

struct MetricsReport {
    std::vector<GymMetrics> per_gym;  // in GymKind order

    Json to_json() const;
    std::string table() const;
};

MetricsReport compute_metrics(const std::vector<reward::RolloutGroup>& groups);

}  // namespace userl::orchestrator
