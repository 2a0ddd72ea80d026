#include "userl/orchestrator/metrics.hpp"

#include <cstdio>
#include <numeric>

namespace userl::orchestrator {

int effective_turns(const std::vector<double>& rewards) {
    for (std::size_t i = rewards.size(); i > 0; --i) {
        if (rewards[i - 1] > 0.0) return static_cast<int>(i);
    }
    return 0;
}

double time_weighted_performance(const std::vector<double>& rewards) {
    double total = 0.0;
    for (std::size_t i = 0; i < rewards.size(); ++i) total += rewards[i] / static_cast<double>(i + 2);
    return total;
}

Json MetricsReport::to_json() const {
    Json gyms = Json::array();
    for (const auto& g : per_gym) {
        gyms.push_back({{"gym", to_string(g.gym)},
                        {"trajectories", g.trajectories},
                        {"score", g.score},
                        {"reward_sum_mean", g.reward_sum_mean},
                        {"effective_turns_mean", g.effective_turns_mean},
                        {"time_weighted_performance_mean", g.time_weighted_mean},
                        {"turns_mean", g.turns_mean},
                        {"termination", g.termination}});
    }
    return Json{{"gyms", gyms}};
}

std::string MetricsReport::table() const {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "%-10s %6s %9s %9s %9s %9s %7s  %s\n", "gym", "n", "score", "reward", "eff.turn",
                  "tw.perf", "turns", "ends");
    out += line;
    for (const auto& g : per_gym) {
        std::string ends;
        for (const auto& [k, v] : g.termination) ends += (ends.empty() ? "" : " ") + k + "=" + std::to_string(v);
        std::snprintf(line, sizeof line, "%-10s %6d %9.4f %9.4f %9.3f %9.4f %7.2f  %s\n",
                      std::string(to_string(g.gym)).c_str(), g.trajectories, g.score, g.reward_sum_mean,
                      g.effective_turns_mean, g.time_weighted_mean, g.turns_mean, ends.c_str());
        out += line;
    }
    return out;
}

MetricsReport compute_metrics(const std::vector<reward::RolloutGroup>& groups) {
    std::map<GymKind, GymMetrics> acc;
    for (const auto& group : groups) {
        for (const auto& t : group.trajectories) {
            auto& g = acc[t.gym_kind];
            g.gym = t.gym_kind;
            const auto rewards = t.rewards();
            g.trajectories += 1;
            g.score += t.task_metric;
            g.reward_sum_mean += std::accumulate(rewards.begin(), rewards.end(), 0.0);
            g.effective_turns_mean += effective_turns(rewards);
            g.time_weighted_mean += time_weighted_performance(rewards);
            g.turns_mean += static_cast<double>(t.turns.size());
            g.termination[std::string(reward::to_string(t.terminated_reason))] += 1;
        }
    }
    MetricsReport report;
    for (auto& [kind, g] : acc) {
        const double n = g.trajectories;
        g.score /= n;
        g.reward_sum_mean /= n;
        g.effective_turns_mean /= n;
        g.time_weighted_mean /= n;
        g.turns_mean /= n;
        report.per_gym.push_back(g);
    }
    return report;
}

}  // namespace userl::orchestrator
