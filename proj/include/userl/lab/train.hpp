#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "userl/lab/policy.hpp"
#include "userl/reward/shaping.hpp"

namespace userl::lab {

struct LabSetting {
    reward::TurnScheme turn = reward::TurnScheme::equalized;
    reward::TrajScheme traj = reward::TrajScheme::r2g;

    std::string name() const;  // "equalized/r2g"
};

/// Parses "equalized/sum,equalized/r2g,...".
std::vector<LabSetting> parse_settings(const std::string& spec);

struct TrainConfig {
    int epochs = 200;
    int groups_per_batch = 4;
    int group_size = 8;
    int horizon = kDefaultHorizon;
    double learning_rate = 2.0;
    double epsilon = 0.2;
    double gamma = 0.8;
    double k = 2.0;
    double eta = 1e-6;
};

/// Exact statistics of the stochastic policy, by dynamic programming over
/// (turn, unlocked, probes paid).
struct PolicyEvaluation {
    double solve_probability = 0.0;
    double mean_turns_to_solve = 0.0;  // conditional on solving; 0 if never
    double expected_reward_sum = 0.0;
};

PolicyEvaluation evaluate_policy(const TabularPolicy<double>& policy);

struct TrainResult {
    std::uint64_t seed = 0;
    std::vector<double> curve;  // mean reward sum of each update's batch
    TabularPolicy<double> policy;
    PolicyEvaluation final_eval;
};

/// Advantages for one group under a shaping setting (reward engine path).
std::vector<std::vector<double>> group_advantages(const std::vector<LabTrajectory>& group, const LabSetting& setting,
                                                  const TrainConfig& config);

TrainResult train(const LabSetting& setting, const TrainConfig& config, std::uint64_t seed);

/// scipy.ndimage.gaussian_filter1d equivalent (mode "reflect", truncate 4).
std::vector<double> gaussian_smooth(const std::vector<double>& values, double sigma = 2.0);

struct SettingReport {
    LabSetting setting;
    std::vector<TrainResult> runs;  // one per seed
    std::vector<double> mean_curve;
    std::vector<double> smoothed_curve;
};

struct CompareReport {
    TrainConfig config;
    std::vector<SettingReport> settings;

    std::string curves_csv() const;
    std::string summary_csv() const;
    std::string summary_table() const;
    /// curves.csv, summary.csv and summary.txt under `dir`.
    void write(const std::filesystem::path& dir) const;
};

CompareReport compare_settings(const std::vector<LabSetting>& settings, const TrainConfig& config,
                               const std::vector<std::uint64_t>& seeds);

}  // namespace userl::lab
