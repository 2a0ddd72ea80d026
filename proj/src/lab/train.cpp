#include "userl/lab/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "userl/reward/shaping.hpp"

namespace userl::lab {

std::string LabSetting::name() const {
    return std::string(reward::to_string(turn)) + "/" + std::string(reward::to_string(traj));
}

std::vector<LabSetting> parse_settings(const std::string& spec) {
    std::vector<LabSetting> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto slash = item.find('/');
        if (slash == std::string::npos) throw std::invalid_argument("setting must look like turn/traj: " + item);
        out.push_back({reward::parse_turn_scheme(item.substr(0, slash)), reward::parse_traj_scheme(item.substr(slash + 1))});
    }
    return out;
}

PolicyEvaluation evaluate_policy(const TabularPolicy<double>& policy) {
    // mass[unlocked][probes paid] of episodes still running
    double mass[2][3] = {{1.0, 0.0, 0.0}, {0.0, 0.0, 0.0}};
    PolicyEvaluation ev;
    double solve_turns = 0.0;
    for (int t = 0; t < policy.horizon(); ++t) {
        const auto pi = policy.probabilities(t);
        double next[2][3] = {};
        for (int u = 0; u < 2; ++u) {
            for (int p = 0; p < 3; ++p) {
                const double m = mass[u][p];
                if (m == 0.0) continue;
                const double probe = m * pi[static_cast<int>(ChainAction::probe)];
                if (p < 2) {
                    ev.expected_reward_sum += 0.1 * probe;
                    next[u][p + 1] += probe;
                } else {
                    next[u][p] += probe;
                }
                next[1][p] += m * pi[static_cast<int>(ChainAction::unlock)];
                const double solve = m * pi[static_cast<int>(ChainAction::solve)];
                if (u == 1) {
                    ev.solve_probability += solve;
                    ev.expected_reward_sum += solve;
                    solve_turns += solve * (t + 1);
                } else {
                    next[u][p] += solve;
                }
                next[u][p] += m * pi[static_cast<int>(ChainAction::noop)];
            }
        }
        std::copy(&next[0][0], &next[0][0] + 6, &mass[0][0]);
    }
    ev.mean_turns_to_solve = ev.solve_probability > 0.0 ? solve_turns / ev.solve_probability : 0.0;
    return ev;
}

std::vector<std::vector<double>> group_advantages(const std::vector<LabTrajectory>& group, const LabSetting& setting,
                                                  const TrainConfig& config) {
    reward::ShapingSpec spec;
    spec.turn_scheme = setting.turn;
    spec.traj_scheme = setting.traj;
    spec.gamma = config.gamma;
    spec.k = config.k;
    spec.eta = config.eta;
    std::vector<Eigen::VectorXd> rewards;
    for (const auto& t : group) rewards.push_back(reward::as_vector(t.rewards()));
    const auto result = reward::compute_group(spec, rewards);
    std::vector<std::vector<double>> out;
    for (const auto& a : result.advantages) out.push_back(reward::to_std(a));
    return out;
}

TrainResult train(const LabSetting& setting, const TrainConfig& config, std::uint64_t seed) {
    TrainResult result;
    result.seed = seed;
    result.policy = TabularPolicy<double>(config.horizon);
    std::mt19937_64 rng(seed);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        UpdateBatch batch;
        batch.epsilon = config.epsilon;
        batch.learning_rate = config.learning_rate;
        double reward_total = 0.0;
        for (int g = 0; g < config.groups_per_batch; ++g) {
            auto group = sample_group(result.policy, config.group_size, rng);
            auto adv = group_advantages(group, setting, config);
            for (std::size_t i = 0; i < group.size(); ++i) {
                reward_total += group[i].reward_sum();
                batch.trajectories.push_back(std::move(group[i]));
                batch.advantages.push_back(std::move(adv[i]));
            }
        }
        result.curve.push_back(reward_total / static_cast<double>(batch.trajectories.size()));
        update_policy(result.policy, batch);
    }
    result.final_eval = evaluate_policy(result.policy);
    return result;
}

std::vector<double> gaussian_smooth(const std::vector<double>& values, double sigma) {
    const long n = static_cast<long>(values.size());
    if (n == 0 || sigma <= 0.0) return values;
    const long radius = static_cast<long>(4.0 * sigma + 0.5);
    std::vector<double> weights(static_cast<std::size_t>(2 * radius + 1));
    double norm = 0.0;
    for (long x = -radius; x <= radius; ++x) {
        const double w = std::exp(-0.5 * static_cast<double>(x * x) / (sigma * sigma));
        weights[static_cast<std::size_t>(x + radius)] = w;
        norm += w;
    }
    for (auto& w : weights) w /= norm;
    // reflect: (d c b a | a b c d | d c b a), repeated for short inputs
    auto reflect = [n](long i) {
        const long period = 2 * n;
        i %= period;
        if (i < 0) i += period;
        return i < n ? i : period - 1 - i;
    };
    std::vector<double> out(values.size());
    for (long i = 0; i < n; ++i) {
        double acc = 0.0;
        for (long x = -radius; x <= radius; ++x) {
            acc += weights[static_cast<std::size_t>(x + radius)] * values[static_cast<std::size_t>(reflect(i + x))];
        }
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

CompareReport compare_settings(const std::vector<LabSetting>& settings, const TrainConfig& config,
                               const std::vector<std::uint64_t>& seeds) {
    if (seeds.empty()) throw std::invalid_argument("compare needs at least one seed");
    CompareReport report;
    report.config = config;
    for (const auto& s : settings) {
        SettingReport sr;
        sr.setting = s;
        sr.mean_curve.assign(static_cast<std::size_t>(config.epochs), 0.0);
        for (auto seed : seeds) {
            sr.runs.push_back(train(s, config, seed));
            for (std::size_t e = 0; e < sr.mean_curve.size(); ++e) sr.mean_curve[e] += sr.runs.back().curve[e];
        }
        for (auto& v : sr.mean_curve) v /= static_cast<double>(seeds.size());
        sr.smoothed_curve = gaussian_smooth(sr.mean_curve, 2.0);
        report.settings.push_back(std::move(sr));
    }
    return report;
}

std::string CompareReport::curves_csv() const {
    std::string out = "setting,seed,step,reward_sum,reward_sum_smoothed\n";
    char line[160];
    for (const auto& s : settings) {
        for (const auto& run : s.runs) {
            const auto smooth = gaussian_smooth(run.curve, 2.0);
            for (std::size_t e = 0; e < run.curve.size(); ++e) {
                std::snprintf(line, sizeof line, "%s,%llu,%zu,%.10g,%.10g\n", s.setting.name().c_str(),
                              static_cast<unsigned long long>(run.seed), e + 1, run.curve[e], smooth[e]);
                out += line;
            }
        }
        for (std::size_t e = 0; e < s.mean_curve.size(); ++e) {
            std::snprintf(line, sizeof line, "%s,mean,%zu,%.10g,%.10g\n", s.setting.name().c_str(), e + 1,
                          s.mean_curve[e], s.smoothed_curve[e]);
            out += line;
        }
    }
    return out;
}

std::string CompareReport::summary_csv() const {
    std::string out = "setting,seed,solve_rate,mean_turns_to_solve,expected_reward_sum\n";
    char line[160];
    for (const auto& s : settings) {
        for (const auto& run : s.runs) {
            std::snprintf(line, sizeof line, "%s,%llu,%.6f,%.6f,%.6f\n", s.setting.name().c_str(),
                          static_cast<unsigned long long>(run.seed), run.final_eval.solve_probability,
                          run.final_eval.mean_turns_to_solve, run.final_eval.expected_reward_sum);
            out += line;
        }
    }
    return out;
}

std::string CompareReport::summary_table() const {
    std::string out;
    char line[200];
    std::snprintf(line, sizeof line, "%-16s %10s %10s %10s %10s %10s\n", "setting", "solve_min", "solve_mean",
                  "turns_mean", "reward_end", "smoothed");
    out += line;
    for (const auto& s : settings) {
        double smin = 1.0, smean = 0.0, turns = 0.0;
        for (const auto& run : s.runs) {
            smin = std::min(smin, run.final_eval.solve_probability);
            smean += run.final_eval.solve_probability;
            turns += run.final_eval.mean_turns_to_solve;
        }
        const double n = static_cast<double>(s.runs.size());
        std::snprintf(line, sizeof line, "%-16s %10.4f %10.4f %10.3f %10.4f %10.4f\n", s.setting.name().c_str(), smin,
                      smean / n, turns / n, s.mean_curve.empty() ? 0.0 : s.mean_curve.back(),
                      s.smoothed_curve.empty() ? 0.0 : s.smoothed_curve.back());
        out += line;
    }
    return out;
}

void CompareReport::write(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    const std::pair<const char*, std::string> files[] = {
        {"curves.csv", curves_csv()}, {"summary.csv", summary_csv()}, {"summary.txt", summary_table()}};
    for (const auto& [name, content] : files) {
        std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
        out << content;
        if (!out) throw std::runtime_error("failed writing " + (dir / name).string());
    }
}

}  // namespace userl::lab
