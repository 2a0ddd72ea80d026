#include "userl/lab/policy.hpp"

#include <numeric>

namespace userl::lab {

std::vector<double> LabTrajectory::rewards() const {
    std::vector<double> out;
    for (const auto& t : turns) out.push_back(t.reward);
    return out;
}

std::vector<int> LabTrajectory::token_counts() const {
    std::vector<int> out;
    for (const auto& t : turns) out.push_back(t.tokens);
    return out;
}

double LabTrajectory::reward_sum() const {
    const auto r = rewards();
    return std::accumulate(r.begin(), r.end(), 0.0);
}

double update_policy(TabularPolicy<double>& policy, const UpdateBatch& batch) {
    const double objective = surrogate_objective(policy, batch);
    const Logits<double> grad = surrogate_gradient(policy, batch);
    if (!std::isfinite(objective) || !grad.allFinite()) throw NonFiniteGradient("surrogate gradient is not finite");
    policy.logits() += batch.learning_rate * grad;
    return objective;
}

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

std::vector<LabTrajectory> sample_group(const TabularPolicy<double>& policy, int n, std::mt19937_64& rng) {
    std::vector<LabTrajectory> out;
    ChainGym gym(policy.horizon());
    for (int i = 0; i < n; ++i) {
        gym.reset();
        LabTrajectory traj;
        while (!gym.done()) {
            const int t = gym.turn();
            const auto pi = policy.probabilities(t);
            const double u = uniform01(rng);
            int a = -1;
            double acc = 0.0;
            for (int b = 0; b < kChainActions; ++b) {
                if (pi[b] <= 0.0) continue;
                a = b;  // rounding fallback: the last action with mass
                acc += pi[b];
                if (u < acc) {
                    a = b;
                    break;
                }
            }
            LabTurn turn;
            turn.turn = t;
            turn.action = a;
            turn.old_prob = pi[a];
            turn.reward = gym.step(static_cast<ChainAction>(a));
            traj.turns.push_back(turn);
        }
        traj.solved = gym.solved();
        out.push_back(std::move(traj));
    }
    return out;
}

std::vector<LabTrajectory> sample_group(const TabularPolicy<double>& policy, int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_group(policy, n, rng);
}

}  // namespace userl::lab
