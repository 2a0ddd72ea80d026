#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "userl/core/errors.hpp"
#include "userl/lab/chain_gym.hpp"

namespace userl::lab {

template <typename Scalar>
using Logits = Eigen::Matrix<Scalar, Eigen::Dynamic, kChainActions, Eigen::RowMajor>;

template <typename Scalar>
using ActionProbs = Eigen::Matrix<Scalar, 1, kChainActions>;

/// Softmax policy with one row of logits per turn index (temperature 1).
template <typename Scalar>
class TabularPolicy {
public:
    explicit TabularPolicy(int horizon = kDefaultHorizon) : logits_(Logits<Scalar>::Zero(horizon, kChainActions)) {}
    explicit TabularPolicy(Logits<Scalar> logits) : logits_(std::move(logits)) {}

    int horizon() const { return static_cast<int>(logits_.rows()); }
    const Logits<Scalar>& logits() const { return logits_; }
    Logits<Scalar>& logits() { return logits_; }

    ActionProbs<Scalar> probabilities(int turn) const {
        using std::exp;
        const auto row = logits_.row(turn);
        const Scalar top = row.maxCoeff();
        ActionProbs<Scalar> p;
        for (int a = 0; a < kChainActions; ++a) p[a] = exp(row[a] - top);
        return p / p.sum();
    }

    Scalar probability(int turn, int action) const { return probabilities(turn)[action]; }

private:
    Logits<Scalar> logits_;
};

struct LabTurn {
    int turn = 0;  // 0-based row of the policy table
    int action = 0;
    double old_prob = 1.0;  // behaviour-policy probability when sampled
    double reward = 0.0;
    int tokens = 1;
};

struct LabTrajectory {
    std::vector<LabTurn> turns;
    bool solved = false;

    std::vector<double> rewards() const;
    std::vector<int> token_counts() const;
    double reward_sum() const;
};

/// Trajectories with their per-turn advantages; the ratios are taken
/// against the stored old probabilities.
struct UpdateBatch {
    std::vector<LabTrajectory> trajectories;
    std::vector<std::vector<double>> advantages;
    double epsilon = 0.2;
    double learning_rate = 1.0;
};

template <typename Scalar>
Scalar surrogate_term(const Scalar& rho, const Scalar& advantage, const Scalar& epsilon) {
    const Scalar clipped = std::clamp(rho, Scalar(1) - epsilon, Scalar(1) + epsilon);
    return std::min(rho * advantage, clipped * advantage);
}

/// d surrogate / d rho; zero on the clipped flat regions.
template <typename Scalar>
Scalar surrogate_slope(const Scalar& rho, const Scalar& advantage, const Scalar& epsilon) {
    if (advantage > Scalar(0)) return rho <= Scalar(1) + epsilon ? advantage : Scalar(0);
    if (advantage < Scalar(0)) return rho >= Scalar(1) - epsilon ? advantage : Scalar(0);
    return Scalar(0);
}

inline void check_batch(const UpdateBatch& batch) {
    if (batch.advantages.size() != batch.trajectories.size()) throw LengthMismatch("one advantage list per trajectory");
    for (std::size_t i = 0; i < batch.trajectories.size(); ++i) {
        if (batch.advantages[i].size() != batch.trajectories[i].turns.size()) {
            throw LengthMismatch("one advantage per turn");
        }
    }
}

/// Mean over trajectories of (1 / sum L_t) * sum over tokens of the clipped
/// surrogate. A turn of L_t tokens contributes its term L_t times.
template <typename Scalar>
Scalar surrogate_objective(const TabularPolicy<Scalar>& policy, const UpdateBatch& batch) {
    check_batch(batch);
    if (batch.trajectories.empty()) return Scalar(0);
    const Scalar eps(batch.epsilon);
    Scalar total(0);
    for (std::size_t i = 0; i < batch.trajectories.size(); ++i) {
        const auto& traj = batch.trajectories[i];
        Scalar sum(0);
        long tokens = 0;
        for (std::size_t t = 0; t < traj.turns.size(); ++t) {
            const auto& turn = traj.turns[t];
            const Scalar rho = policy.probability(turn.turn, turn.action) / Scalar(turn.old_prob);
            sum += Scalar(turn.tokens) * surrogate_term(rho, Scalar(batch.advantages[i][t]), eps);
            tokens += turn.tokens;
        }
        if (tokens > 0) total += sum / Scalar(tokens);
    }
    return total / Scalar(static_cast<long>(batch.trajectories.size()));
}

/// Analytic gradient of surrogate_objective with respect to the logits:
/// d rho / d logit_b = rho * (1[a = b] - pi_b).
template <typename Scalar>
Logits<Scalar> surrogate_gradient(const TabularPolicy<Scalar>& policy, const UpdateBatch& batch) {
    check_batch(batch);
    Logits<Scalar> grad = Logits<Scalar>::Zero(policy.horizon(), kChainActions);
    if (batch.trajectories.empty()) return grad;
    const Scalar eps(batch.epsilon);
    const Scalar n(static_cast<long>(batch.trajectories.size()));
    for (std::size_t i = 0; i < batch.trajectories.size(); ++i) {
        const auto& traj = batch.trajectories[i];
        long tokens = 0;
        for (const auto& turn : traj.turns) tokens += turn.tokens;
        if (tokens == 0) continue;
        for (std::size_t t = 0; t < traj.turns.size(); ++t) {
            const auto& turn = traj.turns[t];
            const ActionProbs<Scalar> pi = policy.probabilities(turn.turn);
            const Scalar rho = pi[turn.action] / Scalar(turn.old_prob);
            const Scalar slope = surrogate_slope(rho, Scalar(batch.advantages[i][t]), eps);
            if (slope == Scalar(0)) continue;
            const Scalar w = Scalar(turn.tokens) * slope * rho / Scalar(tokens) / n;
            ActionProbs<Scalar> d = -pi;
            d[turn.action] += Scalar(1);
            grad.row(turn.turn) += w * d;
        }
    }
    return grad;
}

/// One ascent step on the surrogate objective. Returns the objective at
/// the pre-update parameters. Throws NonFiniteGradient without touching
/// the policy.
double update_policy(TabularPolicy<double>& policy, const UpdateBatch& batch);

/// Samples n episodes; uniform draws come from the top 53 bits of the
/// engine so runs are reproducible across standard libraries.
std::vector<LabTrajectory> sample_group(const TabularPolicy<double>& policy, int n, std::mt19937_64& rng);
std::vector<LabTrajectory> sample_group(const TabularPolicy<double>& policy, int n, std::uint64_t seed);

}  // namespace userl::lab
