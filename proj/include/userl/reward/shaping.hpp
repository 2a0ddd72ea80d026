#pragma once

#include <cmath>
#include <cstddef>
#include <string_view>
#include <type_traits>
#include <vector>

#include <Eigen/Core>

#include "userl/core/errors.hpp"

namespace userl::reward {

enum class TurnScheme { naive, equalized, r2g, em };
enum class TrajScheme { sum, r2g };

std::string_view to_string(TurnScheme s);
std::string_view to_string(TrajScheme s);
TurnScheme parse_turn_scheme(std::string_view name);
TrajScheme parse_traj_scheme(std::string_view name);

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct BasicShapingSpec {
    TurnScheme turn_scheme = TurnScheme::equalized;
    TrajScheme traj_scheme = TrajScheme::r2g;
    Scalar gamma = Scalar(8) / Scalar(10);
    Scalar k = Scalar(2);
    Scalar eta = Scalar(1) / Scalar(1000000);

    void validate() const {
        if (!(gamma >= Scalar(0) && gamma <= Scalar(1))) throw DomainError("gamma must lie in [0, 1]");
        if (!(k > Scalar(0))) throw DomainError("k must be positive");
        if (!(eta > Scalar(0))) throw DomainError("eta must be positive");
    }
};

using ShapingSpec = BasicShapingSpec<double>;

template <typename Scalar>
Scalar exponential_map(const Scalar& r, const Scalar& k) {
    using std::exp;
    if (!(r >= Scalar(0) && r <= Scalar(1))) throw DomainError("exponential mapping needs rewards in [0, 1]");
    if (r == Scalar(0)) return Scalar(1) / Scalar(2);
    if (r == Scalar(1)) return Scalar(1);
    const Scalar num = Scalar(1) - exp(-k * r);
    const Scalar den = Scalar(1) - exp(-k);
    return Scalar(1) / Scalar(2) + num / den / Scalar(2);
}

// Discounted suffix sums, computed back to front: r~_t = r_t + gamma * r~_{t+1}.
template <typename Scalar>
Vector<Scalar> reward_to_go(const Vector<Scalar>& rewards, const Scalar& gamma) {
    Vector<Scalar> out(rewards.size());
    Scalar acc(0);
    for (Eigen::Index t = rewards.size() - 1; t >= 0; --t) {
        acc = rewards[t] + gamma * acc;
        out[t] = acc;
    }
    return out;
}

template <typename Scalar>
Scalar score_trajectory(const BasicShapingSpec<Scalar>& spec, const Vector<Scalar>& rewards) {
    if (spec.traj_scheme == TrajScheme::sum) return rewards.sum();
    Scalar total(0);
    Scalar weight(1);
    for (Eigen::Index j = 0; j < rewards.size(); ++j) {
        total += weight * rewards[j];
        weight *= spec.gamma;
    }
    return total;
}

template <typename Scalar>
Vector<Scalar> shape_turn_rewards(const BasicShapingSpec<Scalar>& spec, const Vector<Scalar>& rewards,
                                  const Scalar& trajectory_score) {
    switch (spec.turn_scheme) {
        case TurnScheme::naive: return rewards;
        case TurnScheme::equalized: return Vector<Scalar>::Constant(rewards.size(), trajectory_score);
        case TurnScheme::r2g: return reward_to_go(rewards, spec.gamma);
        case TurnScheme::em: {
            Vector<Scalar> out(rewards.size());
            for (Eigen::Index t = 0; t < rewards.size(); ++t) out[t] = exponential_map(rewards[t], spec.k);
            return out;
        }
    }
    return rewards;
}

template <typename Scalar>
Vector<Scalar> shape_turn_rewards(const BasicShapingSpec<Scalar>& spec, const Vector<Scalar>& rewards) {
    return shape_turn_rewards(spec, rewards, score_trajectory(spec, rewards));
}

template <typename Scalar>
struct GroupStats {
    Scalar mean;
    Scalar std;
};

// Population statistics of the trajectory scores. The mean is taken as an
// offset from the first score so a constant group has an exact mean.
template <typename Scalar>
GroupStats<Scalar> group_statistics(const Vector<Scalar>& scores) {
    using std::sqrt;
    if (scores.size() < 2) throw GroupTooSmall("grouped advantages need at least 2 trajectories");
    const Scalar n = Scalar(static_cast<long>(scores.size()));
    const Scalar pivot = scores[0];
    const Scalar mean = pivot + (scores.array() - pivot).sum() / n;
    const Scalar var = (scores.array() - mean).square().sum() / n;
    return {mean, sqrt(var)};
}

template <typename Scalar>
Vector<Scalar> normalize_advantages(const Vector<Scalar>& shaped, const GroupStats<Scalar>& stats, const Scalar& eta) {
    // A group whose scores all agree carries no relative signal, whatever the
    // per-turn shaping; dividing by eta alone would blow the values up.
    if (stats.std == Scalar(0)) return Vector<Scalar>::Zero(shaped.size());
    return ((shaped.array() - stats.mean) / (stats.std + eta)).matrix();
}

template <typename Scalar>
struct GroupResult {
    GroupStats<Scalar> stats;
    Vector<Scalar> scores;
    std::vector<Vector<Scalar>> shaped;
    std::vector<Vector<Scalar>> advantages;
};

// Scores, shapes and normalizes one rollout group given each trajectory's
// post-processed turn rewards.
template <typename Scalar>
GroupResult<Scalar> compute_group(const BasicShapingSpec<Scalar>& spec, const std::vector<Vector<Scalar>>& rewards) {
    spec.validate();
    if (rewards.size() < 2) throw GroupTooSmall("grouped advantages need at least 2 trajectories");
    if constexpr (std::is_same_v<Scalar, double>) {
        // Small group spreads divide the rounding error of the statistics
        // back up; work in extended precision and round once at the end.
        BasicShapingSpec<long double> wide;
        wide.turn_scheme = spec.turn_scheme;
        wide.traj_scheme = spec.traj_scheme;
        wide.gamma = spec.gamma;
        wide.k = spec.k;
        wide.eta = spec.eta;
        std::vector<Vector<long double>> wide_rewards;
        for (const auto& r : rewards) wide_rewards.push_back(r.template cast<long double>());
        const auto w = compute_group(wide, wide_rewards);
        GroupResult<double> out;
        out.stats = {static_cast<double>(w.stats.mean), static_cast<double>(w.stats.std)};
        out.scores = w.scores.template cast<double>();
        for (const auto& v : w.shaped) out.shaped.push_back(v.template cast<double>());
        for (const auto& v : w.advantages) out.advantages.push_back(v.template cast<double>());
        return out;
    }
    GroupResult<Scalar> out;
    out.scores.resize(static_cast<Eigen::Index>(rewards.size()));
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        out.scores[static_cast<Eigen::Index>(i)] = score_trajectory(spec, rewards[i]);
    }
    out.stats = group_statistics(out.scores);
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        out.shaped.push_back(shape_turn_rewards(spec, rewards[i], out.scores[static_cast<Eigen::Index>(i)]));
        out.advantages.push_back(normalize_advantages(out.shaped.back(), out.stats, spec.eta));
    }
    return out;
}

template <typename Scalar>
Vector<Scalar> broadcast_to_tokens(const Vector<Scalar>& per_turn, const std::vector<int>& token_counts) {
    if (static_cast<std::size_t>(per_turn.size()) != token_counts.size()) {
        throw LengthMismatch("per-turn values and token counts differ in length");
    }
    Eigen::Index total = 0;
    for (int c : token_counts) {
        if (c < 1) throw LengthMismatch("token counts must be positive");
        total += c;
    }
    Vector<Scalar> out(total);
    Eigen::Index pos = 0;
    for (Eigen::Index t = 0; t < per_turn.size(); ++t) {
        const auto len = token_counts[static_cast<std::size_t>(t)];
        out.segment(pos, len).setConstant(per_turn[t]);
        pos += len;
    }
    return out;
}

// std::vector conveniences for the double path.
std::vector<double> shape_turn_rewards(const ShapingSpec& spec, const std::vector<double>& rewards);
std::vector<double> shape_turn_rewards(const ShapingSpec& spec, const std::vector<double>& rewards,
                                       double trajectory_score);
double score_trajectory(const ShapingSpec& spec, const std::vector<double>& rewards);
std::vector<double> broadcast_to_tokens(const std::vector<double>& per_turn, const std::vector<int>& token_counts);

inline Eigen::Map<const Eigen::VectorXd> as_vector(const std::vector<double>& v) {
    return {v.data(), static_cast<Eigen::Index>(v.size())};
}

inline std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace userl::reward
