#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <algorithm>
#include <numeric>
#include <random>

#include "userl/core/errors.hpp"
#include "userl/reward/shaping.hpp"
#include "userl/reward/trajectory.hpp"

using namespace userl;
using namespace userl::reward;

namespace {

using Dec = boost::multiprecision::number<boost::multiprecision::cpp_dec_float<50>, boost::multiprecision::et_off>;

ShapingSpec spec(TurnScheme t, TrajScheme s, double gamma = 0.8) {
    ShapingSpec out;
    out.turn_scheme = t;
    out.traj_scheme = s;
    out.gamma = gamma;
    return out;
}

TEST(ExponentialMapping, SpecPoints) {
    EXPECT_EQ(exponential_map(0.0, 2.0), 0.5);
    EXPECT_NEAR(exponential_map(0.5, 2.0), 0.865530, 1e-6);
    EXPECT_EQ(exponential_map(1.0, 2.0), 1.0);
    // 0.5 + 0.5 (1 - e^-1) / (1 - e^-2), evaluated independently in 50 digits.
    const Dec e1 = exp(Dec(-1)), e2 = exp(Dec(-2));
    const Dec oracle = Dec(1) / 2 + (Dec(1) - e1) / (Dec(1) - e2) / 2;
    EXPECT_NEAR(exponential_map(0.5, 2.0), oracle.convert_to<double>(), 1e-15);
}

TEST(ExponentialMapping, MonotoneAndBounded) {
    double prev = 0.5;
    for (int i = 1; i <= 1000; ++i) {
        const double v = exponential_map(i / 1000.0, 2.0);
        ASSERT_GT(v, prev);
        ASSERT_LE(v, 1.0);
        prev = v;
    }
}

TEST(ExponentialMapping, RejectsOutOfRange) {
    EXPECT_THROW(exponential_map(1.2, 2.0), DomainError);
    EXPECT_THROW(exponential_map(-0.1, 2.0), DomainError);
    EXPECT_THROW(shape_turn_rewards(spec(TurnScheme::em, TrajScheme::sum), std::vector<double>{0.3, 1.5}), DomainError);
}

TEST(RewardToGo, ExactInDecimalArithmetic) {
    Vector<Dec> r(3);
    r << Dec(0), Dec(0), Dec(1);
    const Dec gamma = Dec(8) / Dec(10);
    const auto out = reward_to_go(r, gamma);
    EXPECT_EQ(out[0], Dec(64) / Dec(100));
    EXPECT_EQ(out[1], Dec(8) / Dec(10));
    EXPECT_EQ(out[2], Dec(1));
}

TEST(RewardToGo, DoublePathAndHandValues) {
    const auto out = shape_turn_rewards(spec(TurnScheme::r2g, TrajScheme::r2g), std::vector<double>{0, 0, 1});
    EXPECT_NEAR(out[0], 0.64, 1e-15);
    EXPECT_NEAR(out[1], 0.80, 1e-15);
    EXPECT_EQ(out[2], 1.0);
    // [0.2, 0.5, 1.0] with gamma 0.5: 1.0, 1.0, 1.0
    const auto flat = shape_turn_rewards(spec(TurnScheme::r2g, TrajScheme::r2g, 0.5), std::vector<double>{0.5, 1.0, 0.0});
    EXPECT_EQ(flat, (std::vector<double>{1.0, 1.0, 0.0}));
}

TEST(TrajectoryScore, SpecExamples) {
    EXPECT_NEAR(score_trajectory(spec(TurnScheme::equalized, TrajScheme::r2g), std::vector<double>{0.2, 0.2, 1.0}), 1.0,
                1e-12);
    Vector<Dec> r(3);
    r << Dec(2) / 10, Dec(2) / 10, Dec(1);
    BasicShapingSpec<Dec> s;
    EXPECT_EQ(score_trajectory(s, r), Dec(1));
    EXPECT_NEAR(score_trajectory(spec(TurnScheme::equalized, TrajScheme::sum), std::vector<double>{0.2, 0.2, 1.0}), 1.4,
                1e-12);
}

TEST(TurnShaping, NaiveAndEqualized) {
    const std::vector<double> r{0.1, 0.0, 0.7};
    EXPECT_EQ(shape_turn_rewards(spec(TurnScheme::naive, TrajScheme::sum), r), r);
    const auto eq = shape_turn_rewards(spec(TurnScheme::equalized, TrajScheme::sum), r);
    for (double v : eq) EXPECT_NEAR(v, 0.8, 1e-15);
}

TEST(SpecValidation, RejectsBadParameters) {
    auto s = spec(TurnScheme::r2g, TrajScheme::r2g, 1.5);
    EXPECT_THROW(s.validate(), DomainError);
    s.gamma = 0.8;
    s.k = 0.0;
    EXPECT_THROW(s.validate(), DomainError);
    s.k = 2;
    s.eta = 0;
    EXPECT_THROW(s.validate(), DomainError);
    EXPECT_THROW(parse_turn_scheme("greedy"), std::invalid_argument);
    EXPECT_EQ(parse_traj_scheme("r2g"), TrajScheme::r2g);
}

// From-scratch recomputation used as the oracle for group advantages.
struct Oracle {
    std::vector<long double> scores;
    std::vector<std::vector<double>> advantages;
};

Oracle oracle(const ShapingSpec& s, const std::vector<std::vector<double>>& group) {
    Oracle o;
    for (const auto& r : group) {
        long double sc = 0.0L, w = 1.0L;
        for (double x : r) {
            sc += s.traj_scheme == TrajScheme::sum ? x : w * x;
            w *= s.gamma;
        }
        o.scores.push_back(sc);
    }
    long double mean = 0.0L;
    for (long double v : o.scores) mean += v;
    mean /= o.scores.size();
    long double var = 0.0L;
    for (long double v : o.scores) var += (v - mean) * (v - mean);
    var /= o.scores.size();
    const long double sd = std::sqrt(var);
    const bool flat = std::all_of(o.scores.begin(), o.scores.end(), [&](long double v) { return v == o.scores[0]; });
    for (std::size_t i = 0; i < group.size(); ++i) {
        std::vector<double> adv;
        const auto& r = group[i];
        for (std::size_t t = 0; t < r.size(); ++t) {
            long double shaped = 0.0L;
            if (s.turn_scheme == TurnScheme::equalized) {
                shaped = o.scores[i];
            } else {
                long double g = 1.0L;
                for (std::size_t j = t; j < r.size(); ++j, g *= s.gamma) shaped += g * r[j];
            }
            adv.push_back(flat ? 0.0 : static_cast<double>((shaped - mean) / (sd + s.eta)));
        }
        o.advantages.push_back(adv);
    }
    return o;
}

TEST(GroupAdvantages, MatchFromScratchOracleOnRandomGroups) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto s = spec(trial % 2 ? TurnScheme::equalized : TurnScheme::r2g,
                            trial % 3 ? TrajScheme::r2g : TrajScheme::sum);
        const int n = 2 + static_cast<int>(rng() % 7);
        std::vector<Vector<double>> group;
        std::vector<std::vector<double>> plain;
        for (int i = 0; i < n; ++i) {
            const int T = 1 + static_cast<int>(rng() % 16);
            std::vector<double> r;
            for (int t = 0; t < T; ++t) r.push_back(rng() % 3 == 0 ? 0.0 : u(rng));
            plain.push_back(r);
            group.push_back(as_vector(r));
        }
        const auto got = compute_group(s, group);
        const auto want = oracle(s, plain);
        for (int i = 0; i < n; ++i) {
            for (std::size_t t = 0; t < plain[i].size(); ++t) {
                ASSERT_NEAR(got.advantages[i][t], want.advantages[i][t], 1e-12) << trial;
            }
        }
    }
}

TEST(GroupAdvantages, ZeroVarianceGroupsAreExactlyZero) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> r;
        const int T = 1 + static_cast<int>(rng() % 16);
        for (int t = 0; t < T; ++t) r.push_back(u(rng));
        std::vector<Vector<double>> group(2 + rng() % 7, as_vector(r));
        for (TurnScheme t : {TurnScheme::equalized, TurnScheme::r2g, TurnScheme::em}) {
            const auto got = compute_group(spec(t, TrajScheme::r2g), group);
            EXPECT_EQ(got.stats.std, 0.0);
            for (const auto& a : got.advantages) ASSERT_TRUE((a.array() == 0.0).all()) << to_string(t);
        }
    }
}

TEST(GroupAdvantages, SumsToZeroUnderEqualized) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Vector<double>> group;
        for (int i = 0; i < 6; ++i) group.push_back(Vector<double>::Constant(1, u(rng)));
        const auto got = compute_group(spec(TurnScheme::equalized, TrajScheme::sum), group);
        double sum = 0.0;
        for (const auto& a : got.advantages) sum += a[0];
        ASSERT_NEAR(sum, 0.0, 1e-9);
    }
}

TEST(GroupAdvantages, GroupTooSmall) {
    std::vector<Vector<double>> one{Vector<double>::Ones(3)};
    EXPECT_THROW(compute_group(ShapingSpec{}, one), GroupTooSmall);
    RolloutGroup g;
    g.trajectories.resize(1);
    EXPECT_THROW(group_advantages(g, ShapingSpec{}), GroupTooSmall);
}

TEST(TokenBroadcast, RepeatsPerTurnValues) {
    EXPECT_EQ(broadcast_to_tokens(std::vector<double>{0.5, -1.0}, {2, 3}),
              (std::vector<double>{0.5, 0.5, -1.0, -1.0, -1.0}));
    EXPECT_THROW(broadcast_to_tokens(std::vector<double>{0.5}, {2, 3}), LengthMismatch);
    EXPECT_THROW(broadcast_to_tokens(std::vector<double>{0.5, 1.0}, {2, 0}), LengthMismatch);
}

TEST(Earliness, R2GPrefersEarlierRewardsOnDominatedPairs) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (double gamma : {0.5, 0.8, 0.99}) {
        for (int trial = 0; trial < 1000; ++trial) {
            const int T = 2 + static_cast<int>(rng() % 10);
            const int k = 1 + static_cast<int>(rng() % (T - 1));
            std::vector<double> values;
            for (int i = 0; i < k; ++i) values.push_back(u(rng));
            // Earlier: positions sorted ascending; later: each position shifted no earlier, at least one strictly later.
            std::vector<int> pos(T);
            std::iota(pos.begin(), pos.end(), 0);
            std::shuffle(pos.begin(), pos.end(), rng);
            pos.resize(k);
            std::sort(pos.begin(), pos.end());
            std::vector<int> later = pos;
            for (int i = k - 1; i >= 0; --i) {
                const int limit = i == k - 1 ? T - 1 : later[i + 1] - 1;
                if (limit > later[i]) later[i] += 1 + static_cast<int>(rng() % (limit - later[i]));
            }
            if (later == pos) {
                --trial;
                continue;
            }
            std::vector<double> early(T, 0.0), late(T, 0.0);
            for (int i = 0; i < k; ++i) {
                early[pos[i]] = values[i];
                late[later[i]] = values[i];
            }
            const auto s = spec(TurnScheme::equalized, TrajScheme::r2g, gamma);
            ASSERT_GT(score_trajectory(s, early), score_trajectory(s, late)) << gamma << " " << trial;
            ASSERT_NEAR(score_trajectory(spec(TurnScheme::equalized, TrajScheme::sum), early),
                        score_trajectory(spec(TurnScheme::equalized, TrajScheme::sum), late), 1e-12);
        }
    }
}

}  // namespace
