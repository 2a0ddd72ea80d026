#pragma once

#include <array>
#include <string_view>

namespace userl::lab {

/// Synthetic multi-turn task: `solve` pays 1 (and ends the episode) only
/// after an earlier `unlock`; `probe` pays 0.1 at most twice; everything
/// else pays 0. Best possible reward sum is 1.2.
enum class ChainAction { probe = 0, unlock = 1, solve = 2, noop = 3 };

inline constexpr int kChainActions = 4;
inline constexpr int kDefaultHorizon = 8;

std::string_view to_string(ChainAction a);

class ChainGym {
public:
    explicit ChainGym(int horizon = kDefaultHorizon);

    void reset();
    /// Reward of taking `a` at the current turn. Throws std::logic_error
    /// once the episode is over.
    double step(ChainAction a);

    bool done() const { return solved_ || turn_ >= horizon_; }
    bool solved() const { return solved_; }
    int turn() const { return turn_; }  // turns taken so far
    int horizon() const { return horizon_; }
    bool unlocked() const { return unlocked_; }
    int probes_paid() const { return probes_paid_; }

private:
    int horizon_;
    int turn_ = 0;
    bool unlocked_ = false;
    int probes_paid_ = 0;
    bool solved_ = false;
};

}  // namespace userl::lab
