#include "userl/lab/chain_gym.hpp"

#include <stdexcept>

namespace userl::lab {

std::string_view to_string(ChainAction a) {
    switch (a) {
        case ChainAction::probe: return "probe";
        case ChainAction::unlock: return "unlock";
        case ChainAction::solve: return "solve";
        case ChainAction::noop: return "noop";
    }
    return "noop";
}

ChainGym::ChainGym(int horizon) : horizon_(horizon) {
    if (horizon < 1) throw std::invalid_argument("chain horizon must be positive");
}

void ChainGym::reset() {
    turn_ = 0;
    unlocked_ = false;
    probes_paid_ = 0;
    solved_ = false;
}

double ChainGym::step(ChainAction a) {
    if (done()) throw std::logic_error("chain episode is over");
    ++turn_;
    switch (a) {
        case ChainAction::probe:
            if (probes_paid_ < 2) {
                ++probes_paid_;
                return 0.1;
            }
            return 0.0;
        case ChainAction::unlock: unlocked_ = true; return 0.0;
        case ChainAction::solve:
            if (unlocked_) {
                solved_ = true;
                return 1.0;
            }
            return 0.0;
        case ChainAction::noop: return 0.0;
    }
    return 0.0;
}

}  // namespace userl::lab
