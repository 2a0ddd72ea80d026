#include "userl/reward/shaping.hpp"

#include <string>

namespace userl::reward {

std::string_view to_string(TurnScheme s) {
    switch (s) {
        case TurnScheme::naive: return "naive";
        case TurnScheme::equalized: return "equalized";
        case TurnScheme::r2g: return "r2g";
        case TurnScheme::em: return "em";
    }
    return "naive";
}

std::string_view to_string(TrajScheme s) { return s == TrajScheme::sum ? "sum" : "r2g"; }

TurnScheme parse_turn_scheme(std::string_view name) {
    if (name == "naive") return TurnScheme::naive;
    if (name == "equalized") return TurnScheme::equalized;
    if (name == "r2g") return TurnScheme::r2g;
    if (name == "em") return TurnScheme::em;
    throw std::invalid_argument("unknown turn shaping '" + std::string(name) + "' (naive, equalized, r2g, em)");
}

TrajScheme parse_traj_scheme(std::string_view name) {
    if (name == "sum") return TrajScheme::sum;
    if (name == "r2g") return TrajScheme::r2g;
    throw std::invalid_argument("unknown trajectory score '" + std::string(name) + "' (sum, r2g)");
}

std::vector<double> shape_turn_rewards(const ShapingSpec& spec, const std::vector<double>& rewards) {
    return to_std(shape_turn_rewards<double>(spec, as_vector(rewards)));
}

std::vector<double> shape_turn_rewards(const ShapingSpec& spec, const std::vector<double>& rewards,
                                       double trajectory_score) {
    return to_std(shape_turn_rewards<double>(spec, as_vector(rewards), trajectory_score));
}

double score_trajectory(const ShapingSpec& spec, const std::vector<double>& rewards) {
    return score_trajectory<double>(spec, as_vector(rewards));
}

std::vector<double> broadcast_to_tokens(const std::vector<double>& per_turn, const std::vector<int>& token_counts) {
    return to_std(broadcast_to_tokens<double>(as_vector(per_turn), token_counts));
}

}  // namespace userl::reward
