#pragma once

#include <string>
#include <vector>

#include "userl/core/errors.hpp"
#include "userl/env/gym.hpp"
#include "userl/env/types.hpp"
#include "userl/usersim/user_port.hpp"

namespace userl::gyms::detail {

inline const Json& require(const Json& payload, const char* key, const char* gym) {
    if (!payload.is_object() || !payload.contains(key) || payload[key].is_null()) {
        throw SchemaError(std::string(gym) + " payload is missing '" + key + "'");
    }
    return payload[key];
}

inline std::string require_string(const Json& payload, const char* key, const char* gym) {
    const Json& v = require(payload, key, gym);
    if (!v.is_string() || v.get<std::string>().empty()) {
        throw SchemaError(std::string(gym) + " payload field '" + key + "' must be a non-empty string");
    }
    return v.get<std::string>();
}

inline std::string optional_string(const Json& payload, const char* key, std::string fallback = {}) {
    if (payload.contains(key) && payload[key].is_string()) return payload[key].get<std::string>();
    return fallback;
}

/// Replays (agent, user) pairs as a chat and appends the current agent turn.
inline std::vector<usersim::ChatMessage> dialogue(const std::vector<std::pair<std::string, std::string>>& history,
                                                  const std::string& current) {
    std::vector<usersim::ChatMessage> out;
    for (const auto& [agent, user] : history) {
        out.push_back({"user", agent});
        out.push_back({"assistant", user});
    }
    out.push_back({"user", current});
    return out;
}

inline usersim::UserPort& require_user(const GymServices& services, const char* gym) {
    if (services.user == nullptr) throw std::invalid_argument(std::string(gym) + " step needs a user port");
    return *services.user;
}

}  // namespace userl::gyms::detail
