#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace userl {

using Json = nlohmann::json;

enum class GymKind { function, telepathy, turtle, intention, persuade, travel, search, tau_stub };

/// The three operation types of the `interact_with_env` tool.
enum class Verb { action, search, answer };

std::string_view to_string(GymKind kind);
std::string_view to_string(Verb verb);
/// Accepts the canonical names plus the `*gym` spellings ("telepathygym").
GymKind parse_gym_kind(std::string_view name);
Verb parse_verb(std::string_view name);

inline constexpr GymKind kAllGyms[] = {GymKind::function, GymKind::telepathy, GymKind::turtle,
                                       GymKind::intention, GymKind::persuade, GymKind::travel,
                                       GymKind::search, GymKind::tau_stub};

/// Verbs each gym accepts, from the gyms' interface definitions.
std::span<const Verb> allowed_verbs(GymKind kind);
bool verb_allowed(GymKind kind, Verb verb);

struct TaskSpec {
    std::string task_id;
    GymKind gym_kind = GymKind::function;
    Json payload = Json::object();
    Json metadata = Json::object();
};

struct StepChoice {
    Verb verb = Verb::action;
    std::string content;

    friend bool operator==(const StepChoice&, const StepChoice&) = default;
};

struct StepOutcome {
    std::string observation;
    /// Reward exactly as the gym rule emitted it.
    double raw_reward = 0.0;
    /// Reward after scale, step penalty and optional clamp.
    double reward = 0.0;
    bool done = false;
    Json info = Json::object();

    friend bool operator==(const StepOutcome&, const StepOutcome&) = default;
};

struct EnvConfig {
    int max_steps = 20;
    double reward_scale = 1.0;
    double step_penalty = 0.0;
    bool normalize_to_unit = false;
    double success_threshold = 0.9;

    void validate() const;
};

enum class TerminationReason { none, goal, budget };

void to_json(Json& j, const TaskSpec& t);
void from_json(const Json& j, TaskSpec& t);
void to_json(Json& j, const StepChoice& c);
void from_json(const Json& j, StepChoice& c);
void to_json(Json& j, const StepOutcome& o);
void from_json(const Json& j, StepOutcome& o);
void to_json(Json& j, const EnvConfig& c);
void from_json(const Json& j, EnvConfig& c);

}  // namespace userl
