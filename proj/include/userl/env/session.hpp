#pragma once

#include <memory>
#include <vector>

#include "userl/env/gym.hpp"
#include "userl/env/types.hpp"

namespace userl {

struct HistoryEntry {
    StepChoice choice;
    StepOutcome outcome;

    friend bool operator==(const HistoryEntry&, const HistoryEntry&) = default;
};

void to_json(Json& j, const HistoryEntry& e);
void from_json(const Json& j, HistoryEntry& e);

/// raw * reward_scale - step_penalty, clamped to [0, 1] when
/// normalize_to_unit is set. The penalty applies on every turn.
double postprocess_reward(double raw, const EnvConfig& config, int step_index);

/// A running gym session. Move-only; must not be stepped concurrently.
class EnvSession {
public:
    EnvSession(EnvSession&&) noexcept = default;
    EnvSession& operator=(EnvSession&&) noexcept = default;
    EnvSession(const EnvSession&) = delete;
    EnvSession& operator=(const EnvSession&) = delete;

    const TaskSpec& task() const { return task_; }
    const EnvConfig& config() const { return config_; }
    int step_count() const { return static_cast<int>(history_.size()); }
    const std::vector<HistoryEntry>& history() const { return history_; }
    bool terminated() const { return reason_ != TerminationReason::none; }
    TerminationReason termination_reason() const { return reason_; }
    const Gym& gym() const { return *gym_; }

    Json gym_state() const { return gym_->state(); }
    std::string initial_observation() const { return gym_->initial_observation(); }
    /// Session summary: initial observation, step count, gym state.
    Json info() const;

    /// Advances the automaton by one agent choice. Throws VerbNotAllowed,
    /// SessionTerminated, InvalidChoice, or a UserPortFailure; on any throw the
    /// session is unchanged.
    StepOutcome step(const StepChoice& choice);

    std::vector<double> rewards() const;

private:
    friend EnvSession reset(const TaskSpec&, const EnvConfig&, GymServices);

    EnvSession(TaskSpec task, EnvConfig config, GymServices services, std::unique_ptr<Gym> gym);

    TaskSpec task_;
    EnvConfig config_;
    GymServices services_;
    std::unique_ptr<Gym> gym_;
    std::vector<HistoryEntry> history_;
    TerminationReason reason_ = TerminationReason::none;
};

/// Builds a fresh session. Throws SchemaError for malformed payloads or
/// config, UnsupportedGym for gyms without an adapter, and
/// std::invalid_argument when a required user port or search backend is
/// missing.
EnvSession reset(const TaskSpec& task, const EnvConfig& config, GymServices services);

Json history_to_json(const std::vector<HistoryEntry>& history);
std::vector<HistoryEntry> history_from_json(const Json& j);

}  // namespace userl
