#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "userl/env/types.hpp"

namespace userl {

namespace usersim {
class UserPort;
}
namespace gyms {
class SearchBackend;
}

/// Collaborators a gym may call during a step. Non-owning; the caller keeps
/// them alive for the session's lifetime.
struct GymServices {
    usersim::UserPort* user = nullptr;
    gyms::SearchBackend* search = nullptr;
};

/// What a gym rule produces for one step, before env-core postprocessing.
struct GymReply {
    std::string observation;
    double raw_reward = 0.0;
    bool goal_reached = false;
    Json info = Json::object();
};

/// One gym automaton bound to one task. `step` must not mutate `*this`
/// before every user-port call it needs has succeeded; env-core also steps
/// a clone and only commits on success.
class Gym {
public:
    virtual ~Gym() = default;

    virtual GymKind kind() const = 0;
    virtual std::unique_ptr<Gym> clone() const = 0;

    /// Public task statement shown to the agent at the start.
    virtual std::string initial_observation() const = 0;
    virtual GymReply step(const StepChoice& choice, const GymServices& services, const EnvConfig& config) = 0;
    virtual Json state() const = 0;

    virtual bool needs_user() const { return true; }
    virtual bool needs_search() const { return false; }

    /// Ground-truth strings that must never reach the agent.
    virtual std::vector<std::string> secrets() const = 0;

    /// The gym's evaluation metric for a finished session given its
    /// post-processed turn rewards. Defaults to the reward sum.
    virtual double task_metric(std::span<const double> rewards) const;
};

/// Validates the payload for the task's gym and builds the automaton.
/// Throws SchemaError or UnsupportedGym.
std::unique_ptr<Gym> make_gym(const TaskSpec& task);

/// Extension point for gyms whose logic lives outside the engine (TauGym).
using ExternalGymFactory = std::function<std::unique_ptr<Gym>(const TaskSpec&)>;
void register_external_gym(GymKind kind, ExternalGymFactory factory);
void clear_external_gyms();

}  // namespace userl
