#include <map>
#include <mutex>
#include <numeric>

#include "userl/core/errors.hpp"
#include "userl/env/gym.hpp"
#include "userl/gyms/gyms.hpp"

namespace userl {

namespace {

std::mutex& registry_mutex() {
    static std::mutex m;
    return m;
}

std::map<GymKind, ExternalGymFactory>& external_gyms() {
    static std::map<GymKind, ExternalGymFactory> gyms;
    return gyms;
}

}  // namespace

double Gym::task_metric(std::span<const double> rewards) const {
    return std::accumulate(rewards.begin(), rewards.end(), 0.0);
}

void register_external_gym(GymKind kind, ExternalGymFactory factory) {
    std::lock_guard lock(registry_mutex());
    external_gyms()[kind] = std::move(factory);
}

void clear_external_gyms() {
    std::lock_guard lock(registry_mutex());
    external_gyms().clear();
}

std::unique_ptr<Gym> make_gym(const TaskSpec& task) {
    {
        std::lock_guard lock(registry_mutex());
        if (auto it = external_gyms().find(task.gym_kind); it != external_gyms().end()) return it->second(task);
    }
    switch (task.gym_kind) {
        case GymKind::function: return std::make_unique<gyms::FunctionGym>(task);
        case GymKind::telepathy: return std::make_unique<gyms::TelepathyGym>(task);
        case GymKind::turtle: return std::make_unique<gyms::TurtleGym>(task);
        case GymKind::intention: return std::make_unique<gyms::IntentionGym>(task);
        case GymKind::persuade: return std::make_unique<gyms::PersuadeGym>(task);
        case GymKind::travel: return std::make_unique<gyms::TravelGym>(task);
        case GymKind::search: return std::make_unique<gyms::SearchGym>(task);
        case GymKind::tau_stub:
            // TauGym rewards come from the external Tau-Bench runtime. Plug an
            // adapter in with register_external_gym(GymKind::tau_stub, ...):
            // it receives the TaskSpec and must return a Gym whose step()
            // forwards the choice to Tau-Bench and reports its reward.
            throw UnsupportedGym("tau gym requires an external Tau-Bench adapter (register_external_gym)");
    }
    throw UnsupportedGym("unknown gym kind");
}

}  // namespace userl
