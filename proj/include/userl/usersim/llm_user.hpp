#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include "userl/net/chat_http.hpp"
#include "userl/usersim/user_port.hpp"

namespace userl::usersim {

/// (gym, role) -> endpoint. A binding without a gym applies to every gym
/// that has no more specific binding for the role.
struct RoleBinding {
    std::optional<GymKind> gym;
    UserRole role = UserRole::responder;
    net::ChatEndpoint endpoint;
};

/// Parses "responder=URL,judge=URL,telepathy.judge=URL". A bare URL binds
/// both roles.
std::vector<RoleBinding> parse_role_bindings(const std::string& spec, const std::string& model = "default",
                                             const std::string& api_key = {});

/// The (gym, role) pairs a gym calls; SearchGym's judge only matters for
/// llm_judge tasks.
std::vector<UserRole> required_roles(GymKind gym);

/// User simulator backed by chat-completion endpoints.
class LlmUserPort final : public UserPort {
public:
    struct RequestRecord {
        GymKind gym;
        UserRole role;
        std::string url;
        std::string model;
        double temperature;
    };

    explicit LlmUserPort(net::RetryPolicy retry = {}, int max_concurrency = 16);

    void bind(RoleBinding binding);
    bool bound(GymKind gym, UserRole role) const;
    const net::ChatEndpoint& endpoint_for(GymKind gym, UserRole role) const;

    std::string_view implementation() const override { return "llm"; }
    std::string query(const UserQuery& query) override;

    std::vector<RequestRecord> request_log() const;

private:
    net::RetryPolicy retry_;
    std::counting_semaphore<> slots_;
    std::vector<RoleBinding> bindings_;
    mutable std::mutex log_mutex_;
    std::vector<RequestRecord> log_;
};

}  // namespace userl::usersim
