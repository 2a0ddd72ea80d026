#include "userl/usersim/llm_user.hpp"

#include "userl/core/text.hpp"

namespace userl::usersim {

std::vector<RoleBinding> parse_role_bindings(const std::string& spec, const std::string& model,
                                             const std::string& api_key) {
    std::vector<RoleBinding> out;
    std::size_t start = 0;
    while (start <= spec.size()) {
        auto end = spec.find(',', start);
        if (end == std::string::npos) end = spec.size();
        const std::string item = text::trim(std::string_view(spec).substr(start, end - start));
        start = end + 1;
        if (item.empty()) continue;
        net::ChatEndpoint ep{.url = {}, .model = model, .api_key = api_key};
        const auto eq = item.find('=');
        if (eq == std::string::npos || item.find("://") < eq) {
            ep.url = item;
            out.push_back({std::nullopt, UserRole::responder, ep});
            out.push_back({std::nullopt, UserRole::judge, ep});
            continue;
        }
        const std::string key = item.substr(0, eq);
        ep.url = item.substr(eq + 1);
        RoleBinding b;
        if (const auto dot = key.find('.'); dot != std::string::npos) {
            b.gym = parse_gym_kind(key.substr(0, dot));
            b.role = parse_user_role(key.substr(dot + 1));
        } else {
            b.role = parse_user_role(key);
        }
        net::split_url(ep.url);
        b.endpoint = ep;
        out.push_back(std::move(b));
    }
    return out;
}

std::vector<UserRole> required_roles(GymKind gym) {
    switch (gym) {
        case GymKind::function:
        case GymKind::tau_stub: return {};
        case GymKind::persuade:
        case GymKind::travel: return {UserRole::responder};
        case GymKind::search: return {UserRole::judge};
        case GymKind::telepathy:
        case GymKind::turtle:
        case GymKind::intention: return {UserRole::responder, UserRole::judge};
    }
    return {};
}

LlmUserPort::LlmUserPort(net::RetryPolicy retry, int max_concurrency)
    : retry_(retry), slots_(std::max(1, max_concurrency)) {}

void LlmUserPort::bind(RoleBinding binding) {
    net::split_url(binding.endpoint.url);
    bindings_.push_back(std::move(binding));
}

bool LlmUserPort::bound(GymKind gym, UserRole role) const {
    for (const auto& b : bindings_) {
        if (b.role == role && (!b.gym || *b.gym == gym)) return true;
    }
    return false;
}

const net::ChatEndpoint& LlmUserPort::endpoint_for(GymKind gym, UserRole role) const {
    const RoleBinding* fallback = nullptr;
    for (const auto& b : bindings_) {
        if (b.role != role) continue;
        if (b.gym && *b.gym == gym) return b.endpoint;
        if (!b.gym && !fallback) fallback = &b;
    }
    if (!fallback) {
        throw std::invalid_argument("no user endpoint bound for " + std::string(to_string(gym)) + "." +
                                    std::string(to_string(role)));
    }
    return fallback->endpoint;
}

std::string LlmUserPort::query(const UserQuery& q) {
    const auto& ep = endpoint_for(q.gym, q.role);
    Json messages = Json::array();
    messages.push_back({{"role", "system"}, {"content", q.system}});
    for (const auto& m : q.conversation) messages.push_back({{"role", m.role}, {"content", m.content}});
    const Json body{{"model", ep.model}, {"messages", messages}, {"temperature", q.temperature}};
    {
        std::lock_guard lock(log_mutex_);
        log_.push_back({q.gym, q.role, ep.url, ep.model, q.temperature});
    }
    slots_.acquire();
    Json completion;
    try {
        completion = net::post_chat_completion(ep, body, retry_);
    } catch (...) {
        slots_.release();
        throw;
    }
    slots_.release();
    return net::message_content(completion);
}

std::vector<LlmUserPort::RequestRecord> LlmUserPort::request_log() const {
    std::lock_guard lock(log_mutex_);
    return log_;
}

}  // namespace userl::usersim
