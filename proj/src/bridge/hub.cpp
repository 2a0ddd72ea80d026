#include "userl/bridge/hub.hpp"

#include "userl/core/errors.hpp"

namespace userl::bridge {

HumanBridgeHub::HumanBridgeHub(std::chrono::milliseconds reply_deadline) : deadline_(reply_deadline) {}

std::string HumanBridgeHub::open_session(const TaskSpec& task, const std::string& ground_truth, std::string id) {
    std::lock_guard lock(mutex_);
    if (id.empty()) id = task.task_id + "-" + std::to_string(sessions_.size());
    if (sessions_.count(id)) throw std::invalid_argument("bridge session '" + id + "' already exists");
    auto s = std::make_shared<Session>();
    s->task = task;
    s->ground_truth = ground_truth;
    sessions_[id] = s;
    return id;
}

void HumanBridgeHub::close_session(const std::string& id) {
    std::lock_guard lock(mutex_);
    sessions_.erase(id);
    cv_.notify_all();
}

bool HumanBridgeHub::has_session(const std::string& id) const { return find(id) != nullptr; }

std::vector<std::string> HumanBridgeHub::session_ids() const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> ids;
    for (const auto& [id, s] : sessions_) ids.push_back(id);
    return ids;
}

Json HumanBridgeHub::session_summaries() const {
    std::lock_guard lock(mutex_);
    Json out = Json::array();
    for (const auto& [id, s] : sessions_) {
        out.push_back({{"session_id", id},
                       {"gym", to_string(s->task.gym_kind)},
                       {"task_id", s->task.task_id},
                       {"awaiting_human", s->pending.has_value()},
                       {"attached", static_cast<bool>(s->sink)}});
    }
    return out;
}

std::shared_ptr<HumanBridgeHub::Session> HumanBridgeHub::find(const std::string& id) const {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

void HumanBridgeHub::send_locked(Session& s, const Json& message) {
    const std::string line = encode(message);
    s.outbound.push_back(message);
    s.log.push_back(message);
    if (s.sink) s.sink(line);
}

std::optional<std::uint64_t> HumanBridgeHub::attach(const std::string& id, Sink sink) {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) return std::nullopt;
    auto& s = *it->second;
    s.sink = std::move(sink);
    s.sink_token = next_token_++;
    s.sink(encode(session_start(id, s.task.gym_kind, s.task.task_id, s.ground_truth)));
    for (const auto& m : s.outbound) s.sink(encode(m));
    return s.sink_token;
}

void HumanBridgeHub::detach(const std::string& id, std::uint64_t token) {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(id);
    if (it != sessions_.end() && it->second->sink_token == token) it->second->sink = nullptr;
}

void HumanBridgeHub::deliver(const std::string& id, const std::string& line) {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) return;
    auto& s = *it->second;
    auto reject = [&](const std::string& code, const std::string& why) {
        const Json err = error_message(code, why);
        s.log.push_back(err);
        if (s.sink) s.sink(encode(err));
    };
    Json m;
    try {
        m = decode(line);
    } catch (const ProtocolError& e) {
        reject("ProtocolError", e.what());
        return;
    }
    s.log.push_back(m);
    if (m["type"] != "human_reply") {
        reject("ProtocolError", "only human_reply messages are accepted from the console");
        return;
    }
    if (!s.pending) {
        reject("NoPendingTurn", "no agent turn is waiting for a reply");
        return;
    }
    if (s.pending_schema) {
        try {
            s.reply = reply_to_fields(m, *s.pending_schema);
        } catch (const ReplyParseError& e) {
            reject("ValidationError", e.what());
            return;
        }
    } else {
        const std::string content = m.value("content", m.value("enum_choice", std::string{}));
        if (content.empty()) {
            reject("ValidationError", "reply is empty");
            return;
        }
        s.reply = Json(content);
    }
    s.pending.reset();
    cv_.notify_all();
}

std::string HumanBridgeHub::ask(const std::string& id, const usersim::UserQuery& query) {
    auto session = find(id);
    if (!session) throw HumanTimeout("bridge session '" + id + "' is closed");
    std::lock_guard serial(session->ask_mutex);
    std::unique_lock lock(mutex_);
    auto& s = *session;
    s.reply.reset();
    s.pending_schema = query.schema;
    s.pending = agent_turn(++s.prompt_count, query.verb, std::string(usersim::to_string(query.role)),
                           query.agent_input, query.schema);
    send_locked(s, *s.pending);
    const bool answered = cv_.wait_for(lock, deadline_, [&] { return s.reply.has_value() || !has_session_locked(id); });
    if (!answered || !s.reply) {
        s.pending.reset();
        throw HumanTimeout("no human reply for session '" + id + "' before the deadline");
    }
    Json reply = std::move(*s.reply);
    s.reply.reset();
    return reply.is_string() ? reply.get<std::string>() : usersim::render_fenced(reply);
}

void HumanBridgeHub::post(const std::string& id, const Json& message) {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(id);
    if (it != sessions_.end()) send_locked(*it->second, message);
}

std::vector<Json> HumanBridgeHub::message_log(const std::string& id) const {
    auto s = find(id);
    if (!s) return {};
    std::lock_guard lock(mutex_);
    return s->log;
}

HumanUserPort::HumanUserPort(HumanBridgeHub& hub, std::string session_id)
    : hub_(hub), session_id_(std::move(session_id)) {}

std::string HumanUserPort::query(const usersim::UserQuery& query) { return hub_.ask(session_id_, query); }

void HumanUserPort::on_turn(const orchestrator::TurnRecord& turn, const StepOutcome& outcome) {
    hub_.post(session_id_, turn_reward(turn.turn_index, outcome.reward));
}

void HumanUserPort::on_end(const orchestrator::Trajectory& trajectory, const Json& metrics) {
    hub_.post(session_id_, session_end(metrics, std::string(reward::to_string(trajectory.terminated_reason))));
}

}  // namespace userl::bridge
