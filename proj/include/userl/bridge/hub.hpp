#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "userl/bridge/protocol.hpp"
#include "userl/orchestrator/rollout.hpp"
#include "userl/usersim/user_port.hpp"

namespace userl::bridge {

/// Sessions waiting for, or played by, a human. The orchestrator side asks
/// questions and posts rewards; the network side attaches a connection and
/// delivers replies. One pending prompt per session at a time.
class HumanBridgeHub {
public:
    using Sink = std::function<void(const std::string& line)>;

    explicit HumanBridgeHub(std::chrono::milliseconds reply_deadline = std::chrono::minutes(5));

    /// Registers a session and returns its id (`id` if given).
    std::string open_session(const TaskSpec& task, const std::string& ground_truth, std::string id = {});
    void close_session(const std::string& id);
    bool has_session(const std::string& id) const;
    std::vector<std::string> session_ids() const;
    Json session_summaries() const;

    /// Attaches a connection: it receives session_start, then every message
    /// sent so far (including the pending prompt). A new attach replaces the
    /// previous connection. Returns a token for detach, or nullopt for an
    /// unknown session.
    std::optional<std::uint64_t> attach(const std::string& id, Sink sink);
    void detach(const std::string& id, std::uint64_t token);

    /// A line from the human's connection. Bad lines and replies without a
    /// pending prompt are answered with an error message.
    void deliver(const std::string& id, const std::string& line);

    /// Posts the prompt and blocks until a valid reply arrives; throws
    /// HumanTimeout after the deadline.
    std::string ask(const std::string& id, const usersim::UserQuery& query);

    /// Server-to-human message outside the prompt cycle (turn_reward, session_end).
    void post(const std::string& id, const Json& message);

    /// Every message in both directions, in order.
    std::vector<Json> message_log(const std::string& id) const;

private:
    struct Session {
        TaskSpec task;
        std::string ground_truth;
        std::vector<Json> outbound;
        std::vector<Json> log;
        std::optional<Json> pending;
        const usersim::ReplySchema* pending_schema = nullptr;
        std::optional<Json> reply;
        int prompt_count = 0;
        Sink sink;
        std::uint64_t sink_token = 0;
        std::mutex ask_mutex;
    };

    std::shared_ptr<Session> find(const std::string& id) const;
    void send_locked(Session& s, const Json& message);
    bool has_session_locked(const std::string& id) const { return sessions_.count(id) != 0; }

    std::chrono::milliseconds deadline_;
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::uint64_t next_token_ = 1;
};

/// The user port for one human-played session. Also reports rewards and the
/// final metrics back to the human.
class HumanUserPort final : public usersim::UserPort, public orchestrator::EpisodeObserver {
public:
    HumanUserPort(HumanBridgeHub& hub, std::string session_id);

    std::string_view implementation() const override { return "human"; }
    std::string query(const usersim::UserQuery& query) override;
    bool supports_concurrent_queries() const override { return false; }

    void on_turn(const orchestrator::TurnRecord& turn, const StepOutcome& outcome) override;
    void on_end(const orchestrator::Trajectory& trajectory, const Json& metrics) override;

    const std::string& session_id() const { return session_id_; }

private:
    HumanBridgeHub& hub_;
    std::string session_id_;
};

}  // namespace userl::bridge
