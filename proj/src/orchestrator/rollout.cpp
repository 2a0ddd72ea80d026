#include "userl/orchestrator/rollout.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <numeric>
#include <thread>

#include "userl/core/errors.hpp"
#include "userl/core/text.hpp"
#include "userl/env/session.hpp"
#include "userl/orchestrator/agent_prompt.hpp"
#include "userl/orchestrator/metrics.hpp"
#include "userl/usersim/scripted_user.hpp"

namespace userl::orchestrator {

void RolloutPlan::validate() const {
    env.validate();
    shaping.validate();
    if (group_size < 1) throw std::invalid_argument("group size must be at least 1");
    if (max_turns < 1) throw std::invalid_argument("max turns must be at least 1");
    if (max_turns > env.max_steps) throw std::invalid_argument("max turns may not exceed the gym step budget");
    if (workers < 1) throw std::invalid_argument("workers must be at least 1");
}

int RolloutPlan::turn_cap() const { return std::min(max_turns, env.max_steps); }

void to_json(Json& j, const SessionTranscript& t) {
    j = Json{{"task_id", t.task_id},
             {"trajectory_index", t.trajectory_index},
             {"messages", t.messages},
             {"parse_status", t.parse_status}};
}

void from_json(const Json& j, SessionTranscript& t) {
    t.task_id = j.at("task_id").get<std::string>();
    t.trajectory_index = j.at("trajectory_index").get<int>();
    t.messages = j.at("messages");
    t.parse_status = j.at("parse_status").get<std::vector<std::string>>();
}

UserPortProvider scripted_users() {
    return [](const TaskSpec& task, int) -> std::shared_ptr<usersim::UserPort> {
        return usersim::make_scripted_port(task);
    };
}

SearchProvider canned_search() {
    return [](const TaskSpec& task) -> std::shared_ptr<gyms::SearchBackend> {
        if (task.gym_kind != GymKind::search) return nullptr;
        return std::make_shared<gyms::CannedSearchBackend>(task.metadata.value("search_results", Json::object()));
    };
}

namespace {

Json normalized_assistant(const Json& message, const StepChoice& choice, const std::string& call_id) {
    const std::string thought =
        message.contains("content") && message["content"].is_string() ? message["content"].get<std::string>() : "";
    return tool_call_message(choice, thought, call_id);
}

std::string content_of(const Json& message) {
    return message.contains("content") && message["content"].is_string() ? message["content"].get<std::string>()
                                                                         : std::string{};
}

}  // namespace

Episode run_episode(const RolloutPlan& plan, const TaskSpec& task, int trajectory_index,
                    const RolloutServices& services) {
    if (services.policy == nullptr) throw std::invalid_argument("rollout needs a policy client");
    auto port = services.users ? services.users(task, trajectory_index) : nullptr;
    auto search = services.search ? services.search(task) : nullptr;
    auto* observer = dynamic_cast<EpisodeObserver*>(port.get());

    EnvSession session = reset(task, plan.env, GymServices{port.get(), search.get()});

    Episode ep;
    Trajectory& traj = ep.trajectory;
    traj.task_id = task.task_id;
    traj.gym_kind = task.gym_kind;
    traj.trajectory_index = trajectory_index;
    traj.seed = plan.seed + static_cast<std::uint64_t>(trajectory_index);
    SessionTranscript& tr = ep.transcript;
    tr.task_id = task.task_id;
    tr.trajectory_index = trajectory_index;
    tr.messages.push_back({{"role", "system"}, {"content", agent_system_prompt(task.gym_kind)}});
    tr.messages.push_back({{"role", "user"}, {"content", session.initial_observation()}});

    const PolicyCall call{plan.policy_temperature, traj.seed, plan.max_response_tokens};
    bool aborted = false;
    const int cap = plan.turn_cap();
    while (!session.terminated() && static_cast<int>(traj.turns.size()) < cap) {
        const int turn_index = static_cast<int>(traj.turns.size()) + 1;
        PolicyReply reply;
        ParsedToolCall parsed;
        std::string status = "ok";
        try {
            for (int attempt = 0; attempt < 2; ++attempt) {
                reply = services.policy->complete(tr.messages, Json::array({interact_tool_schema()}), call);
                parsed = parse_tool_call(reply.message, task.gym_kind);
                if (parsed.choice) break;
                tr.messages.push_back({{"role", "assistant"}, {"content", content_of(reply.message)}});
                if (attempt == 0) {
                    tr.messages.push_back({{"role", "user"}, {"content", format_reminder(task.gym_kind, parsed.error)}});
                    status = "reprompted";
                }
            }
        } catch (const PolicyEndpointError& e) {
            traj.abort_detail = std::string("policy endpoint: ") + e.what();
            aborted = true;
            break;
        }
        if (!parsed.choice) {
            tr.parse_status.push_back("malformed");
            traj.abort_detail = "malformed tool call: " + parsed.error;
            aborted = true;
            break;
        }
        const std::string call_id =
            parsed.call_id.empty() ? "call_" + std::to_string(trajectory_index) + "_" + std::to_string(turn_index)
                                   : parsed.call_id;
        const StepChoice choice = *parsed.choice;

        StepOutcome outcome;
        try {
            outcome = session.step(choice);
        } catch (const HumanTimeout& e) {
            traj.abort_detail = std::string("human timeout: ") + e.what();
            aborted = true;
            break;
        } catch (const UserPortFailure& e) {
            traj.abort_detail = std::string("user simulator: ") + e.what();
            aborted = true;
            break;
        }
        tr.messages.push_back(normalized_assistant(reply.message, choice, call_id));
        tr.messages.push_back({{"role", "tool"}, {"tool_call_id", call_id}, {"content", outcome.observation}});
        tr.parse_status.push_back(status);

        TurnRecord rec;
        rec.turn_index = turn_index;
        rec.choice = choice;
        rec.observation = outcome.observation;
        rec.raw_reward = outcome.reward;
        if (reply.completion_tokens && *reply.completion_tokens >= 1) {
            rec.token_count = *reply.completion_tokens;
        } else {
            const auto& args = tr.messages[tr.messages.size() - 2]["tool_calls"][0]["function"]["arguments"];
            const auto n = text::whitespace_token_count(content_of(reply.message) + " " + args.get<std::string>());
            rec.token_count = std::max<int>(1, static_cast<int>(n));
            rec.token_count_estimated = true;
        }
        traj.turns.push_back(rec);
        if (observer) observer->on_turn(rec, outcome);
    }

    if (aborted) {
        traj.terminated_reason = TrajectoryEnd::aborted;
    } else if (session.termination_reason() == TerminationReason::goal) {
        traj.terminated_reason = TrajectoryEnd::goal;
    } else {
        traj.terminated_reason = TrajectoryEnd::budget;
    }
    const auto rewards = traj.rewards();
    traj.task_metric = session.gym().task_metric(rewards);
    if (observer) {
        observer->on_end(traj, Json{{"reward_sum", std::accumulate(rewards.begin(), rewards.end(), 0.0)},
                                    {"task_metric", traj.task_metric},
                                    {"effective_turns", effective_turns(rewards)},
                                    {"time_weighted_performance", time_weighted_performance(rewards)},
                                    {"turns", traj.turns.size()},
                                    {"status", to_string(traj.terminated_reason)}});
    }
    return ep;
}

namespace {

struct Job {
    std::size_t task;
    int index;
};

}  // namespace

std::vector<GroupRun> run_plan(const RolloutPlan& plan, const RolloutServices& services) {
    plan.validate();
    if (services.policy == nullptr) throw std::invalid_argument("rollout needs a policy client");
    std::vector<Job> jobs;
    for (std::size_t t = 0; t < plan.tasks.size(); ++t) {
        for (int i = 0; i < plan.group_size; ++i) jobs.push_back({t, i});
    }
    std::vector<Episode> results(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < jobs.size(); k = next++) {
            try {
                results[k] = run_episode(plan, plan.tasks[jobs[k].task], jobs[k].index, services);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(plan.workers), jobs.size());
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    std::vector<GroupRun> out(plan.tasks.size());
    for (std::size_t k = 0; k < jobs.size(); ++k) {
        auto& g = out[jobs[k].task];
        g.group.task_id = plan.tasks[jobs[k].task].task_id;
        g.group.trajectories.push_back(std::move(results[k].trajectory));
        g.transcripts.push_back(std::move(results[k].transcript));
    }
    return out;
}

GroupRun run_group(const RolloutPlan& plan, const TaskSpec& task, const RolloutServices& services) {
    RolloutPlan single = plan;
    single.tasks = {task};
    return std::move(run_plan(single, services).front());
}

std::vector<std::string> scan_for_leaks(const Json& messages, const std::vector<std::string>& secrets) {
    std::vector<std::string> hits;
    for (std::size_t i = 0; i < messages.size(); ++i) {
        const auto& m = messages[i];
        if (m.value("role", "") == "assistant") continue;
        const std::string content = text::to_lower(content_of(m));
        for (const auto& s : secrets) {
            const auto needle = text::to_lower(text::trim(s));
            if (!needle.empty() && content.find(needle) != std::string::npos) {
                hits.push_back(std::to_string(i) + ": " + s);
            }
        }
    }
    return hits;
}

}  // namespace userl::orchestrator
