#pragma once

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "userl/env/session.hpp"
#include "userl/env/task_set.hpp"
#include "userl/gyms/search_backend.hpp"
#include "userl/usersim/scripted_user.hpp"

namespace userl::testing {

inline std::filesystem::path fixture_dir() { return USERL_FIXTURE_DIR; }

inline const TaskSet& fixture_tasks() {
    static const TaskSet tasks = load_tasks(fixture_dir() / "tasks");
    return tasks;
}

inline const TaskSpec& fixture_task(const std::string& id) {
    const TaskSpec* t = fixture_tasks().find(id);
    if (!t) throw std::runtime_error("fixture task not found: " + id);
    return *t;
}

struct GoldenSession {
    std::string gym;
    std::string task_id;
    std::string name;
    std::vector<StepChoice> choices;
    std::vector<double> expected_rewards;
    bool expected_done = false;
    Json extra;
};

inline std::vector<GoldenSession> golden_sessions(const std::string& gym) {
    std::ifstream in(fixture_dir() / "golden" / (gym + ".jsonl"));
    if (!in) throw std::runtime_error("no golden file for " + gym);
    std::vector<GoldenSession> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const Json j = Json::parse(line);
        GoldenSession g;
        g.gym = gym;
        g.task_id = j.at("task_id");
        g.name = j.at("name");
        g.choices = j.at("choices").get<std::vector<StepChoice>>();
        g.expected_rewards = j.at("expected_rewards").get<std::vector<double>>();
        g.expected_done = j.at("expected_done");
        g.extra = j;
        out.push_back(std::move(g));
    }
    return out;
}

// A session wired to the task's scripted user and canned search results.
struct ScriptedSession {
    std::unique_ptr<usersim::UserPort> user;
    std::unique_ptr<gyms::CannedSearchBackend> search;
    std::unique_ptr<EnvSession> session;

    explicit ScriptedSession(const TaskSpec& task, EnvConfig config = {}) {
        user = usersim::make_scripted_port(task);
        search = std::make_unique<gyms::CannedSearchBackend>(task.metadata.value("search_results", Json::object()));
        session = std::make_unique<EnvSession>(reset(task, config, GymServices{user.get(), search.get()}));
    }
};

struct ReplayRun {
    std::vector<StepOutcome> outcomes;
    std::vector<double> rewards;
    bool done = false;
    Json final_state;
};

inline ReplayRun replay(const GoldenSession& g) {
    ScriptedSession s(fixture_task(g.task_id));
    ReplayRun run;
    for (const auto& c : g.choices) {
        run.outcomes.push_back(s.session->step(c));
        run.rewards.push_back(run.outcomes.back().reward);
    }
    run.done = !run.outcomes.empty() && run.outcomes.back().done;
    run.final_state = s.session->gym_state();
    return run;
}

inline bool bit_identical(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::memcmp(&a[i], &b[i], sizeof(double)) != 0) return false;
    }
    return true;
}

inline bool close_all(const std::vector<double>& a, const std::vector<double>& b, double tol) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(std::fabs(a[i] - b[i]) <= tol)) return false;
    }
    return true;
}

}  // namespace userl::testing

namespace userl::testing {

// User port answering through a callback; counts calls.
class FnUserPort final : public usersim::UserPort {
public:
    using Fn = std::function<std::string(const usersim::UserQuery&)>;
    explicit FnUserPort(Fn fn) : fn_(std::move(fn)) {}
    std::string_view implementation() const override { return "test"; }
    std::string query(const usersim::UserQuery& q) override {
        std::lock_guard lock(mutex_);
        ++calls;
        queries.push_back(q);
        return fn_(q);
    }
    int calls = 0;
    std::vector<usersim::UserQuery> queries;

private:
    Fn fn_;
    std::mutex mutex_;
};

inline std::string fenced(const Json& j) { return "```json\n" + j.dump() + "\n```"; }

}  // namespace userl::testing
