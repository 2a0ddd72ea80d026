#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>

#include "support/fixtures.hpp"
#include "support/mock_chat.hpp"
#include "userl/core/errors.hpp"
#include "userl/orchestrator/agent_prompt.hpp"
#include "userl/orchestrator/metrics.hpp"
#include "userl/orchestrator/persist.hpp"

using namespace userl;
using namespace userl::orchestrator;
using namespace userl::testing;

namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
    auto p = fs::temp_directory_path() / ("userl_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::vector<Json> read_jsonl(const fs::path& p) {
    std::ifstream in(p);
    std::vector<Json> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) out.push_back(Json::parse(line));
    }
    return out;
}

int assistant_turns(const Json& messages) {
    int k = 0;
    for (const auto& m : messages) k += m.value("role", "") == "assistant";
    return k;
}

// --- tool schema and prompt -------------------------------------------------

TEST(ToolSchema, InteractWithEnvDefinition) {
    const Json& t = interact_tool_schema();
    EXPECT_EQ(t["type"], "function");
    EXPECT_EQ(t["function"]["name"], "interact_with_env");
    const auto& params = t["function"]["parameters"];
    EXPECT_EQ(params["properties"]["choice"]["enum"], Json::array({"action", "answer", "search"}).size() == 3
                                                          ? params["properties"]["choice"]["enum"]
                                                          : Json());
    std::set<std::string> verbs;
    for (const auto& v : params["properties"]["choice"]["enum"]) verbs.insert(v);
    EXPECT_EQ(verbs, (std::set<std::string>{"action", "answer", "search"}));
    std::set<std::string> required;
    for (const auto& v : params["required"]) required.insert(v);
    EXPECT_EQ(required, (std::set<std::string>{"choice", "content"}));
}

TEST(AgentPrompt, RenderedForEveryGymWithoutPlaceholders) {
    for (GymKind g : kAllGyms) {
        const auto p = agent_system_prompt(g);
        EXPECT_EQ(p.find("{{"), std::string::npos) << to_string(g);
        EXPECT_NE(p.find("Action Space"), std::string::npos);
        for (Verb v : allowed_verbs(g)) EXPECT_NE(p.find(std::string(to_string(v))), std::string::npos);
        EXPECT_EQ(p, agent_system_prompt(g));
    }
}

// --- tool-call parsing ------------------------------------------------------

TEST(ToolCallParsing, WellFormedCall) {
    const auto msg = tool_call_message({Verb::answer, "26"}, "", "call_x");
    const auto p = parse_tool_call(msg, GymKind::function);
    ASSERT_TRUE(p.choice);
    EXPECT_EQ(*p.choice, (StepChoice{Verb::answer, "26"}));
    EXPECT_EQ(p.call_id, "call_x");
}

TEST(ToolCallParsing, TextEmbeddedFallback) {
    const Json msg{{"role", "assistant"},
                   {"content", "thinking...\n<tool_call>{\"name\": \"interact_with_env\", \"arguments\": "
                               "{\"choice\": \"action\", \"content\": \"1, 2, 3, 4\"}}</tool_call>"}};
    const auto p = parse_tool_call(msg, GymKind::function);
    ASSERT_TRUE(p.choice) << p.error;
    EXPECT_EQ(p.choice->content, "1, 2, 3, 4");
}

TEST(ToolCallParsing, Rejections) {
    EXPECT_FALSE(parse_tool_call(Json{{"role", "assistant"}, {"content", "I think it is 26."}}, GymKind::function).choice);
    EXPECT_FALSE(parse_tool_call(tool_call_message({Verb::search, "x"}), GymKind::telepathy).choice);
    EXPECT_FALSE(parse_tool_call(tool_call_message({Verb::answer, ""}), GymKind::function).choice);
    Json two = tool_call_message({Verb::answer, "1"});
    two["tool_calls"].push_back(two["tool_calls"][0]);
    EXPECT_FALSE(parse_tool_call(two, GymKind::function).choice);
    Json other = tool_call_message({Verb::answer, "1"});
    other["tool_calls"][0]["function"]["name"] = "web_browse";
    EXPECT_FALSE(parse_tool_call(other, GymKind::function).choice);
    Json bad_json = tool_call_message({Verb::answer, "1"});
    bad_json["tool_calls"][0]["function"]["arguments"] = "{not json";
    EXPECT_FALSE(parse_tool_call(bad_json, GymKind::function).choice);
}

// --- metrics ----------------------------------------------------------------

TEST(Metrics, SpecExample) {
    const std::vector<double> r{0.2, 0, 0.7, 0, 0};
    EXPECT_EQ(effective_turns(r), 3);
    EXPECT_EQ(time_weighted_performance(r), 0.275);
    EXPECT_EQ(effective_turns({0, 0}), 0);
    EXPECT_EQ(time_weighted_performance({}), 0.0);
}

// --- end-to-end against a mock endpoint --------------------------------------

// Answers like a policy that probes, fetches the test case and answers.
MockChatServer::Response function_policy(const Json& req) {
    static const std::vector<StepChoice> script{{Verb::action, "1, 2, 3, 4"}, {Verb::search, "test case"},
                                                {Verb::answer, "26"}};
    const int k = assistant_turns(req["messages"]);
    const auto& c = script[std::min<std::size_t>(k, script.size() - 1)];
    return {200, MockChatServer::completion(tool_call_message(c, "Let me try.", "call_srv_" + std::to_string(k)), 7)};
}

RolloutPlan function_plan(const fs::path& out) {
    RolloutPlan plan;
    plan.tasks = {fixture_task("function-01")};
    plan.group_size = 8;
    plan.max_turns = 6;
    plan.seed = 100;
    plan.workers = 4;
    plan.out = out;
    return plan;
}

HttpPolicyClient client_for(const MockChatServer& server, double temperature = 1.0) {
    PolicyEndpoint ep;
    ep.chat.url = server.url();
    ep.chat.model = "mock";
    ep.temperature = temperature;
    return HttpPolicyClient(ep, net::RetryPolicy{2, std::chrono::milliseconds(1)});
}

TEST(EndToEnd, FunctionGroupCompletesPersistsAndDoesNotLeak) {
    MockChatServer server(function_policy);
    auto policy = client_for(server);
    ASSERT_TRUE(policy.healthy());
    const auto out = temp_dir("e2e");
    auto plan = function_plan(out);
    RolloutServices services;
    services.policy = &policy;
    auto runs = run_plan(plan, services);
    ASSERT_EQ(runs.size(), 1u);
    ASSERT_EQ(runs[0].group.trajectories.size(), 8u);
    for (std::size_t i = 0; i < 8; ++i) {
        const auto& t = runs[0].group.trajectories[i];
        EXPECT_EQ(t.trajectory_index, static_cast<int>(i));
        EXPECT_EQ(t.seed, 100 + i);
        EXPECT_EQ(t.terminated_reason, TrajectoryEnd::goal);
        EXPECT_EQ(t.rewards(), (std::vector<double>{0, 0, 1}));
        EXPECT_EQ(t.token_counts(), (std::vector<int>{7, 7, 7}));
    }
    const auto secrets = make_gym(plan.tasks[0])->secrets();
    for (const auto& tr : runs[0].transcripts) {
        EXPECT_TRUE(scan_for_leaks(tr.messages, secrets).empty());
        for (const auto& m : tr.messages) {
            if (m["role"] == "tool") {
                EXPECT_TRUE(m.contains("tool_call_id"));
                EXPECT_EQ(m["content"].get<std::string>().find("reward"), std::string::npos);
            }
        }
    }

    const auto result = persist_and_report(runs, plan);
    EXPECT_EQ(result.trajectory_records, 8u);
    EXPECT_EQ(result.advantage_records, 8u);
    for (const char* f : {"trajectories.jsonl", "transcripts.jsonl", "advantages.jsonl", "report.json", "report.txt"}) {
        EXPECT_TRUE(fs::exists(out / f)) << f;
    }
    EXPECT_EQ(read_jsonl(out / "trajectories.jsonl").size(), 8u);
    const auto adv = read_jsonl(out / "advantages.jsonl");
    ASSERT_EQ(adv.size(), 8u);
    for (const char* field : {"task_id", "trajectory_index", "turn_rewards", "shaped_rewards", "trajectory_score",
                              "per_turn_advantages", "token_counts"}) {
        EXPECT_TRUE(adv[0].contains(field)) << field;
    }
    // Identical trajectories: zero variance, zero advantages.
    for (const auto& a : adv) {
        for (double v : a["per_turn_advantages"]) EXPECT_EQ(v, 0.0);
        EXPECT_EQ(a["token_counts"], Json::array({7, 7, 7}));
    }

    // Every request carried the tool, sampling fields and the per-episode seed.
    std::set<std::uint64_t> seeds;
    for (const auto& req : server.requests()) {
        EXPECT_EQ(req["tool_choice"], "auto");
        EXPECT_EQ(req["temperature"], 1.0);
        EXPECT_EQ(req["tools"][0]["function"]["name"], "interact_with_env");
        seeds.insert(req["seed"].get<std::uint64_t>());
    }
    EXPECT_EQ(seeds.size(), 8u);

    // The persisted trajectories replay to the same rewards.
    const auto groups = load_groups(out / "trajectories.jsonl");
    ASSERT_EQ(groups.size(), 1u);
    for (const auto& t : groups[0].trajectories) {
        const auto r = replay_trajectory(t, plan.tasks[0], plan.env, RolloutServices{});
        EXPECT_TRUE(r.matches) << r.detail;
    }
    fs::remove_all(out);
}

TEST(EndToEnd, LeakScanFlagsSecretsInPolicyBoundMessages) {
    const Json messages = Json::array({{{"role", "system"}, {"content", "rules"}},
                                       {{"role", "assistant"}, {"content", "is it A+B+C+D?"}},
                                       {{"role", "tool"}, {"content", "The rule is A+B+C+D"}}});
    const auto hits = scan_for_leaks(messages, {"a+b+c+d"});
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_EQ(hits[0].rfind("2:", 0), 0u);
}

TEST(EndToEnd, MalformedReplyIsRepromptedOnce) {
    std::atomic<int> calls{0};
    MockChatServer server([&](const Json& req) -> MockChatServer::Response {
        const int n = calls++;
        if (n == 0) return {200, MockChatServer::completion({{"role", "assistant"}, {"content", "The answer is 26"}})};
        (void)req;
        return {200, MockChatServer::completion(tool_call_message({Verb::answer, "26"}, "", "c1"))};
    });
    auto policy = client_for(server);
    auto plan = function_plan(temp_dir("reprompt"));
    plan.group_size = 1;
    plan.workers = 1;
    RolloutServices services;
    services.policy = &policy;
    const auto ep = run_episode(plan, plan.tasks[0], 0, services);
    EXPECT_EQ(ep.trajectory.terminated_reason, TrajectoryEnd::goal);
    EXPECT_EQ(ep.transcript.parse_status, (std::vector<std::string>{"reprompted"}));
    EXPECT_TRUE(ep.trajectory.turns[0].token_count_estimated);
}

TEST(EndToEnd, TwoMalformedRepliesAbortAndAreExcludedFromExport) {
    MockChatServer server([](const Json&) -> MockChatServer::Response {
        return {200, MockChatServer::completion({{"role", "assistant"}, {"content", "no tool call"}})};
    });
    auto policy = client_for(server);
    auto plan = function_plan(temp_dir("abort"));
    plan.group_size = 2;
    RolloutServices services;
    services.policy = &policy;
    auto runs = run_plan(plan, services);
    for (const auto& t : runs[0].group.trajectories) {
        EXPECT_EQ(t.terminated_reason, TrajectoryEnd::aborted);
        EXPECT_NE(t.abort_detail.find("malformed"), std::string::npos);
    }
    std::vector<RolloutGroup> groups{runs[0].group};
    EXPECT_TRUE(export_advantages(groups, plan.shaping, false).records.empty());
    EXPECT_EQ(export_advantages(groups, plan.shaping, false).skipped.size(), 1u);
    EXPECT_EQ(export_advantages(groups, plan.shaping, true).records.size(), 2u);
}

TEST(EndToEnd, ServerErrorsAreRetriedThenAbort) {
    std::atomic<int> calls{0};
    MockChatServer flaky([&](const Json& req) -> MockChatServer::Response {
        if (calls++ % 3 < 2) return {503, Json{{"error", "busy"}}};
        return function_policy(req);
    });
    auto policy = client_for(flaky);
    auto plan = function_plan(temp_dir("retry"));
    RolloutServices services;
    services.policy = &policy;
    const auto ok = run_episode(plan, plan.tasks[0], 0, services);
    EXPECT_EQ(ok.trajectory.terminated_reason, TrajectoryEnd::goal);

    MockChatServer down([](const Json&) -> MockChatServer::Response { return {500, Json{{"error", "down"}}}; });
    auto bad = client_for(down);
    services.policy = &bad;
    const auto ep = run_episode(plan, plan.tasks[0], 0, services);
    EXPECT_EQ(ep.trajectory.terminated_reason, TrajectoryEnd::aborted);
    EXPECT_NE(ep.trajectory.abort_detail.find("policy endpoint"), std::string::npos);
    EXPECT_EQ(down.requests().size(), 3u);
}

TEST(EndToEnd, TurnCapIsMinOfMaxTurnsAndBudget) {
    auto policy = ScriptedPolicy::from_choices({{Verb::action, "1,1,1,1"}});
    auto plan = function_plan(temp_dir("cap"));
    plan.max_turns = 4;
    plan.env.max_steps = 10;
    RolloutServices services;
    services.policy = &policy;
    EXPECT_EQ(run_episode(plan, plan.tasks[0], 0, services).trajectory.turns.size(), 4u);
    plan.max_turns = 16;
    plan.env.max_steps = 3;
    const auto ep = run_episode(plan, plan.tasks[0], 0, services);
    EXPECT_EQ(ep.trajectory.turns.size(), 3u);
    EXPECT_EQ(ep.trajectory.terminated_reason, TrajectoryEnd::budget);
}

TEST(EndToEnd, UserPortFailureAborts) {
    auto policy = ScriptedPolicy::from_choices({{Verb::action, "Is it big?"}});
    auto plan = function_plan(temp_dir("userfail"));
    plan.tasks = {fixture_task("telepathy-01")};
    RolloutServices services;
    services.policy = &policy;
    services.users = [](const TaskSpec&, int) {
        return std::make_shared<FnUserPort>([](const usersim::UserQuery&) -> std::string {
            throw EndpointTimeout("simulator unreachable");
        });
    };
    const auto ep = run_episode(plan, plan.tasks[0], 0, services);
    EXPECT_EQ(ep.trajectory.terminated_reason, TrajectoryEnd::aborted);
    EXPECT_TRUE(ep.trajectory.turns.empty());
    EXPECT_NE(ep.trajectory.abort_detail.find("user simulator"), std::string::npos);
}

// Scripted policies replaying each golden session through the orchestrator.
std::vector<RolloutGroup> golden_rollouts(const std::string& gym) {
    std::vector<RolloutGroup> groups;
    for (const auto& g : golden_sessions(gym)) {
        auto policy = ScriptedPolicy::from_choices(g.choices);
        RolloutPlan plan;
        plan.tasks = {fixture_task(g.task_id)};
        plan.group_size = 1;
        plan.max_turns = static_cast<int>(g.choices.size());
        plan.workers = 1;
        RolloutServices services;
        services.policy = &policy;
        auto runs = run_plan(plan, services);
        groups.push_back(runs[0].group);
    }
    return groups;
}

TEST(Metrics, TableMetricEqualsMeanRewardSumForSumScoredGyms) {
    for (const std::string gym : {"turtle", "persuade", "intention"}) {
        const auto groups = golden_rollouts(gym);
        double total = 0.0;
        int n = 0;
        for (const auto& g : groups) {
            for (const auto& t : g.trajectories) {
                for (double r : t.rewards()) total += r;
                ++n;
            }
        }
        const auto report = compute_metrics(groups);
        ASSERT_EQ(report.per_gym.size(), 1u);
        EXPECT_NEAR(report.per_gym[0].score, total / n, 1e-12) << gym;
        EXPECT_NEAR(report.per_gym[0].reward_sum_mean, total / n, 1e-12) << gym;
    }
}

TEST(Metrics, RolloutRewardsMatchGoldenSessions) {
    for (const std::string gym : {"function", "telepathy", "turtle", "intention", "persuade", "travel", "search"}) {
        const auto sessions = golden_sessions(gym);
        const auto groups = golden_rollouts(gym);
        for (std::size_t i = 0; i < sessions.size(); ++i) {
            EXPECT_TRUE(close_all(groups[i].trajectories[0].rewards(), sessions[i].expected_rewards, 1e-12))
                << gym << " " << sessions[i].name;
        }
    }
}

TEST(Persist, AtomicWriteCreatesAllFiles) {
    const auto dir = temp_dir("atomic");
    write_files_atomically({{dir / "a.txt", "A"}, {dir / "b.txt", "B"}});
    std::ifstream a(dir / "a.txt"), b(dir / "b.txt");
    std::string sa, sb;
    a >> sa;
    b >> sb;
    EXPECT_EQ(sa + sb, "AB");
    for (const auto& e : fs::directory_iterator(dir)) EXPECT_EQ(e.path().extension() == ".tmp", false);
    fs::remove_all(dir);
}

TEST(Persist, SmallGroupsAreSkipped) {
    std::vector<RolloutGroup> groups(1);
    groups[0].task_id = "solo";
    groups[0].trajectories.resize(1);
    const auto e = export_advantages(groups, reward::ShapingSpec{}, true);
    EXPECT_TRUE(e.records.empty());
    ASSERT_EQ(e.skipped.size(), 1u);
}

TEST(Plan, Validation) {
    RolloutPlan plan;
    plan.tasks = {fixture_task("function-01")};
    EXPECT_NO_THROW(plan.validate());
    plan.group_size = 0;
    EXPECT_THROW(plan.validate(), std::invalid_argument);
    plan.group_size = 2;
    plan.max_turns = plan.env.max_steps + 1;
    EXPECT_THROW(plan.validate(), std::invalid_argument);
}

}  // namespace
