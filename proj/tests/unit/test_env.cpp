#include <gtest/gtest.h>

#include <random>

#include "support/fixtures.hpp"
#include "userl/core/errors.hpp"

using namespace userl;
using namespace userl::testing;

namespace {

TEST(Reset, FreshSession) {
    ScriptedSession s(fixture_task("function-01"), EnvConfig{});
    EXPECT_EQ(s.session->step_count(), 0);
    EXPECT_FALSE(s.session->terminated());
    EXPECT_FALSE(s.session->initial_observation().empty());
    EXPECT_EQ(s.session->initial_observation(), ScriptedSession(fixture_task("function-01"), EnvConfig{}).session->initial_observation());
}

TEST(Reset, PersuadeStartsAtStronglyAgree) {
    ScriptedSession s(fixture_task("persuade-01"), EnvConfig{});
    const Json state = s.session->gym_state();
    EXPECT_EQ(state["stance"], "Strongly Agree");
    EXPECT_EQ(state["stance_level"], 0);
}

TEST(Reset, MissingPayloadIsSchemaError) {
    for (const auto& base : fixture_tasks().tasks) {
        if (base.gym_kind == GymKind::tau_stub) continue;
        TaskSpec t = base;
        t.payload = Json::object();
        auto user = usersim::make_scripted_port(base);
        EXPECT_THROW(reset(t, EnvConfig{}, GymServices{user.get(), nullptr}), SchemaError) << base.task_id;
    }
}

TEST(Reset, BadConfigIsSchemaError) {
    EnvConfig c;
    c.max_steps = 0;
    EXPECT_THROW(ScriptedSession(fixture_task("function-01"), c), SchemaError);
    c = EnvConfig{};
    c.reward_scale = 0.0;
    EXPECT_THROW(ScriptedSession(fixture_task("function-01"), c), SchemaError);
    c = EnvConfig{};
    c.step_penalty = -0.1;
    EXPECT_THROW(ScriptedSession(fixture_task("function-01"), c), SchemaError);
}

TEST(Reset, MissingUserPortRejected) {
    EXPECT_THROW(reset(fixture_task("telepathy-01"), EnvConfig{}, GymServices{}), std::invalid_argument);
}

TEST(Step, VerbTableEnforced) {
    ScriptedSession p(fixture_task("persuade-01"), EnvConfig{});
    EXPECT_THROW(p.session->step({Verb::answer, "I win"}), VerbNotAllowed);
    EXPECT_THROW(p.session->step({Verb::search, "facts"}), VerbNotAllowed);
    EXPECT_EQ(p.session->step_count(), 0);
    ScriptedSession t(fixture_task("telepathy-01"), EnvConfig{});
    EXPECT_THROW(t.session->step({Verb::search, "x"}), VerbNotAllowed);
}

TEST(Step, CorrectTelepathyGuess) {
    ScriptedSession t(fixture_task("telepathy-01"), EnvConfig{});
    const auto out = t.session->step({Verb::answer, "Eiffel Tower"});
    EXPECT_EQ(out.raw_reward, 1.0);
    EXPECT_TRUE(out.done);
    EXPECT_THROW(t.session->step({Verb::answer, "Eiffel Tower"}), SessionTerminated);
    EXPECT_EQ(t.session->step_count(), 1);
}

TEST(Step, BudgetExhaustion) {
    EnvConfig c;
    c.max_steps = 3;
    ScriptedSession t(fixture_task("telepathy-01"), c);
    EXPECT_FALSE(t.session->step({Verb::action, "Is it in Asia?"}).done);
    EXPECT_FALSE(t.session->step({Verb::action, "Is it in Asia?"}).done);
    const auto last = t.session->step({Verb::action, "Is it in Europe?"});
    EXPECT_TRUE(last.done);
    EXPECT_EQ(t.session->termination_reason(), TerminationReason::budget);
    EXPECT_THROW(t.session->step({Verb::action, "x"}), SessionTerminated);
    EXPECT_EQ(t.session->step_count(), 3);
}

TEST(Postprocess, Examples) {
    EnvConfig c;
    EXPECT_EQ(postprocess_reward(0.7, c, 1), 0.7);
    c.step_penalty = 0.1;
    EXPECT_DOUBLE_EQ(postprocess_reward(1.0, c, 1), 0.9);
    c = EnvConfig{};
    c.normalize_to_unit = true;
    EXPECT_EQ(postprocess_reward(1.5, c, 1), 1.0);
    c.step_penalty = 0.3;
    EXPECT_EQ(postprocess_reward(0.1, c, 2), 0.0);
}

TEST(Postprocess, Properties) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> raw(-3, 3), scale(0.01, 5), pen(0, 2);
    for (int i = 0; i < 2000; ++i) {
        const double r = raw(rng);
        EXPECT_EQ(postprocess_reward(r, EnvConfig{}, 1 + i % 20), r);
        EnvConfig c;
        c.reward_scale = scale(rng);
        c.step_penalty = pen(rng);
        EXPECT_EQ(postprocess_reward(r, c, 1), r * c.reward_scale - c.step_penalty);
        c.normalize_to_unit = true;
        const double v = postprocess_reward(r, c, 1);
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(Step, PenaltyAppliesOnEveryTurn) {
    EnvConfig c;
    c.step_penalty = 0.05;
    ScriptedSession t(fixture_task("telepathy-01"), c);
    const auto miss = t.session->step({Verb::action, "Is it in Asia?"});
    EXPECT_EQ(miss.raw_reward, 0.0);
    EXPECT_DOUBLE_EQ(miss.reward, -0.05);
    const auto hit = t.session->step({Verb::answer, "Eiffel Tower"});
    EXPECT_EQ(hit.raw_reward, 1.0);
    EXPECT_DOUBLE_EQ(hit.reward, 0.95);
}

TEST(Session, StepCountNeverExceedsBudgetAndHistoryRoundTrips) {
    std::mt19937 rng(5);
    for (const auto& task : fixture_tasks().tasks) {
        if (task.gym_kind == GymKind::tau_stub) continue;
        EnvConfig c;
        c.max_steps = 6;
        ScriptedSession s(task, c);
        const auto verbs = allowed_verbs(task.gym_kind);
        const std::vector<std::string> contents{"1, 2, 3, 4", "Is it in Europe?", "test case", "42", "hello", "0"};
        while (!s.session->terminated()) {
            const StepChoice ch{verbs[rng() % verbs.size()], contents[rng() % contents.size()]};
            try {
                s.session->step(ch);
            } catch (const InvalidChoice&) {
            } catch (const ReplyParseError&) {
            }
            ASSERT_LE(s.session->step_count(), c.max_steps);
            ASSERT_EQ(static_cast<std::size_t>(s.session->step_count()), s.session->history().size());
        }
        const auto h = s.session->history();
        EXPECT_EQ(history_from_json(Json::parse(history_to_json(h).dump())), h) << task.task_id;
    }
}

TEST(Session, UserFailureLeavesSessionUnchanged) {
    const auto task = fixture_task("telepathy-01");
    bool fail = true;
    FnUserPort port([&](const usersim::UserQuery& q) -> std::string {
        if (fail) throw EndpointTimeout("down");
        return std::string("{\"response\":\"Yes\"}") + (q.agent_input.empty() ? "" : "");
    });
    auto s = reset(task, EnvConfig{}, GymServices{&port, nullptr});
    const Json before = s.gym_state();
    EXPECT_THROW(s.step({Verb::action, "Is it big?"}), UserPortFailure);
    EXPECT_EQ(s.step_count(), 0);
    EXPECT_EQ(s.gym_state(), before);
    fail = false;
    EXPECT_NO_THROW(s.step({Verb::action, "Is it big?"}));
    EXPECT_EQ(s.step_count(), 1);
}

}  // namespace
