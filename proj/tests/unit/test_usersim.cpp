#include <gtest/gtest.h>

#include <random>

#include "support/fixtures.hpp"
#include "support/mock_chat.hpp"
#include "userl/core/errors.hpp"
#include "userl/usersim/llm_user.hpp"
#include "userl/usersim/prompt.hpp"
#include "userl/usersim/reply_parser.hpp"
#include "userl/usersim/scripted_user.hpp"

using namespace userl;
using namespace userl::usersim;
using namespace userl::testing;

namespace {

const ReplySchema& yes_no_maybe() { return templates::telepathy_question().reply_schema; }

TEST(Render, TelepathyTemplateCarriesEntity) {
    const auto text = render_prompt(templates::telepathy_question(), {{"target_entity", "Eiffel Tower"}, {"entity_description", "a landmark"}});
    EXPECT_NE(text.find("Eiffel Tower"), std::string::npos);
    EXPECT_EQ(text.find("{{"), std::string::npos);
}

TEST(Render, ExtraBindingsAreIgnored) {
    const auto& t = templates::telepathy_question();
    EXPECT_EQ(render_prompt(t, {{"target_entity", "X"}, {"entity_description", "D"}, {"unused", "Y"}}),
              render_prompt(t, {{"target_entity", "X"}, {"entity_description", "D"}}));
}

TEST(Render, MissingPlaceholderNamesEveryGap) {
    try {
        render_prompt(templates::telepathy_question(), {{"entity_description", "D"}});
        FAIL() << "expected MissingPlaceholder";
    } catch (const MissingPlaceholder& e) {
        EXPECT_EQ(e.names(), std::vector<std::string>{"target_entity"});
    }
    try {
        render("{{a}} and {{b}} and {{a}}", {{"b", "1"}, {"z", "2"}});
        FAIL();
    } catch (const MissingPlaceholder& e) {
        EXPECT_EQ(e.names(), std::vector<std::string>{"a"});
    }
}

TEST(Render, SinglePassSubstitution) {
    EXPECT_EQ(render("{{a}}-{{b}}", {{"a", "{{b}}"}, {"b", "x"}}), "{{b}}-x");
    EXPECT_EQ(placeholders("{{x}} {{y}} {{x}}"), (std::vector<std::string>{"x", "y"}));
}

TEST(Render, EveryTemplateRendersWhenAllPlaceholdersBound) {
    for (const auto* t : templates::all()) {
        Bindings b;
        for (const auto& name : placeholders(t->system_text)) b[name] = "VALUE_" + name;
        const auto text = render_prompt(*t, b);
        EXPECT_EQ(text.find("{{"), std::string::npos) << t->id;
        EXPECT_FALSE(t->reply_schema.fields.empty()) << t->id;
    }
}

TEST(ReplyParser, FencedBlock) {
    const auto j = parse_structured_reply("```json\n{\"thought\":\"hmm\",\"response\":\"Yes\"}\n```", yes_no_maybe());
    EXPECT_EQ(j, (Json{{"response", "Yes"}}));
}

TEST(ReplyParser, BraceFallbackWithCaseFold) {
    const auto j = parse_structured_reply("Well, let me think.\n{\"response\":\"maybe\"} trailing", yes_no_maybe());
    EXPECT_EQ(j, (Json{{"response", "Maybe"}}));
}

TEST(ReplyParser, EnumViolationNamesField) {
    try {
        parse_structured_reply("{\"response\":\"Perhaps\"}", yes_no_maybe());
        FAIL();
    } catch (const SchemaViolation& e) {
        EXPECT_EQ(e.field(), "response");
    }
    EXPECT_THROW(parse_structured_reply("{\"thought\":\"x\"}", yes_no_maybe()), SchemaViolation);
    EXPECT_THROW(parse_structured_reply("Yes.", yes_no_maybe()), NoStructuredContent);
    EXPECT_THROW(parse_structured_reply("{\"response\": ", yes_no_maybe()), ReplyParseError);
}

TEST(ReplyParser, NoFuzzyMatching) {
    EXPECT_THROW(parse_structured_reply("{\"response\":\"Yes.\"}", yes_no_maybe()), SchemaViolation);
    EXPECT_THROW(parse_structured_reply("{\"response\":\"yess\"}", yes_no_maybe()), SchemaViolation);
}

TEST(ReplyParser, IdempotentOnRenderedOutput) {
    std::mt19937 rng(7);
    const std::vector<std::string> prose{"", "Sure.\n", "thinking...\n\n"};
    for (const auto* t : templates::all()) {
        for (int trial = 0; trial < 50; ++trial) {
            Json fields = Json::object();
            for (const auto& f : t->reply_schema.fields) {
                switch (f.kind) {
                case FieldKind::enumeration: {
                    auto label = f.labels[rng() % f.labels.size()];
                    if (rng() % 2) std::transform(label.begin(), label.end(), label.begin(), ::tolower);
                    fields[f.name] = label;
                    break;
                }
                case FieldKind::number: fields[f.name] = static_cast<double>(rng() % 100) / 10.0; break;
                case FieldKind::boolean: fields[f.name] = rng() % 2 == 0; break;
                case FieldKind::integer_list: fields[f.name] = Json::array({rng() % 5, rng() % 5}); break;
                case FieldKind::array: fields[f.name] = Json::array({"a", 1}); break;
                case FieldKind::string: fields[f.name] = "text " + std::to_string(rng() % 1000); break;
                }
            }
            fields["thought"] = "ignored";
            const auto raw = prose[trial % prose.size()] + render_fenced(fields);
            const auto once = parse_structured_reply(raw, t->reply_schema);
            const auto twice = parse_structured_reply(render_fenced(once), t->reply_schema);
            EXPECT_EQ(once, twice) << t->id;
            EXPECT_FALSE(once.contains("thought"));
        }
    }
}

TEST(ScriptedUser, TableLookupAndDefaults) {
    const auto task = fixture_task("telepathy-01");
    auto port = make_scripted_port(task);
    const auto reply = query_user(*port, GymKind::telepathy, UserRole::responder, "sys",
                                  {{"user", "Is it in Europe?"}}, "Is it in Europe?", &yes_no_maybe());
    EXPECT_EQ(parse_structured_reply(reply, yes_no_maybe()), (Json{{"response", "Yes"}}));
    // Canonicalization: case and surrounding whitespace do not matter.
    EXPECT_EQ(query_user(*port, GymKind::telepathy, UserRole::responder, "sys", {{"user", "x"}}, "  is IT in europe? "),
              reply);
}

TEST(ScriptedUser, JudgeCallsAreDeterministic) {
    for (const auto& task : fixture_tasks().tasks) {
        auto port = make_scripted_port(task);
        for (const std::string input : {"Eiffel Tower", "something else", ""}) {
            const auto a = query_user(*port, task.gym_kind, UserRole::judge, "sys", {{"user", input}}, input);
            const auto b = query_user(*port, task.gym_kind, UserRole::judge, "sys", {{"user", input}}, input);
            EXPECT_EQ(a, b) << task.task_id;
        }
    }
}

TEST(ScriptedUser, RuleOrderAndVerbFilter) {
    const auto user = ScriptedUser::from_json(Json::parse(R"({
        "rules": [{"role": "judge", "verb": "answer", "contains": "paris", "reply": "A"},
                  {"role": "judge", "any": true, "reply": "B"}],
        "defaults": {"responder": "R"}})"));
    EXPECT_EQ(user.reply_for(UserRole::judge, Verb::answer, "It is Paris"), "A");
    EXPECT_EQ(user.reply_for(UserRole::judge, Verb::action, "It is Paris"), "B");
    EXPECT_EQ(user.reply_for(UserRole::responder, Verb::action, "anything"), "R");
}

TEST(JudgeWithRetry, RetryContract) {
    const auto& schema = yes_no_maybe();
    UserQuery q;
    q.gym = GymKind::telepathy;
    q.role = UserRole::judge;
    q.conversation = {{"user", "Is it big?"}};

    std::vector<std::string> replies{"no json here", "{\"response\":\"No\"}"};
    FnUserPort port([&](const UserQuery& query) { return replies[std::min<std::size_t>(query.conversation.size() - 1, 1)]; });
    const auto r = judge_with_retry(port, q, schema);
    EXPECT_EQ(r.fields, (Json{{"response", "No"}}));
    EXPECT_EQ(r.retry_count, 1);
    ASSERT_EQ(port.queries.size(), 2u);
    EXPECT_GT(port.queries[1].conversation.size(), port.queries[0].conversation.size());

    FnUserPort bad([](const UserQuery&) { return std::string("{\"response\":\"Perhaps\"}"); });
    EXPECT_THROW(judge_with_retry(bad, q, schema), SchemaViolation);
    EXPECT_EQ(bad.calls, 2);

    FnUserPort good([](const UserQuery&) { return std::string("{\"response\":\"Yes\"}"); });
    EXPECT_EQ(judge_with_retry(good, q, schema).retry_count, 0);
    EXPECT_EQ(good.calls, 1);
}

TEST(Temperatures, RoleDefaults) {
    for (GymKind g : kAllGyms) {
        EXPECT_EQ(default_temperature(g, UserRole::judge), 0.0);
        EXPECT_EQ(default_temperature(g, UserRole::responder), g == GymKind::intention ? 0.7 : 0.0);
    }
}

TEST(LlmUserPort, JudgeRequestsUseTemperatureZero) {
    MockChatServer server([](const Json&) -> MockChatServer::Response {
        return {200, MockChatServer::completion({{"role", "assistant"}, {"content", "{\"judgment\":\"Yes\"}"}})};
    });
    LlmUserPort port(net::RetryPolicy{0, std::chrono::milliseconds(1)});
    for (const auto& b : parse_role_bindings(server.url(), "sim")) port.bind(b);
    EXPECT_TRUE(port.bound(GymKind::telepathy, UserRole::judge));

    const auto reply = query_user(port, GymKind::telepathy, UserRole::judge, "judge system", {{"user", "Eiffel"}});
    EXPECT_EQ(reply, "{\"judgment\":\"Yes\"}");
    query_user(port, GymKind::intention, UserRole::responder, "responder system", {{"user", "hi"}});

    const auto log = port.request_log();
    ASSERT_EQ(log.size(), 2u);
    EXPECT_EQ(log[0].role, UserRole::judge);
    EXPECT_EQ(log[0].temperature, 0.0);
    EXPECT_EQ(log[1].temperature, 0.7);
    const auto reqs = server.requests();
    ASSERT_EQ(reqs.size(), 2u);
    EXPECT_EQ(reqs[0]["temperature"], 0.0);
    EXPECT_EQ(reqs[0]["model"], "sim");
    EXPECT_EQ(reqs[0]["messages"][0]["role"], "system");
    EXPECT_EQ(reqs[0]["messages"][0]["content"], "judge system");
}

TEST(LlmUserPort, UnreachableEndpointIsAUserPortFailure) {
    LlmUserPort port(net::RetryPolicy{1, std::chrono::milliseconds(1)});
    net::ChatEndpoint ep;
    ep.url = "http://127.0.0.1:1/v1";
    ep.timeout = std::chrono::milliseconds(200);
    port.bind({std::nullopt, UserRole::judge, ep});
    EXPECT_THROW(query_user(port, GymKind::telepathy, UserRole::judge, "s", {{"user", "x"}}), UserPortFailure);
}

TEST(LlmUserPort, RoleBindingSpecificity) {
    const auto bindings = parse_role_bindings("responder=http://a/v1,judge=http://b/v1,telepathy.judge=http://c/v1");
    LlmUserPort port;
    for (const auto& b : bindings) port.bind(b);
    EXPECT_EQ(port.endpoint_for(GymKind::telepathy, UserRole::judge).url, "http://c/v1");
    EXPECT_EQ(port.endpoint_for(GymKind::search, UserRole::judge).url, "http://b/v1");
    EXPECT_EQ(port.endpoint_for(GymKind::turtle, UserRole::responder).url, "http://a/v1");
}

}  // namespace
