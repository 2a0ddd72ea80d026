#include <gtest/gtest.h>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <future>
#include <thread>

#include "support/fixtures.hpp"
#include "userl/bridge/hub.hpp"
#include "userl/bridge/protocol.hpp"
#include "userl/bridge/server.hpp"
#include "userl/core/errors.hpp"
#include "userl/usersim/prompt.hpp"

using namespace userl;
using namespace userl::bridge;
using namespace userl::testing;
using namespace std::chrono_literals;

namespace {

const usersim::ReplySchema& yes_no_maybe() { return usersim::templates::telepathy_question().reply_schema; }
const usersim::ReplySchema& judge_schema() { return usersim::templates::telepathy_guess().reply_schema; }

usersim::UserQuery question(const std::string& text, const usersim::ReplySchema* schema = &yes_no_maybe()) {
    usersim::UserQuery q;
    q.gym = GymKind::telepathy;
    q.agent_input = text;
    q.conversation = {{"user", text}};
    q.schema = schema;
    return q;
}

TEST(Protocol, RoundTripEveryMessageType) {
    const std::vector<Json> messages{
        session_start("s1", GymKind::telepathy, "telepathy-01", "Eiffel Tower"),
        agent_turn(1, Verb::action, "responder", "Is it in Europe?", &yes_no_maybe()),
        human_reply_content("yes"),
        human_reply_choice("Yes"),
        human_reply_fields(Json{{"response", "No"}}),
        turn_reward(1, 0.5),
        session_end(Json{{"reward_sum", 1.0}}, "completed"),
        error_message("bad_reply", "empty"),
    };
    for (const auto& m : messages) {
        const auto line = encode(m);
        EXPECT_EQ(line.back(), '\n');
        EXPECT_EQ(std::count(line.begin(), line.end(), '\n'), 1);
        EXPECT_EQ(decode(line), m);
    }
}

TEST(Protocol, RejectsMalformedLines) {
    EXPECT_THROW(decode("not json"), ProtocolError);
    EXPECT_THROW(decode("[1,2]"), ProtocolError);
    EXPECT_THROW(decode(R"({"type":"mystery"})"), ProtocolError);
    EXPECT_THROW(decode(R"({"type":"agent_turn","turn_index":1,"verb":"dance","content":"x"})"), std::exception);
    EXPECT_THROW(decode(R"({"type":"agent_turn","turn_index":"1","verb":"action","content":"x"})"), ProtocolError);
    EXPECT_THROW(decode(R"({"type":"human_reply"})"), ProtocolError);
    EXPECT_THROW(decode(R"({"type":"human_reply","enum_choice":3})"), ProtocolError);
    EXPECT_THROW(decode(R"({"type":"turn_reward"})"), ProtocolError);
    EXPECT_THROW(decode(R"({"type":"session_end","metrics":{}})"), ProtocolError);
    EXPECT_THROW(decode("{\"type\":\"turn_reward\",\n\"value\":1}"), ProtocolError);
}

TEST(Protocol, AgentTurnCarriesReplySchema) {
    const auto m = agent_turn(2, Verb::answer, "judge", "Eiffel Tower", &judge_schema());
    EXPECT_EQ(m["reply_schema"]["fields"][0]["name"], "judgment");
    EXPECT_EQ(m["reply_schema"]["fields"][0]["kind"], "enum");
    EXPECT_EQ(m["reply_schema"]["fields"][0]["labels"], Json::array({"Yes", "No"}));
}

TEST(Protocol, ReplyToFields) {
    EXPECT_EQ(reply_to_fields(human_reply_choice("Yes"), yes_no_maybe()), (Json{{"response", "Yes"}}));
    EXPECT_EQ(reply_to_fields(human_reply_choice("yes"), yes_no_maybe()), (Json{{"response", "Yes"}}));
    EXPECT_EQ(reply_to_fields(human_reply_content("maybe"), yes_no_maybe()), (Json{{"response", "Maybe"}}));
    EXPECT_THROW(reply_to_fields(human_reply_choice("Perhaps"), yes_no_maybe()), SchemaViolation);
    EXPECT_THROW(reply_to_fields(human_reply_content("   "), yes_no_maybe()), SchemaViolation);
    const auto judged = reply_to_fields(human_reply_fields(Json{{"judgment", "No"}, {"feedback", "close"}}), judge_schema());
    EXPECT_EQ(judged["judgment"], "No");
    EXPECT_EQ(judged["feedback"], "close");
    EXPECT_EQ(reply_to_fields(human_reply_choice("Yes"), judge_schema())["judgment"], "Yes");
}

struct Capture {
    std::mutex m;
    std::condition_variable cv;
    std::vector<Json> lines;

    HumanBridgeHub::Sink sink() {
        return [this](const std::string& line) {
            std::lock_guard lock(m);
            lines.push_back(decode(line));
            cv.notify_all();
        };
    }
    Json wait_for(const std::string& type, std::size_t nth = 0) {
        std::unique_lock lock(m);
        Json found;
        cv.wait_for(lock, 5s, [&] {
            std::size_t seen = 0;
            for (const auto& l : lines) {
                if (l["type"] == type && seen++ == nth) {
                    found = l;
                    return true;
                }
            }
            return false;
        });
        return found;
    }
};

TEST(Hub, AskBlocksUntilReply) {
    HumanBridgeHub hub(5s);
    const auto id = hub.open_session(fixture_task("telepathy-01"), "Eiffel Tower", "s1");
    Capture cap;
    ASSERT_TRUE(hub.attach(id, cap.sink()));
    EXPECT_EQ(cap.wait_for("session_start")["ground_truth"], "Eiffel Tower");

    auto reply = std::async(std::launch::async, [&] { return hub.ask(id, question("Is it in Europe?")); });
    const auto turn = cap.wait_for("agent_turn");
    EXPECT_EQ(turn["content"], "Is it in Europe?");
    EXPECT_EQ(turn["turn_index"], 1);
    hub.deliver(id, encode(human_reply_choice("Yes")));
    const auto raw = reply.get();
    EXPECT_EQ(usersim::parse_structured_reply(raw, yes_no_maybe()), (Json{{"response", "Yes"}}));
}

TEST(Hub, TimeoutRaisesHumanTimeout) {
    HumanBridgeHub hub(50ms);
    const auto id = hub.open_session(fixture_task("telepathy-01"), "Eiffel Tower");
    EXPECT_THROW(hub.ask(id, question("Is it big?")), HumanTimeout);
}

TEST(Hub, BadRepliesGetErrorsAndPromptStaysPending) {
    HumanBridgeHub hub(5s);
    const auto id = hub.open_session(fixture_task("telepathy-01"), "Eiffel Tower", "s2");
    Capture cap;
    hub.attach(id, cap.sink());
    hub.deliver(id, encode(human_reply_choice("Yes")));  // nothing pending
    EXPECT_FALSE(cap.wait_for("error").is_null());
    auto reply = std::async(std::launch::async, [&] { return hub.ask(id, question("Is it big?")); });
    cap.wait_for("agent_turn");
    hub.deliver(id, "garbage");
    hub.deliver(id, encode(human_reply_choice("Perhaps")));
    EXPECT_FALSE(cap.wait_for("error", 2).is_null());
    hub.deliver(id, encode(human_reply_choice("No")));
    EXPECT_EQ(usersim::parse_structured_reply(reply.get(), yes_no_maybe())["response"], "No");
}

TEST(Hub, RejoinReplaysHistoryIncludingPendingPrompt) {
    HumanBridgeHub hub(5s);
    const auto id = hub.open_session(fixture_task("telepathy-01"), "Eiffel Tower", "s3");
    Capture first;
    const auto token = hub.attach(id, first.sink());
    auto reply = std::async(std::launch::async, [&] { return hub.ask(id, question("Is it tall?")); });
    first.wait_for("agent_turn");
    hub.detach(id, *token);

    Capture second;
    hub.attach(id, second.sink());
    EXPECT_FALSE(second.wait_for("session_start").is_null());
    EXPECT_EQ(second.wait_for("agent_turn")["content"], "Is it tall?");
    hub.deliver(id, encode(human_reply_content("yes")));
    EXPECT_EQ(usersim::parse_structured_reply(reply.get(), yes_no_maybe())["response"], "Yes");
    EXPECT_FALSE(hub.attach("nope", second.sink()).has_value());
}

// A human at a browser, reduced to a WebSocket client with a fixed script.
std::vector<Json> play_as_human(unsigned short port, const std::string& id) {
    namespace beast = boost::beast;
    namespace asio = boost::asio;
    asio::io_context ioc;
    asio::ip::tcp::resolver resolver(ioc);
    beast::websocket::stream<asio::ip::tcp::socket> ws(ioc);
    asio::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws.handshake("127.0.0.1:" + std::to_string(port), "/session/" + id);

    std::vector<Json> received;
    beast::flat_buffer buffer;
    for (;;) {
        ws.read(buffer);
        const auto line = beast::buffers_to_string(buffer.data());
        buffer.consume(buffer.size());
        const auto msg = decode(line);
        received.push_back(msg);
        if (msg["type"] == "agent_turn") {
            const bool judging = msg["role"] == "judge";
            const auto answer = judging ? human_reply_fields(Json{{"judgment", "Yes"}, {"feedback", "Got it!"}})
                                        : human_reply_choice(received.size() % 2 ? "Yes" : "No");
            ws.write(asio::buffer(encode(answer)));
        }
        if (msg["type"] == "session_end") break;
    }
    ws.close(beast::websocket::close_code::normal);
    return received;
}

TEST(BridgeServer, FullTelepathySessionOverWebSocket) {
    HumanBridgeHub hub(10s);
    BridgeServer server(hub, "127.0.0.1", 0);
    server.start();
    ASSERT_NE(server.port(), 0);

    auto policy = orchestrator::ScriptedPolicy::from_choices({{Verb::action, "Is it man-made?"},
                                                              {Verb::action, "Is it in Europe?"},
                                                              {Verb::action, "Is it a tower?"},
                                                              {Verb::answer, "Eiffel Tower"}});
    orchestrator::RolloutPlan plan;
    plan.tasks = {fixture_task("telepathy-01")};
    plan.group_size = 1;
    plan.workers = 1;
    orchestrator::RolloutServices services;
    services.policy = &policy;
    services.users = [&hub](const TaskSpec& task, int index) -> std::shared_ptr<usersim::UserPort> {
        const auto id = hub.open_session(task, "Eiffel Tower", "human-" + std::to_string(index));
        return std::make_shared<HumanUserPort>(hub, id);
    };

    auto human = std::async(std::launch::async, [&] {
        for (int i = 0; i < 500 && !hub.has_session("human-0"); ++i) std::this_thread::sleep_for(10ms);
        return play_as_human(server.port(), "human-0");
    });
    const auto ep = orchestrator::run_episode(plan, plan.tasks[0], 0, services);
    const auto received = human.get();
    server.stop();

    EXPECT_EQ(ep.trajectory.terminated_reason, orchestrator::TrajectoryEnd::goal);
    ASSERT_EQ(ep.trajectory.turns.size(), 4u);
    EXPECT_EQ(ep.trajectory.rewards(), (std::vector<double>{0, 0, 0, 1}));

    ASSERT_FALSE(received.empty());
    EXPECT_EQ(received.front()["type"], "session_start");
    EXPECT_EQ(received.front()["gym"], "telepathy");
    int turns = 0, rewards = 0;
    for (const auto& m : received) {
        EXPECT_NO_THROW(validate(m));
        turns += m["type"] == "agent_turn";
        rewards += m["type"] == "turn_reward";
    }
    EXPECT_EQ(turns, 4);
    EXPECT_EQ(rewards, 4);
    EXPECT_EQ(received.back()["type"], "session_end");
    EXPECT_EQ(received.back()["status"], "goal");
    EXPECT_TRUE(received.back()["metrics"].is_object());

    for (const auto& m : hub.message_log("human-0")) EXPECT_NO_THROW(validate(m));
}

}  // namespace
