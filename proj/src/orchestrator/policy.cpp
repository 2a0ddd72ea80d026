#include "userl/orchestrator/policy.hpp"

#include "userl/core/errors.hpp"
#include "userl/core/text.hpp"
#include "userl/orchestrator/agent_prompt.hpp"

namespace userl::orchestrator {

HttpPolicyClient::HttpPolicyClient(PolicyEndpoint endpoint, net::RetryPolicy retry)
    : endpoint_(std::move(endpoint)), retry_(retry) {
    net::split_url(endpoint_.chat.url);
}

PolicyReply HttpPolicyClient::complete(const Json& messages, const Json& tools, const PolicyCall& call) {
    const Json body{{"model", endpoint_.chat.model},
                    {"messages", messages},
                    {"tools", tools},
                    {"tool_choice", "auto"},
                    {"temperature", call.temperature},
                    {"seed", call.seed},
                    {"max_tokens", call.max_tokens}};
    Json completion;
    try {
        completion = net::post_chat_completion(endpoint_.chat, body, retry_);
    } catch (const EndpointTimeout& e) {
        throw PolicyEndpointError(e.what());
    }
    const auto& choices = completion.value("choices", Json::array());
    if (!choices.is_array() || choices.empty() || !choices[0].contains("message")) {
        throw PolicyEndpointError("policy response has no choices[0].message");
    }
    PolicyReply reply;
    reply.message = choices[0]["message"];
    if (completion.contains("usage") && completion["usage"].is_object()) {
        const auto& usage = completion["usage"];
        if (usage.contains("completion_tokens") && usage["completion_tokens"].is_number_integer()) {
            reply.completion_tokens = usage["completion_tokens"].get<int>();
        }
    }
    return reply;
}

bool HttpPolicyClient::healthy() { return net::endpoint_reachable(endpoint_.chat); }

ScriptedPolicy::ScriptedPolicy(std::vector<Json> script) : script_(std::move(script)) {
    if (script_.empty()) throw std::invalid_argument("scripted policy needs at least one message");
}

ScriptedPolicy ScriptedPolicy::from_choices(const std::vector<StepChoice>& choices) {
    std::vector<Json> script;
    for (std::size_t i = 0; i < choices.size(); ++i) {
        script.push_back(tool_call_message(choices[i], "<think>Step " + std::to_string(i + 1) + ".</think>"));
    }
    return ScriptedPolicy(std::move(script));
}

PolicyReply ScriptedPolicy::complete(const Json& messages, const Json&, const PolicyCall&) {
    std::size_t k = 0;
    for (const auto& m : messages) k += m.value("role", "") == "assistant";
    PolicyReply reply;
    reply.message = script_[std::min(k, script_.size() - 1)];
    return reply;
}

Json tool_call_message(const StepChoice& choice, const std::string& thought, const std::string& call_id) {
    const Json args{{"choice", to_string(choice.verb)}, {"content", choice.content}};
    Json call{{"type", "function"}, {"function", {{"name", kToolName}, {"arguments", args.dump()}}}};
    if (!call_id.empty()) call["id"] = call_id;
    return Json{{"role", "assistant"}, {"content", thought}, {"tool_calls", Json::array({call})}};
}

namespace {

ParsedToolCall fail(std::string why) {
    ParsedToolCall p;
    p.error = std::move(why);
    return p;
}

ParsedToolCall from_call(const std::string& name, Json args, GymKind gym, std::string call_id) {
    if (name != kToolName) return fail("unknown tool '" + name + "'");
    if (args.is_string()) args = Json::parse(args.get<std::string>(), nullptr, false);
    if (!args.is_object()) return fail("tool arguments are not a JSON object");
    if (!args.contains("choice") || !args["choice"].is_string()) return fail("missing string field 'choice'");
    const auto verb_name = text::to_lower(text::trim(args["choice"].get<std::string>()));
    Verb verb;
    try {
        verb = parse_verb(verb_name);
    } catch (const std::exception&) {
        return fail("'choice' must be one of action, answer or search");
    }
    if (!verb_allowed(gym, verb)) return fail("choice '" + verb_name + "' is not available in this environment");
    if (!args.contains("content")) return fail("missing field 'content'");
    std::string content = args["content"].is_string() ? args["content"].get<std::string>() : args["content"].dump();
    if (text::trim(content).empty()) return fail("'content' is empty");
    ParsedToolCall p;
    p.choice = StepChoice{verb, std::move(content)};
    p.call_id = std::move(call_id);
    return p;
}

}  // namespace

ParsedToolCall parse_tool_call(const Json& message, GymKind gym) {
    if (!message.is_object()) return fail("assistant message is not an object");
    if (message.contains("tool_calls") && message["tool_calls"].is_array() && !message["tool_calls"].empty()) {
        const auto& calls = message["tool_calls"];
        if (calls.size() > 1) return fail("exactly one tool call per message is allowed");
        const auto& call = calls[0];
        if (!call.contains("function") || !call["function"].is_object()) return fail("tool call has no function");
        const auto& fn = call["function"];
        return from_call(fn.value("name", std::string{}), fn.value("arguments", Json()), gym,
                         call.value("id", std::string{}));
    }
    const std::string content = message.contains("content") && message["content"].is_string()
                                    ? message["content"].get<std::string>()
                                    : std::string{};
    static constexpr std::string_view open = "<tool_call>";
    static constexpr std::string_view close = "</tool_call>";
    const auto start = content.find(open);
    if (start == std::string::npos) return fail("no tool call found");
    const auto end = content.find(close, start);
    if (end == std::string::npos) return fail("unterminated <tool_call> block");
    if (content.find(open, end) != std::string::npos) return fail("exactly one tool call per message is allowed");
    const auto inner = Json::parse(content.substr(start + open.size(), end - start - open.size()), nullptr, false);
    if (!inner.is_object()) return fail("<tool_call> block is not a JSON object");
    return from_call(inner.value("name", std::string{}), inner.value("arguments", Json()), gym, {});
}

}  // namespace userl::orchestrator
