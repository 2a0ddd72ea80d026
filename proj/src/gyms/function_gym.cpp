#include <cmath>

#include "payload.hpp"
#include "userl/core/text.hpp"
#include "userl/gyms/gyms.hpp"

namespace userl::gyms {

namespace {

constexpr const char* kGym = "function";

std::string tuple_text(const std::array<double, 4>& v) {
    std::string out = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += text::format_number(v[i]);
    }
    return out + ")";
}

}  // namespace

FunctionGym::FunctionGym(const TaskSpec& task) {
    const Json& p = task.payload;
    state_.hidden_rule = Expression::parse(detail::require_string(p, "rule", kGym));
    const Json& tc = detail::require(p, "test_case", kGym);
    if (!tc.is_array() || tc.size() != 4) throw SchemaError("function payload 'test_case' must hold 4 numbers");
    for (std::size_t i = 0; i < 4; ++i) {
        if (!tc[i].is_number()) throw SchemaError("function payload 'test_case' must hold 4 numbers");
        state_.test_case[i] = tc[i].get<double>();
    }
    const double computed = state_.hidden_rule.evaluate(state_.test_case);
    if (!std::isfinite(computed)) throw SchemaError("function rule is undefined on the test case");
    if (p.contains("expected")) {
        if (!p["expected"].is_number()) throw SchemaError("function payload 'expected' must be a number");
        state_.expected = p["expected"].get<double>();
        if (std::fabs(state_.expected - computed) > kFunctionTolerance) {
            throw SchemaError("function payload 'expected' disagrees with the rule applied to the test case");
        }
    } else {
        state_.expected = computed;
    }
    description_ = detail::optional_string(p, "description");
}

std::string FunctionGym::initial_observation() const {
    std::string obs =
        "I have a hidden rule that maps four numbers to a single number. Use `action` with four numbers "
        "(e.g. \"1, 2, 3, 4\") to see what the rule returns for them, `search` to retrieve the test case, and "
        "`answer` with the rule's value on the test case.";
    if (!description_.empty()) obs += "\n" + description_;
    return obs;
}

GymReply FunctionGym::step(const StepChoice& choice, const GymServices&, const EnvConfig&) {
    GymReply reply;
    switch (choice.verb) {
        case Verb::action: {
            const auto parts = text::split_list(choice.content);
            std::array<double, 4> args{};
            bool ok = parts.size() == 4;
            for (std::size_t i = 0; ok && i < 4; ++i) {
                auto v = text::parse_number(parts[i]);
                ok = v.has_value();
                if (ok) args[i] = *v;
            }
            if (!ok) {
                reply.observation =
                    "Could not parse the input. Provide exactly four numbers separated by commas, e.g. \"1, 2, 3, 4\".";
                reply.info["parse_error"] = true;
                return reply;
            }
            const double out = state_.hidden_rule.evaluate(args);
            reply.observation = std::isfinite(out) ? text::format_number(out) : "undefined";
            reply.info["input"] = args;
            return reply;
        }
        case Verb::search:
            reply.observation = tuple_text(state_.test_case);
            return reply;
        case Verb::answer: {
            auto value = text::parse_number(choice.content);
            if (!value) {
                reply.observation = "Could not parse the answer. Provide a single number.";
                reply.info["parse_error"] = true;
                return reply;
            }
            if (std::fabs(*value - state_.expected) <= kFunctionTolerance) {
                state_.answered = true;
                reply.raw_reward = 1.0;
                reply.goal_reached = true;
                reply.observation = "Correct! Your answer matches the test case result.";
            } else {
                reply.observation = "Incorrect. Your answer does not match the test case result.";
            }
            reply.info["correct"] = state_.answered;
            return reply;
        }
    }
    return reply;
}

Json FunctionGym::state() const {
    return Json{{"hidden_rule", state_.hidden_rule.source()},
                {"test_case", state_.test_case},
                {"expected", state_.expected},
                {"answered", state_.answered}};
}

std::vector<std::string> FunctionGym::secrets() const { return {state_.hidden_rule.source()}; }

double FunctionGym::task_metric(std::span<const double>) const { return state_.answered ? 1.0 : 0.0; }

}  // namespace userl::gyms
