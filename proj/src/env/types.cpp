#include "userl/env/types.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

#include "userl/core/errors.hpp"

namespace userl {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

constexpr std::array kActionOnly{Verb::action};
constexpr std::array kActionAnswer{Verb::action, Verb::answer};
constexpr std::array kSearchAnswer{Verb::search, Verb::answer};
constexpr std::array kAll{Verb::action, Verb::search, Verb::answer};

}  // namespace

std::string_view to_string(GymKind kind) {
    switch (kind) {
        case GymKind::function: return "function";
        case GymKind::telepathy: return "telepathy";
        case GymKind::turtle: return "turtle";
        case GymKind::intention: return "intention";
        case GymKind::persuade: return "persuade";
        case GymKind::travel: return "travel";
        case GymKind::search: return "search";
        case GymKind::tau_stub: return "tau";
    }
    return "unknown";
}

std::string_view to_string(Verb verb) {
    switch (verb) {
        case Verb::action: return "action";
        case Verb::search: return "search";
        case Verb::answer: return "answer";
    }
    return "unknown";
}

GymKind parse_gym_kind(std::string_view name) {
    std::string n = lower(name);
    if (n.size() > 3 && n.ends_with("gym")) n.resize(n.size() - 3);
    if (n == "intent") n = "intention";
    if (n == "tau_stub") n = "tau";
    for (GymKind k : kAllGyms) {
        if (to_string(k) == n) return k;
    }
    throw SchemaError("unknown gym kind '" + std::string(name) + "'");
}

Verb parse_verb(std::string_view name) {
    const std::string n = lower(name);
    if (n == "action") return Verb::action;
    if (n == "search") return Verb::search;
    if (n == "answer") return Verb::answer;
    throw InvalidChoice("unknown verb '" + std::string(name) + "'");
}

std::span<const Verb> allowed_verbs(GymKind kind) {
    switch (kind) {
        case GymKind::intention:
        case GymKind::persuade: return kActionOnly;
        case GymKind::turtle:
        case GymKind::telepathy: return kActionAnswer;
        case GymKind::search: return kSearchAnswer;
        case GymKind::function:
        case GymKind::travel:
        case GymKind::tau_stub: return kAll;
    }
    return {};
}

bool verb_allowed(GymKind kind, Verb verb) {
    const auto verbs = allowed_verbs(kind);
    return std::find(verbs.begin(), verbs.end(), verb) != verbs.end();
}

void EnvConfig::validate() const {
    if (max_steps < 1) throw SchemaError("max_steps must be >= 1");
    if (!(reward_scale > 0.0) || !std::isfinite(reward_scale))
        throw SchemaError("reward_scale must be a finite value > 0");
    if (!(step_penalty >= 0.0) || !std::isfinite(step_penalty))
        throw SchemaError("step_penalty must be a finite value >= 0");
    if (!std::isfinite(success_threshold)) throw SchemaError("success_threshold must be finite");
}

void to_json(Json& j, const TaskSpec& t) {
    j = Json{{"task_id", t.task_id},
             {"gym", to_string(t.gym_kind)},
             {"payload", t.payload},
             {"metadata", t.metadata}};
}

void from_json(const Json& j, TaskSpec& t) {
    if (!j.is_object()) throw SchemaError("task record must be a JSON object");
    if (!j.contains("task_id") || !j["task_id"].is_string() || j["task_id"].get<std::string>().empty())
        throw SchemaError("task record needs a non-empty string 'task_id'");
    if (!j.contains("gym") || !j["gym"].is_string()) throw SchemaError("task record needs a string 'gym'");
    t.task_id = j["task_id"].get<std::string>();
    t.gym_kind = parse_gym_kind(j["gym"].get<std::string>());
    t.payload = j.value("payload", Json::object());
    t.metadata = j.value("metadata", Json::object());
}

void to_json(Json& j, const StepChoice& c) {
    j = Json{{"verb", to_string(c.verb)}, {"content", c.content}};
}

void from_json(const Json& j, StepChoice& c) {
    c.verb = parse_verb(j.at("verb").get<std::string>());
    c.content = j.at("content").get<std::string>();
}

void to_json(Json& j, const StepOutcome& o) {
    j = Json{{"observation", o.observation},
             {"raw_reward", o.raw_reward},
             {"reward", o.reward},
             {"done", o.done},
             {"info", o.info}};
}

void from_json(const Json& j, StepOutcome& o) {
    o.observation = j.at("observation").get<std::string>();
    o.raw_reward = j.at("raw_reward").get<double>();
    o.reward = j.at("reward").get<double>();
    o.done = j.at("done").get<bool>();
    o.info = j.value("info", Json::object());
}

void to_json(Json& j, const EnvConfig& c) {
    j = Json{{"max_steps", c.max_steps},
             {"reward_scale", c.reward_scale},
             {"step_penalty", c.step_penalty},
             {"normalize_to_unit", c.normalize_to_unit},
             {"success_threshold", c.success_threshold}};
}

void from_json(const Json& j, EnvConfig& c) {
    c.max_steps = j.value("max_steps", c.max_steps);
    c.reward_scale = j.value("reward_scale", c.reward_scale);
    c.step_penalty = j.value("step_penalty", c.step_penalty);
    c.normalize_to_unit = j.value("normalize_to_unit", c.normalize_to_unit);
    c.success_threshold = j.value("success_threshold", c.success_threshold);
}

}  // namespace userl
