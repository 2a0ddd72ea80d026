#include <cctype>
#include <algorithm>
#include <set>

#include "payload.hpp"
#include "userl/core/text.hpp"
#include "userl/gyms/gyms.hpp"
#include "userl/usersim/prompt.hpp"

namespace userl::gyms {

namespace {

constexpr const char* kGym = "travel";

OptionLabel parse_label(const std::string& s) {
    const auto l = text::to_lower(s);
    if (l == "best") return OptionLabel::best;
    if (l == "correct") return OptionLabel::correct;
    if (l == "wrong") return OptionLabel::wrong;
    if (l == "noise") return OptionLabel::noise;
    throw SchemaError("travel option label must be best, correct, wrong or noise");
}

std::string_view label_name(OptionLabel l) {
    switch (l) {
        case OptionLabel::best: return "best";
        case OptionLabel::correct: return "correct";
        case OptionLabel::wrong: return "wrong";
        case OptionLabel::noise: return "noise";
    }
    return "noise";
}

bool contains_word(const std::string& haystack, const std::string& word) {
    std::size_t pos = 0;
    while ((pos = haystack.find(word, pos)) != std::string::npos) {
        const bool left = pos == 0 || !std::isalnum(static_cast<unsigned char>(haystack[pos - 1]));
        const std::size_t end = pos + word.size();
        const bool right = end >= haystack.size() || !std::isalnum(static_cast<unsigned char>(haystack[end]));
        if (left && right) return true;
        pos = end;
    }
    return false;
}

}  // namespace

double travel_type_reward(int type) {
    switch (type) {
        case 1: return 0.0;
        case 2: return 0.2;
        case 3: return 0.0;
        case 4: return 0.0;
        default: throw std::out_of_range("travel utterance type must be 1..4");
    }
}

TravelGym::TravelGym(const TaskSpec& task) {
    const Json& p = task.payload;
    state_.scenario = detail::require_string(p, "scenario", kGym);
    if (p.contains("wrong_penalty")) {
        if (!p["wrong_penalty"].is_number() || p["wrong_penalty"].get<double>() < 0.0) {
            throw SchemaError("travel 'wrong_penalty' must be a non-negative number");
        }
        state_.wrong_penalty = p["wrong_penalty"].get<double>();
    }
    const Json& dims = detail::require(p, "dimensions", kGym);
    if (!dims.is_array() || dims.empty()) throw SchemaError("travel payload 'dimensions' must be a non-empty list");
    std::set<std::string> ids;
    std::set<std::string> names;
    for (const auto& d : dims) {
        TravelDimension dim;
        dim.name = text::to_lower(detail::require_string(d, "name", kGym));
        dim.preference = detail::require_string(d, "preference", kGym);
        if (!names.insert(dim.name).second) throw SchemaError("duplicate travel dimension '" + dim.name + "'");
        const Json& opts = detail::require(d, "options", kGym);
        if (!opts.is_array() || opts.empty()) throw SchemaError("travel dimension needs options");
        int best = 0;
        for (const auto& o : opts) {
            TravelOption opt;
            opt.id = detail::require_string(o, "id", kGym);
            opt.description = detail::require_string(o, "description", kGym);
            opt.label = parse_label(detail::require_string(o, "label", kGym));
            if (!ids.insert(text::to_lower(opt.id)).second) throw SchemaError("duplicate travel option id " + opt.id);
            best += opt.label == OptionLabel::best;
            dim.options.push_back(std::move(opt));
        }
        if (best != 1) throw SchemaError("travel dimension '" + dim.name + "' must have exactly one best option");
        state_.dimensions.push_back(std::move(dim));
    }
}

std::string TravelGym::initial_observation() const {
    std::string dims;
    for (const auto& d : state_.dimensions) dims += (dims.empty() ? "" : ", ") + d.name;
    return state_.scenario + "\nTrip dimensions to arrange: " + dims +
           ".\nUse `action` to talk with the traveler about their preferences, `search` with a dimension name to "
           "list available options, and `answer` with an option id to book it.";
}

GymReply TravelGym::step(const StepChoice& choice, const GymServices& services, const EnvConfig&) {
    if (choice.verb == Verb::search) return search(choice);
    if (choice.verb == Verb::answer) return answer(choice);

    using namespace usersim;
    UserPort& port = detail::require_user(services, kGym);
    std::string prefs;
    for (const auto& d : state_.dimensions) prefs += "- " + d.name + ": " + d.preference + "\n";
    const auto& tmpl = templates::travel_utterance();
    UserQuery q;
    q.gym = GymKind::travel;
    q.role = UserRole::responder;
    q.verb = choice.verb;
    q.system = render_prompt(tmpl, {{"scenario", state_.scenario}, {"preferences", prefs}});
    q.conversation = detail::dialogue(state_.conversation, choice.content);
    q.agent_input = choice.content;
    JudgeResult r;
    try {
        r = judge_with_retry(port, std::move(q), tmpl.reply_schema);
    } catch (const ReplyParseError& e) {
        throw MalformedUserReply(std::string("travel user: ") + e.what());
    }
    const int type = std::stoi(r.fields["type"].get<std::string>());
    GymReply reply;
    reply.observation = r.fields["response"].get<std::string>();
    reply.raw_reward = travel_type_reward(type);
    reply.info["type"] = type;
    if (type == 2 && r.fields.contains("dimension")) {
        const auto dim_name = text::canonicalize(r.fields["dimension"].get<std::string>());
        for (auto& d : state_.dimensions) {
            if (d.name == dim_name) {
                d.preference_elicited = true;
                reply.info["dimension"] = d.name;
            }
        }
    }
    state_.conversation.emplace_back(choice.content, reply.observation);
    return reply;
}

GymReply TravelGym::search(const StepChoice& choice) {
    GymReply reply;
    ++state_.search_attempt_count;
    reply.info["search_attempt"] = state_.search_attempt_count;
    if (state_.search_attempt_count % kTravelErrorPeriod == 0) {
        reply.observation = "System error: the search service is temporarily unavailable. Please try again.";
        reply.info["system_error"] = true;
        return reply;
    }
    const auto query = text::canonicalize(choice.content);
    for (const auto& d : state_.dimensions) {
        if (!contains_word(query, d.name)) continue;
        std::string list = "Available " + d.name + " options:";
        for (const auto& o : d.options) list += "\n- " + o.id + ": " + o.description;
        reply.observation = std::move(list);
        reply.raw_reward = 0.2;
        reply.info["dimension"] = d.name;
        return reply;
    }
    std::string dims;
    for (const auto& d : state_.dimensions) dims += (dims.empty() ? "" : ", ") + d.name;
    reply.observation = "Unknown dimension. Search for one of: " + dims + ".";
    reply.info["unknown_dimension"] = true;
    return reply;
}

GymReply TravelGym::answer(const StepChoice& choice) {
    GymReply reply;
    const auto wanted = text::to_lower(text::trim(choice.content));
    for (auto& d : state_.dimensions) {
        for (const auto& o : d.options) {
            if (text::to_lower(o.id) != wanted) continue;
            reply.info["dimension"] = d.name;
            reply.info["label"] = std::string(label_name(o.label));
            if (d.chosen) {
                reply.observation = "The " + d.name + " is already booked.";
            } else if (o.label == OptionLabel::best) {
                d.chosen = true;
                reply.raw_reward = 1.0;
                reply.observation = "Great choice! " + o.id + " is exactly what the traveler wanted.";
            } else if (o.label == OptionLabel::correct) {
                reply.raw_reward = d.correct_rewarded ? 0.0 : 0.8;
                d.correct_rewarded = true;
                reply.observation = o.id + " works for the traveler, but there may be a better fit.";
            } else {
                reply.raw_reward = -state_.wrong_penalty;
                reply.observation = "The traveler is not happy with " + o.id + ".";
            }
            reply.goal_reached = std::all_of(state_.dimensions.begin(), state_.dimensions.end(),
                                             [](const TravelDimension& x) { return x.chosen; });
            return reply;
        }
    }
    reply.observation = "Unknown option id. Answer with one option id returned by a search.";
    reply.info["unknown_option"] = true;
    return reply;
}

Json TravelGym::state() const {
    Json dims = Json::array();
    for (const auto& d : state_.dimensions) {
        dims.push_back({{"name", d.name},
                        {"preference_elicited", d.preference_elicited},
                        {"chosen", d.chosen},
                        {"correct_rewarded", d.correct_rewarded}});
    }
    return Json{{"scenario", state_.scenario},
                {"dimensions", dims},
                {"search_attempt_count", state_.search_attempt_count}};
}

std::vector<std::string> TravelGym::secrets() const {
    std::vector<std::string> out;
    for (const auto& d : state_.dimensions) out.push_back(d.preference);
    return out;
}

double TravelGym::task_metric(std::span<const double>) const {
    double total = 0.0;
    for (const auto& d : state_.dimensions) total += d.chosen ? 1.0 : (d.correct_rewarded ? 0.8 : 0.0);
    return total / static_cast<double>(state_.dimensions.size());
}

}  // namespace userl::gyms
