#pragma once

#include <string>

#include "userl/env/types.hpp"

namespace userl::orchestrator {

inline constexpr const char* kToolName = "interact_with_env";

/// The `interact_with_env` tool definition in chat-completions `tools` form.
const Json& interact_tool_schema();

/// The gym-specific pieces substituted into the agent system prompt.
struct GymPromptParts {
    std::string environment_description;
    std::string action_description;  // one "* `verb`: ..." bullet per allowed verb
    std::string goal_reminder;
    std::string interaction_hint;
};

const GymPromptParts& gym_prompt_parts(GymKind gym);

/// Agent system prompt for a gym; identical for every task of that gym.
std::string agent_system_prompt(GymKind gym);

/// Sent after a reply without a usable tool call.
std::string format_reminder(GymKind gym, const std::string& problem);

}  // namespace userl::orchestrator
