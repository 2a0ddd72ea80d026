#include "userl/orchestrator/agent_prompt.hpp"

#include <map>

#include "userl/usersim/prompt.hpp"

namespace userl::orchestrator {

const Json& interact_tool_schema() {
    static const Json schema = {
        {"type", "function"},
        {"function",
         {{"name", kToolName},
          {"description",
           "A tool for interact with a target environment. The detailed environment description and action space "
           "is provided in the system prompt, so please follow the system prompt when calling this tool. You can use "
           "this tool to interact with the target environment step by step."},
          {"parameters",
           {{"type", "object"},
            {"properties",
             {{"choice",
               {{"type", "string"},
                {"enum", Json::array({"action", "answer", "search"})},
                {"description",
                 "Your choice of what to do next, must be one of action, answer or search. Please follow system "
                 "prompt about the scope of choices you can make and how to decide your choice."}}},
              {"content",
               {{"type", "string"},
                {"description",
                 "The content of your choice, must be a string. If you choose action, you should provide the action "
                 "you want to take. If you choose answer, you should provide the answer that you want to submit. If "
                 "you choose search, you should provide the search query. The specific format of the content is "
                 "determined by the environment description in the system prompt. Please follow the format strictly "
                 "in order to successfully use this tool."}}}}},
            {"required", Json::array({"choice", "content"})}}}}}};
    return schema;
}

namespace {

const char* kAgentTemplate = R"TXT(## Task
You are an agent that actively interact with a specific environment. The following are the details of the environment and your action space.

## Environment Description
{{environment_description}}

## Action Space
You should call the tool `interact_with_env` to interact with the environment. The action should be one of the following: `search`, `action`, or `answer`.

## Action Description
{{action_description}}

## Important Notes
* In each step of interaction, first write your thoughts and analysis between <think> and </think> to carefully decide your next step. Only after providing this reasoning should you call the `interact_with_env` tool to interact with the environment. Always present your reasoning before making the tool call.
* The total number of rounds that you can interact with the environment is limited. You should smartly {{goal_reminder}}, so that you can fulfill the user's request in the most efficient way.
* Usually you should {{interaction_hint}}.
* Be bold, creative and smart in your interaction with the environment! Let's begin!)TXT";

std::map<GymKind, GymPromptParts> build_parts() {
    std::map<GymKind, GymPromptParts> m;
    m[GymKind::function] = {
        "FunctionGym hides a mathematical function f(a, b, c, d) that maps four numbers to one number. You can probe "
        "the function with inputs of your choice, look up the test case you must solve, and then submit the value of "
        "the function on that test case.",
        "* `action`: If you choose `action`, provide four numbers separated by commas in the `content` field (e.g. "
        "`1, 2, 3, 4`). The environment returns the function's value on these inputs.\n"
        "* `search`: If you choose `search`, write `test case` in the `content` field. The environment returns the "
        "four inputs you need to solve.\n"
        "* `answer`: If you choose `answer`, provide a single number in the `content` field: the function's value "
        "on the test case. You only succeed with the exact value.",
        "probe the function with informative inputs and infer the hidden rule",
        "try several simple inputs with `action`, retrieve the test case with `search`, and then compute and submit "
        "the result with `answer`"};
    m[GymKind::telepathy] = {
        "TelepathyGym is a guessing game. The user is thinking of a specific entity and only answers yes/no questions "
        "about it with Yes, No or Maybe. You need to figure out the entity and name it.",
        "* `action`: If you choose `action`, ask the user one yes/no question about the entity in the `content` "
        "field.\n"
        "* `answer`: If you choose `answer`, give your final guess of the entity in the `content` field.",
        "narrow down the space of candidates with each question",
        "start with broad questions, split the remaining candidates roughly in half each time, and only answer once "
        "you are confident"};
    m[GymKind::turtle] = {
        "TurtleGym is a lateral thinking puzzle. You are shown a short, puzzling story (the surface); a hidden story "
        "(the bottom) explains what really happened. The user knows the hidden story and answers your yes/no "
        "questions with Yes, No or Maybe.",
        "* `action`: If you choose `action`, ask the user one yes/no question about the story in the `content` "
        "field.\n"
        "* `answer`: If you choose `answer`, write your full explanation of what really happened in the `content` "
        "field. Each explanation is scored against the key points of the hidden story.",
        "uncover the key facts of the hidden story",
        "ask targeted questions that test one hypothesis at a time and submit an explanation once the main facts are "
        "clear"};
    m[GymKind::intention] = {
        "IntentionGym presents a vague request from a user. Important details of what the user really needs are "
        "missing, and you need to uncover them by talking with the user.",
        "* `action`: If you choose `action`, ask the user a clarifying question in the `content` field. Ask about "
        "one specific missing aspect at a time.",
        "ask the questions that reveal the most important missing details",
        "ask focused, specific questions about requirements, constraints and preferences rather than generic ones"};
    m[GymKind::persuade] = {
        "PersuadeGym is a debate. The user strongly agrees with a statement and has an argument for it. You need to "
        "persuade the user to change their mind and disagree with the statement.",
        "* `action`: If you choose `action`, present your argument to the user in the `content` field. The user will "
        "reply and may change their stance.",
        "choose arguments that move the user's stance the furthest",
        "address the user's own reasoning directly with evidence, examples and logical points instead of repeating "
        "yourself"};
    m[GymKind::travel] = {
        "TravelGym is a travel planning task. The traveler needs several parts of a trip arranged (for example a "
        "flight or a hotel) and has hidden preferences for each part. You need to learn the preferences, look up the "
        "options and book the best option for every part.",
        "* `action`: If you choose `action`, talk with the traveler in the `content` field, for example to ask about "
        "their preferences.\n"
        "* `search`: If you choose `search`, write the name of one trip part in the `content` field (e.g. `hotel`). "
        "The environment returns the available options with their ids. The search service sometimes fails; simply "
        "search again.\n"
        "* `answer`: If you choose `answer`, write the id of one option in the `content` field to book it.",
        "elicit the traveler's preferences and book the options that fit them best",
        "ask about preferences for each part of the trip, search the options, and book the one that matches the "
        "preferences"};
    m[GymKind::search] = {
        "SearchGym is a question answering task. You are given a question and can search the web to find the "
        "information needed to answer it.",
        "* `search`: If you choose `search`, write a search query in the `content` field. The environment returns "
        "the titles and snippets of the top results.\n"
        "* `answer`: If you choose `answer`, write your final answer in the `content` field. Keep it short: just "
        "the answer, not a sentence.",
        "plan your searches to collect the needed facts",
        "break multi-hop questions into simple searches and answer as soon as you have the facts"};
    m[GymKind::tau_stub] = {
        "TauGym is an environment where you need to interact with both the user and internal tools to fulfill the "
        "user's request. You should thoroughly understand the user's goal, figure out what information is needed, and "
        "get this information through querying the user or leveraging the internal tool step by step.",
        "* `search`: If you choose `search`, you must specify either 'tools' or 'help' in the `content` field. Giving "
        "'tools' will return a list of internal tools, including their descriptions and required arguments, which you "
        "can later call through choosing `answer`. Giving 'help' will return a general guidance on how to interact "
        "with the environment effectively.\n"
        "* `action`: If you choose `action`, you will communicate directly with the user through the message you "
        "write in the `content` field. Ask clear and specific questions to gather the information needed to fulfill "
        "the user's request. Keep in mind that the user may not have all the necessary details, so you might need to "
        "both request additional user input and call internal tools step by step to reach the goal.\n"
        "* `answer`: If you choose `answer`, you must provide an internal tool call in the `content` field, with the "
        "tool name and its arguments in JSON format (e.g. `{\"name\": tool_name, \"arguments\": {\"arg_1\": "
        "\"value_1\", \"arg_2\": \"value_2\"}}`).",
        "collect the information and take the actions the user's request needs",
        "first search for the tools and help, then talk with the user and call tools step by step"};
    return m;
}

}  // namespace

const GymPromptParts& gym_prompt_parts(GymKind gym) {
    static const auto parts = build_parts();
    return parts.at(gym);
}

std::string agent_system_prompt(GymKind gym) {
    const auto& p = gym_prompt_parts(gym);
    return usersim::render(kAgentTemplate, {{"environment_description", p.environment_description},
                                            {"action_description", p.action_description},
                                            {"goal_reminder", p.goal_reminder},
                                            {"interaction_hint", p.interaction_hint}});
}

std::string format_reminder(GymKind gym, const std::string& problem) {
    std::string verbs;
    for (Verb v : allowed_verbs(gym)) verbs += (verbs.empty() ? "" : ", ") + std::string(to_string(v));
    return "Your last message could not be used: " + problem +
           ". Think between <think> and </think>, then call the `interact_with_env` tool exactly once with `choice` "
           "set to one of [" + verbs + "] and a non-empty `content`.";
}

}  // namespace userl::orchestrator
