#include "userl/usersim/prompt.hpp"

#include <algorithm>

#include "userl/core/errors.hpp"

namespace userl::usersim {

namespace {

constexpr std::string_view kOpen = "{{";
constexpr std::string_view kClose = "}}";

}  // namespace

std::vector<std::string> placeholders(std::string_view text) {
    std::vector<std::string> names;
    std::size_t pos = 0;
    while ((pos = text.find(kOpen, pos)) != std::string_view::npos) {
        const auto end = text.find(kClose, pos + kOpen.size());
        if (end == std::string_view::npos) break;
        std::string name(text.substr(pos + kOpen.size(), end - pos - kOpen.size()));
        if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(std::move(name));
        pos = end + kClose.size();
    }
    return names;
}

std::string render(std::string_view text, const Bindings& bindings) {
    std::vector<std::string> missing;
    for (const auto& name : placeholders(text)) {
        if (bindings.find(name) == bindings.end()) missing.push_back(name);
    }
    if (!missing.empty()) throw MissingPlaceholder(std::move(missing));

    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (true) {
        const auto open = text.find(kOpen, pos);
        const auto end = open == std::string_view::npos ? open : text.find(kClose, open + kOpen.size());
        if (open == std::string_view::npos || end == std::string_view::npos) {
            out.append(text.substr(pos));
            break;
        }
        out.append(text.substr(pos, open - pos));
        const auto name = text.substr(open + kOpen.size(), end - open - kOpen.size());
        out.append(bindings.find(name)->second);
        pos = end + kClose.size();
    }
    return out;
}

std::string render_prompt(const PromptTemplate& tmpl, const Bindings& bindings) {
    return render(tmpl.system_text, bindings);
}

namespace templates {

namespace {

const std::vector<std::string> kYesNoMaybe{"Yes", "No", "Maybe"};
const std::vector<std::string> kYesNo{"Yes", "No"};

}  // namespace

const PromptTemplate& intention_response() {
    static const PromptTemplate t{
        "intention.response", GymKind::intention, UserRole::responder,
        R"TXT(You are a person who has posted a vague request for help and is now responding to someone who is trying to help clarify your needs.

Your job is to respond naturally as the person who originally made the request. Follow these guidelines:

1. If the question is asking about your specific preferences for this task:
- Provide an authentic and coherent response
- Share realistic preferences that someone might have for this type of task
- Be conversational and natural

2. If the question is NOT directly about your preferences for this task:
- Try to answer helpfully if you can
- Guide the conversation back to clarifying what you need for your task
- Be polite but redirect: "That's interesting, but what I'm really trying to figure out is..."
- Do NOT provide what missing details need to be clarified or give any examples.
- Do NOT provide concrete help or solutions - you're the one seeking help!

Please respond in the following json format:
{
    "thought": "Your thought process about whether the question is about your preferences and how to respond",
    "response": "Your natural conversational response"
}

IMPORTANT:
- Respond only as the person seeking help, not as an evaluator
- Be natural and conversational
- Don't reveal any "ground truth" or act like you know what details are missing
- Just respond authentically as someone who made this request

## Your Original Request
{{vague_task}})TXT",
        {{{"response", FieldKind::string, {}, true}}}};
    return t;
}

const PromptTemplate& intention_coverage() {
    static const PromptTemplate t{
        "intention.coverage", GymKind::intention, UserRole::judge,
        R"TXT(You are evaluating how well a user's question addresses missing details in a vague task.

Your job is to evaluate which (if any) of the missing details are addressed by the latest question.

Rules for evaluation:
- If the question is NOT related to clarifying the user's intent or task requirements, covered_detail_indices should be an empty list
- For each missing detail that is directly addressed by the question, note its index
- A question "addresses" a detail if it would help reveal the information needed for that detail

Please respond in the following json format:
{
    "analysis": "Brief explanation of what missing details (if any) were covered by this question",
    "is_task_related": true/false (whether the question is about clarifying the task requirements),
    "covered_detail_indices": [list of indices from the missing details list that this question addresses]
}

IMPORTANT: You are ONLY evaluating, not generating responses. Focus solely on which details are addressed.

## Vague Task
{{vague_task}}

## Remaining Missing Details (index. [importance] detail; importance 1=Low, 2=Medium, 3=High)
{{missing_details}})TXT",
        {{{"is_task_related", FieldKind::boolean, {}, false},
          {"covered_detail_indices", FieldKind::integer_list, {}, true}}}};
    return t;
}

const PromptTemplate& persuade_stance() {
    static const PromptTemplate t{
        "persuade.stance", GymKind::persuade, UserRole::responder,
        R"TXT(## Task
You are participating in a persuasion conversation. You hold a position on a statement, and someone is trying to persuade you to change your mind. For each of their arguments, you should:

1. Respond naturally and thoughtfully to their argument
2. Express your current stance after considering their point
3. You may change your mind if presented with compelling evidence
4. Be respectful but critical - point out logical fallacies if you see them

Follow the format strictly:
```json
{
    "thought": "Your internal reasoning about their argument",
    "response": "Your public response to their argument (max 200 tokens)",
    "stance": "One of: Strongly Agree, Agree, Partly Agree, Neutral, Partly Disagree, Disagree, Strongly Disagree"
}
```

## Statement
{{statement}}

## Your Initial Argument
{{initial_argument}}

## Your Current Stance
{{current_stance}})TXT",
        {{{"response", FieldKind::string, {}, true},
          {"stance",
           FieldKind::enumeration,
           {"Strongly Agree", "Agree", "Partly Agree", "Neutral", "Partly Disagree", "Disagree",
            "Strongly Disagree"},
           true}}}};
    return t;
}

const PromptTemplate& turtle_inquiry() {
    static const PromptTemplate t{
        "turtle.inquiry", GymKind::turtle, UserRole::responder,
        R"TXT(## Task
You are a helpful assistant to respond to the user query based on the given story scenario (surface) and ground truth (bottom) in a Turtle Soup game. Please follow the instructions below.

## Instructions
1. You can only give three values: "Yes", "No", or "Maybe" in your response.
2. "Yes" means the user's query or stated scenario is completely correct according (or aligned) to the ground truth (bottom) of the story.
3. "No" means the user's query is incorrect or contradicts the ground truth (bottom) of the story, or the user's query is not even close to the ground truth.
4. "Maybe" means the user's query can be correct or incorrect, it is hard to tell and not clearly stated in both the bottom and the surface of this story. "Maybe" is usually used when the user's query is not quite relevant to the ground truth. Please try to be determinant and use as less "Maybe" in your response as possible.

## Example Format

### Your Response
```json
{
    "thought": "Your thought about how to evaluate the user's query, and justify the response you give.",
    "response": "Yes" or "No" or "Maybe"
}
```

## Surface
{{surface}}

## Bottom
{{bottom}})TXT",
        {{{"response", FieldKind::enumeration, kYesNoMaybe, true}}}};
    return t;
}

const PromptTemplate& turtle_scoring() {
    static const PromptTemplate t{
        "turtle.scoring", GymKind::turtle, UserRole::judge,
        R"TXT(## Task
You are a helpful agent to help me evaluate the correctness of the user's story against the ground truth in a Turtle Soup game. You should give both your score and evaluation feedback based on a evaluation protocol provided. Please follow the instructions below.

## Instructions
1. There may exist multiple evaluation criteria based on the evaluation protocol. You should give a score for each criteria.
2. Your score can only take three values: 0, 0.5, 1.0, where 0 means the user's answer is completely incorrect (not even close to the ground truth), 0.5 means the user's answer partially aligns with the ground truth, and 1.0 means the user's answer is completely correct.
3. After giving the score, you should give an overall feedback about which part in the user's answer is correct (or the story is all wrong and totally not aligned). Do not say which part is incorrect or not aligned with the ground truth. Do not release anything else about the ground truth (bottom) or the evaluation protocol. Try to keep your feedback concise and to the point.

## Example Format

### Your Response
```json
{
    "scores":[
        {
            "statement": "Copy the exact statement from the evaluation protocol.",
            "thought": "Your thought about how to evaluate the statement, and justify the score you will give based on the protocol statement and comparison between the ground truth and user's answer.",
            "score": 0 or 0.5 or 1.0
        },
    ... (the number of scores should be the same as the number of criteria in the evaluation protocol, and the order should also exactly match)
    ],
    "feedback": "Your feedback to the user's answer about which part is correct. Do not release anything about the ground truth (bottom) and the evaluation protocol. Be concise and to the point. Use the second person tone (you / your) to address the user."
}
```

## Surface
{{surface}}

## Bottom
{{bottom}}

## Evaluation Protocol
{{criteria}})TXT",
        {{{"scores", FieldKind::array, {}, true}, {"feedback", FieldKind::string, {}, false}}}};
    return t;
}

const PromptTemplate& telepathy_question() {
    static const PromptTemplate t{
        "telepathy.question", GymKind::telepathy, UserRole::responder,
        R"TXT(## Task
You are a telepathic entity playing a mind reading game. The user is trying to guess what entity you are thinking of by asking yes/no questions. You should respond honestly based on the target entity you're thinking of.

## Instructions
1. You are thinking of a specific entity (person, object, concept, etc.) - this is the "target_entity" provided to you.
2. The user will ask questions to narrow down what you're thinking of.
3. Answer "Yes" if the question is true about your target entity.
4. Answer "No" if the question is false about your target entity.
5. Answer "Maybe" only if the question is ambiguous or you genuinely cannot determine a clear yes/no answer.
6. Be helpful and honest - the goal is for them to eventually guess correctly through good questions.

## Example Format

### Your Response
```json
{
    "thought": "Your reasoning about how the user's question relates to the target entity.",
    "response": "Yes" or "No" or "Maybe"
}
```

## target_entity
{{target_entity}}

## Entity Description
{{entity_description}})TXT",
        {{{"response", FieldKind::enumeration, kYesNoMaybe, true}}}};
    return t;
}

const PromptTemplate& telepathy_guess() {
    static const PromptTemplate t{
        "telepathy.guess", GymKind::telepathy, UserRole::judge,
        R"TXT(## Task
You are a telepathic entity playing a mind reading game. The user is trying to guess what entity you are thinking of based on the clues you've given through your "Yes" or "No" responses to their questions. You need to evaluate if their final guess is correct.

## Instructions
1. You are thinking of a specific entity (person, object, concept, etc.) - this is the "target_entity" provided to you.
2. The user has been asking questions about this entity and is now making a final guess.
3. You should evaluate if their guess correctly identifies the target entity you were thinking of.
4. Only return "Yes" if their guess is exactly correct or a clearly equivalent/synonymous identification of the target entity.
5. Return "No" if their guess is wrong, partially correct, or close but not exact.
6. There is NO partial credit - it's either completely right (Yes) or wrong (No).
7. Address the user in second person tone (e.g., "You", "Your", "You're") in your feedback.
8. Your feedback should be concise and do not release anything about the target entity. Just state your judgment and encourage or congratulate the user.

## Example Format

### Your Response
```json
{
    "thought": "Your reasoning about whether the user's guess matches the target entity you were thinking of.",
    "judgment": "Yes" or "No",
    "feedback": "Brief feedback explaining why their guess is correct or incorrect. Do not reveal the correct answer if they are wrong."
}
```

## target_entity
{{target_entity}})TXT",
        {{{"judgment", FieldKind::enumeration, kYesNo, true}, {"feedback", FieldKind::string, {}, false}}}};
    return t;
}

const PromptTemplate& search_answer() {
    static const PromptTemplate t{
        "search.answer", GymKind::search, UserRole::judge,
        R"TXT(## Task
You are asked to judge whether the answer for a question is correct or not.

## Instructions
1. You will be provided with the question, the model's answer, and the correct answer.
2. If the answer is exactly the same, or a clearly equivalent/synonymous identification of the correct answer, return "Yes". Please base your answer judgment on the given question scenario, instead of just comparing the answers.
3. If the answer is wrong, return "No".
4. In your feedback, you could provide a succinct explanation for your judgment, but you should never reveal the correct answer.
5. In your feedback, please use second person tone (e.g., "You", "Your", "You're").
6. In your feedback please do not give any hint or any information about the correct answer.

## Example Format

### Your Response
```json
{
    "reasoning": "Your reasoning about whether the answer is correct or incorrect.",
    "judgment": "Yes" or "No",
    "feedback": "Brief feedback explaining why the answer is correct or incorrect. Do not reveal the correct answer if they are wrong."
}
```

## Question
{{question}}

## Correct Answer
{{gold_answer}})TXT",
        {{{"judgment", FieldKind::enumeration, kYesNo, true}, {"feedback", FieldKind::string, {}, false}}}};
    return t;
}

const PromptTemplate& travel_utterance() {
    static const PromptTemplate t{
        "travel.utterance", GymKind::travel, UserRole::responder,
        R"TXT(## Task
You are a traveler planning a trip with the help of a travel agent. You have hidden preferences for each part of the trip. Classify the agent's latest message and reply as the traveler.

## Message Types
1. Normal conversation: greetings, small talk, or statements that do not ask about your preferences.
2. Preference-related: the agent asks about a preference you actually hold for one of the trip dimensions.
3. Unavailable preference: the agent asks about a preference you do not have.
4. Too vague: the agent asks something so broad that you cannot tell what preference is meant.

## Instructions
- For type 2, reveal the relevant preference implicitly and naturally, one preference at a time, and name the dimension it belongs to.
- For types 1, 3 and 4, do not reveal any preference; gently steer the agent toward asking more specific questions.
- Never mention option identifiers or which option is best.

## Example Format
```json
{
    "thought": "Your reasoning about which type the message is.",
    "type": 1 or 2 or 3 or 4,
    "dimension": "The trip dimension the preference belongs to, or empty",
    "response": "Your reply as the traveler"
}
```

## Scenario
{{scenario}}

## Your Hidden Preferences
{{preferences}})TXT",
        {{{"type", FieldKind::enumeration, {"1", "2", "3", "4"}, true},
          {"dimension", FieldKind::string, {}, false},
          {"response", FieldKind::string, {}, true}}}};
    return t;
}

std::vector<const PromptTemplate*> all() {
    return {&intention_response(), &intention_coverage(), &persuade_stance(),
            &turtle_inquiry(),     &turtle_scoring(),     &telepathy_question(),
            &telepathy_guess(),    &search_answer(),      &travel_utterance()};
}

}  // namespace templates

}  // namespace userl::usersim
