#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "userl/env/gym.hpp"
#include "userl/gyms/expression.hpp"
#include "userl/usersim/user_port.hpp"

namespace userl::gyms {

using usersim::ChatMessage;

/// Answers within this distance of the expected value are correct.
inline constexpr double kFunctionTolerance = 1e-6;
/// At most this many searches per SearchGym session.
inline constexpr int kSearchCap = 5;
/// Every Nth TravelGym search attempt fails with a simulated system error.
inline constexpr int kTravelErrorPeriod = 5;

// --- FunctionGym ------------------------------------------------------------

struct FunctionState {
    Expression hidden_rule;
    std::array<double, 4> test_case{};
    double expected = 0.0;
    bool answered = false;
};

/// Hidden arity-4 rule discovery. Entirely rule-based; no user port.
class FunctionGym final : public Gym {
public:
    explicit FunctionGym(const TaskSpec& task);

    GymKind kind() const override { return GymKind::function; }
    std::unique_ptr<Gym> clone() const override { return std::make_unique<FunctionGym>(*this); }
    std::string initial_observation() const override;
    GymReply step(const StepChoice& choice, const GymServices& services, const EnvConfig& config) override;
    Json state() const override;
    bool needs_user() const override { return false; }
    std::vector<std::string> secrets() const override;
    double task_metric(std::span<const double> rewards) const override;

    const FunctionState& function_state() const { return state_; }

private:
    FunctionState state_;
    std::string description_;
};

// --- TelepathyGym -----------------------------------------------------------

struct TelepathyState {
    std::string target_entity;
    std::string category;
    std::string entity_description;
    std::vector<std::pair<std::string, std::string>> clue_history;
    bool solved = false;
};

class TelepathyGym final : public Gym {
public:
    explicit TelepathyGym(const TaskSpec& task);

    GymKind kind() const override { return GymKind::telepathy; }
    std::unique_ptr<Gym> clone() const override { return std::make_unique<TelepathyGym>(*this); }
    std::string initial_observation() const override;
    GymReply step(const StepChoice& choice, const GymServices& services, const EnvConfig& config) override;
    Json state() const override;
    std::vector<std::string> secrets() const override;
    double task_metric(std::span<const double> rewards) const override;

    const TelepathyState& telepathy_state() const { return state_; }

private:
    TelepathyState state_;
};

// --- TurtleGym --------------------------------------------------------------

struct TurtleCriterion {
    std::string statement;
    double weight = 0.0;
};

struct TurtleState {
    std::string surface;
    std::string bottom;
    std::vector<TurtleCriterion> criteria;
    double best_score = 0.0;
    std::vector<std::pair<std::string, std::string>> inquiry_history;
};

class TurtleGym final : public Gym {
public:
    explicit TurtleGym(const TaskSpec& task);

    GymKind kind() const override { return GymKind::turtle; }
    std::unique_ptr<Gym> clone() const override { return std::make_unique<TurtleGym>(*this); }
    std::string initial_observation() const override;
    GymReply step(const StepChoice& choice, const GymServices& services, const EnvConfig& config) override;
    Json state() const override;
    std::vector<std::string> secrets() const override;

    const TurtleState& turtle_state() const { return state_; }

    /// Weighted criterion score; each score must be 0, 0.5 or 1.
    static double weighted_score(const std::vector<TurtleCriterion>& criteria, const std::vector<double>& scores);

private:
    TurtleState state_;
};

// --- IntentionGym -------------------------------------------------------------

struct MissingDetail {
    std::string text;
    int importance = 1;  // 1 = Low, 2 = Medium, 3 = High
    bool covered = false;
};

struct IntentionState {
    std::string vague_task;
    std::vector<MissingDetail> missing_details;
    std::vector<std::pair<std::string, std::string>> conversation;
};

/// Base reward for uncovering a detail of the given importance.
double intention_base_reward(int importance);
/// Sum of base rewards minus 0.2 for every detail beyond the first.
double intention_reward(const std::vector<int>& newly_covered_importances);

class IntentionGym final : public Gym {
public:
    explicit IntentionGym(const TaskSpec& task);

    GymKind kind() const override { return GymKind::intention; }
    std::unique_ptr<Gym> clone() const override { return std::make_unique<IntentionGym>(*this); }
    std::string initial_observation() const override;
    GymReply step(const StepChoice& choice, const GymServices& services, const EnvConfig& config) override;
    Json state() const override;
    std::vector<std::string> secrets() const override;

    const IntentionState& intention_state() const { return state_; }

private:
    IntentionState state_;
};

// --- PersuadeGym --------------------------------------------------------------

inline constexpr std::array<std::string_view, 7> kStanceLabels{
    "Strongly Agree", "Agree", "Partly Agree", "Neutral", "Partly Disagree", "Disagree", "Strongly Disagree"};
inline constexpr int kMaxStanceLevel = 6;

std::optional<int> stance_level(std::string_view label);
/// level / 6.
double stance_value(int level);

struct PersuadeState {
    std::string statement;
    std::string initial_argument;
    int stance_level = 0;
    std::vector<std::pair<std::string, std::string>> conversation;
};

class PersuadeGym final : public Gym {
public:
    explicit PersuadeGym(const TaskSpec& task);

    GymKind kind() const override { return GymKind::persuade; }
    std::unique_ptr<Gym> clone() const override { return std::make_unique<PersuadeGym>(*this); }
    std::string initial_observation() const override;
    GymReply step(const StepChoice& choice, const GymServices& services, const EnvConfig& config) override;
    Json state() const override;
    std::vector<std::string> secrets() const override { return {}; }

    const PersuadeState& persuade_state() const { return state_; }

private:
    PersuadeState state_;
};

// --- TravelGym ----------------------------------------------------------------

enum class OptionLabel { best, correct, wrong, noise };

struct TravelOption {
    std::string id;
    std::string description;
    OptionLabel label = OptionLabel::noise;
};

struct TravelDimension {
    std::string name;
    std::string preference;
    std::vector<TravelOption> options;
    bool preference_elicited = false;
    bool chosen = false;          // best option selected
    bool correct_rewarded = false;  // a correct non-best option already paid out
};

struct TravelState {
    std::string scenario;
    std::vector<TravelDimension> dimensions;
    int search_attempt_count = 0;
    double wrong_penalty = 0.0;
    std::vector<std::pair<std::string, std::string>> conversation;
};

/// Reward for each utterance type 1..4 returned by the user classifier.
double travel_type_reward(int type);

class TravelGym final : public Gym {
public:
    explicit TravelGym(const TaskSpec& task);

    GymKind kind() const override { return GymKind::travel; }
    std::unique_ptr<Gym> clone() const override { return std::make_unique<TravelGym>(*this); }
    std::string initial_observation() const override;
    GymReply step(const StepChoice& choice, const GymServices& services, const EnvConfig& config) override;
    Json state() const override;
    std::vector<std::string> secrets() const override;
    /// Mean over dimensions of the best selection value (1.0 best, 0.8 correct).
    double task_metric(std::span<const double> rewards) const override;

    const TravelState& travel_state() const { return state_; }

private:
    GymReply search(const StepChoice& choice);
    GymReply answer(const StepChoice& choice);

    TravelState state_;
};

// --- SearchGym ----------------------------------------------------------------

enum class AnswerEvaluation { rule_normalized_match, llm_judge };

struct SearchState {
    std::string question;
    std::string gold_answer;
    int search_count = 0;
    bool answered = false;
    AnswerEvaluation evaluation = AnswerEvaluation::llm_judge;
};

class SearchGym final : public Gym {
public:
    explicit SearchGym(const TaskSpec& task);

    GymKind kind() const override { return GymKind::search; }
    std::unique_ptr<Gym> clone() const override { return std::make_unique<SearchGym>(*this); }
    std::string initial_observation() const override;
    GymReply step(const StepChoice& choice, const GymServices& services, const EnvConfig& config) override;
    Json state() const override;
    bool needs_user() const override { return state_.evaluation == AnswerEvaluation::llm_judge; }
    bool needs_search() const override { return true; }
    std::vector<std::string> secrets() const override;
    double task_metric(std::span<const double> rewards) const override;

    const SearchState& search_state() const { return state_; }

private:
    SearchState state_;
};

}  // namespace userl::gyms
