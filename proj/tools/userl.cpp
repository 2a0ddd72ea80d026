#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "userl/bridge/hub.hpp"
#include "userl/bridge/server.hpp"
#include "userl/core/errors.hpp"
#include "userl/env/gym.hpp"
#include "userl/env/task_set.hpp"
#include "userl/gyms/web_search.hpp"
#include "userl/lab/train.hpp"
#include "userl/orchestrator/persist.hpp"
#include "userl/usersim/llm_user.hpp"

using namespace userl;

namespace {

struct CommonOptions {
    std::string gym;
    std::string tasks = "fixtures/tasks";
    std::string policy_endpoint;
    std::string policy_model = "default";
    std::string user_endpoint;
    std::string user_model = "default";
    std::string search = "canned";
    int group_size = 8;
    int max_turns = 16;
    std::string turn_shaping = "equalized";
    std::string traj_score = "r2g";
    double gamma = 0.8;
    double k = 2.0;
    double eta = 1e-6;
    std::uint64_t seed = 0;
    std::string out = "out";
    bool allow_aborted = false;
    int workers = 4;
    double temperature = -1.0;
    int max_steps = 20;
    double step_penalty = 0.0;
    double reward_scale = 1.0;
    bool normalize = false;
};

std::string env_or(const char* name, const char* fallback) {
    const char* v = std::getenv(name);
    if (v && *v) return v;
    v = std::getenv(fallback);
    return v ? v : "";
}

void add_shaping_flags(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--turn-shaping", o.turn_shaping, "Turn-level shaping")
        ->check(CLI::IsMember({"naive", "equalized", "r2g", "em"}))
        ->capture_default_str();
    cmd->add_option("--traj-score", o.traj_score, "Trajectory scoring")
        ->check(CLI::IsMember({"sum", "r2g"}))
        ->capture_default_str();
    cmd->add_option("--gamma", o.gamma, "Discount for r2g")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    cmd->add_option("--k", o.k, "Sharpness of exponential mapping")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--eta", o.eta, "Advantage denominator guard")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_flag("--allow-aborted", o.allow_aborted, "Export advantages for groups with aborted episodes");
}

void add_rollout_flags(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--gym", o.gym, "Only run tasks of this gym");
    cmd->add_option("--tasks", o.tasks, "Task JSONL file or directory")->capture_default_str();
    cmd->add_option("--policy-endpoint", o.policy_endpoint, "Chat-completions base URL of the policy")->required();
    cmd->add_option("--policy-model", o.policy_model, "Model name sent to the policy endpoint")->capture_default_str();
    cmd->add_option("--user-endpoint", o.user_endpoint,
                    "User simulator endpoints: role=url[,gym.role=url...]; scripted users when omitted");
    cmd->add_option("--user-model", o.user_model, "Model name sent to user endpoints")->capture_default_str();
    cmd->add_option("--search", o.search, "Search backend for SearchGym")
        ->check(CLI::IsMember({"canned", "serper"}))
        ->capture_default_str();
    cmd->add_option("--group-size", o.group_size, "Episodes per task")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--max-turns", o.max_turns, "Turn cap per episode")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--max-steps", o.max_steps, "Gym step budget")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--step-penalty", o.step_penalty, "Penalty subtracted every turn")->capture_default_str();
    cmd->add_option("--reward-scale", o.reward_scale, "Multiplier on raw rewards")->capture_default_str();
    cmd->add_flag("--normalize", o.normalize, "Clamp post-processed rewards to [0, 1]");
    cmd->add_option("--temperature", o.temperature, "Policy sampling temperature");
    cmd->add_option("--seed", o.seed, "Base seed")->capture_default_str();
    cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
    cmd->add_option("--workers", o.workers, "Concurrent episodes")->check(CLI::PositiveNumber)->capture_default_str();
    add_shaping_flags(cmd, o);
}

reward::ShapingSpec shaping_of(const CommonOptions& o) {
    reward::ShapingSpec s;
    s.turn_scheme = reward::parse_turn_scheme(o.turn_shaping);
    s.traj_scheme = reward::parse_traj_scheme(o.traj_score);
    s.gamma = o.gamma;
    s.k = o.k;
    s.eta = o.eta;
    s.validate();
    if (s.turn_scheme == reward::TurnScheme::naive) {
        std::cerr << "warning: naive turn shaping feeds raw turn rewards straight into group normalization; "
                     "turns without immediate reward are pushed down, and training with it tends to collapse.\n";
    }
    return s;
}

std::vector<TaskSpec> select_tasks(const CommonOptions& o) {
    auto set = load_tasks(o.tasks);
    if (!o.gym.empty()) set = set.filter(parse_gym_kind(o.gym));
    if (set.tasks.empty()) throw std::invalid_argument("no tasks selected from " + o.tasks);
    return set.tasks;
}

orchestrator::RolloutPlan plan_of(const CommonOptions& o, double default_temperature) {
    orchestrator::RolloutPlan plan;
    plan.tasks = select_tasks(o);
    plan.group_size = o.group_size;
    plan.max_turns = o.max_turns;
    plan.shaping = shaping_of(o);
    plan.env.max_steps = o.max_steps;
    plan.env.step_penalty = o.step_penalty;
    plan.env.reward_scale = o.reward_scale;
    plan.env.normalize_to_unit = o.normalize;
    plan.policy_temperature = o.temperature >= 0.0 ? o.temperature : default_temperature;
    plan.seed = o.seed;
    plan.workers = o.workers;
    plan.out = o.out;
    plan.allow_aborted = o.allow_aborted;
    plan.validate();
    return plan;
}

orchestrator::HttpPolicyClient policy_of(const CommonOptions& o, double temperature) {
    orchestrator::PolicyEndpoint ep;
    ep.chat.url = o.policy_endpoint;
    ep.chat.model = o.policy_model;
    ep.chat.api_key = env_or("USERL_POLICY_API_KEY", "OPENAI_API_KEY");
    ep.temperature = temperature;
    orchestrator::HttpPolicyClient client(ep);
    if (!client.healthy()) throw PolicyEndpointError("policy endpoint " + o.policy_endpoint + " is unreachable");
    return client;
}

void configure_services(const CommonOptions& o, const std::vector<TaskSpec>& tasks,
                        orchestrator::RolloutServices& services) {
    if (!o.user_endpoint.empty()) {
        auto port = std::make_shared<usersim::LlmUserPort>();
        for (auto& b : usersim::parse_role_bindings(o.user_endpoint, o.user_model,
                                                    env_or("USERL_USER_API_KEY", "OPENAI_API_KEY"))) {
            port->bind(std::move(b));
        }
        for (const auto& t : tasks) {
            for (auto role : usersim::required_roles(t.gym_kind)) {
                if (!port->bound(t.gym_kind, role)) {
                    throw std::invalid_argument("no user endpoint bound for " + std::string(to_string(t.gym_kind)) +
                                                "." + std::string(usersim::to_string(role)));
                }
            }
        }
        services.users = [port](const TaskSpec&, int) { return port; };
    }
    if (o.search == "serper") {
        std::shared_ptr<gyms::SearchBackend> backend = gyms::SerperSearchBackend::from_environment();
        if (!backend) throw std::invalid_argument("--search serper needs SERPER_API_KEY");
        services.search = [backend](const TaskSpec&) { return backend; };
    }
}

int run_rollout(const CommonOptions& o, double default_temperature) {
    auto plan = plan_of(o, default_temperature);
    auto policy = policy_of(o, plan.policy_temperature);
    orchestrator::RolloutServices services;
    services.policy = &policy;
    configure_services(o, plan.tasks, services);
    auto runs = orchestrator::run_plan(plan, services);
    const auto result = orchestrator::persist_and_report(runs, plan);
    std::cout << result.report.table();
    std::cout << result.trajectory_records << " trajectories, " << result.advantage_records
              << " advantage records written to " << plan.out.string() << "\n";
    for (const auto& s : result.skipped_groups) std::cout << "advantages skipped for " << s << "\n";
    return 0;
}

struct AdvantageOptions {
    std::string trajectories;
    std::string out = "advantages.jsonl";
};

int run_advantages(const CommonOptions& o, const AdvantageOptions& a) {
    auto groups = orchestrator::load_groups(a.trajectories);
    const auto spec = shaping_of(o);
    const auto exported = orchestrator::export_advantages(groups, spec, o.allow_aborted);
    std::ostringstream body;
    reward::write_advantages_jsonl(body, exported.records);
    orchestrator::write_files_atomically({{a.out, body.str()}});
    for (const auto& s : exported.skipped) std::cout << "skipped " << s << "\n";
    std::cout << exported.records.size() << " advantage records written to " << a.out << "\n";
    if (exported.records.empty() && !exported.skipped.empty()) return 2;
    return 0;
}

struct ReplayOptions {
    std::string trajectories;
    std::string tasks = "fixtures/tasks";
    int max_steps = 20;
};

int run_replay(const ReplayOptions& r) {
    const auto tasks = load_tasks(r.tasks);
    const auto groups = orchestrator::load_groups(r.trajectories);
    EnvConfig config;
    config.max_steps = r.max_steps;
    int checked = 0, failed = 0;
    for (const auto& g : groups) {
        const TaskSpec* task = tasks.find(g.task_id);
        if (!task) {
            std::cout << g.task_id << ": task not found\n";
            ++failed;
            continue;
        }
        for (const auto& t : g.trajectories) {
            const auto res = orchestrator::replay_trajectory(t, *task, config, orchestrator::RolloutServices{});
            ++checked;
            if (!res.matches) {
                ++failed;
                std::cout << t.task_id << "#" << t.trajectory_index << ": " << res.detail << "\n";
            }
        }
    }
    std::cout << checked << " trajectories replayed, " << failed << " mismatches\n";
    return failed == 0 ? 0 : 1;
}

struct HumanOptions {
    std::string address = "127.0.0.1";
    unsigned short port = 8765;
    std::string console_dir;
    int reply_timeout = 600;
};

int run_human_serve(CommonOptions o, const HumanOptions& h) {
    o.group_size = 1;
    auto plan = plan_of(o, 0.0);
    plan.workers = std::max<int>(1, static_cast<int>(plan.tasks.size()));
    auto policy = policy_of(o, plan.policy_temperature);
    bridge::HumanBridgeHub hub(std::chrono::seconds(h.reply_timeout));
    bridge::BridgeServer server(hub, h.address, h.port, h.console_dir);
    server.start();
    orchestrator::RolloutServices services;
    services.policy = &policy;
    services.users = [&hub, &h, &server](const TaskSpec& task, int index) -> std::shared_ptr<usersim::UserPort> {
        std::string truth;
        for (const auto& s : make_gym(task)->secrets()) truth += (truth.empty() ? "" : "\n") + s;
        const auto id = hub.open_session(task, truth, task.task_id + "-" + std::to_string(index));
        const auto host = h.address + ":" + std::to_string(server.port());
        if (h.console_dir.empty()) {
            std::cout << "join: ws://" << host << "/session/" << id << std::endl;
        } else {
            std::cout << "join: http://" << host << "/#" << id << std::endl;
        }
        return std::make_shared<bridge::HumanUserPort>(hub, id);
    };
    // Humans play the user; only the search backend comes from the flags.
    auto search_only = o;
    search_only.user_endpoint.clear();
    configure_services(search_only, plan.tasks, services);
    std::cout << "human bridge listening on " << h.address << ":" << server.port() << std::endl;
    auto runs = orchestrator::run_plan(plan, services);
    const auto result = orchestrator::persist_and_report(runs, plan);
    std::cout << result.report.table();
    server.stop();
    return 0;
}

struct LabOptions {
    std::string settings = "equalized/sum,equalized/r2g,em/r2g,r2g/r2g";
    int epochs = 200;
    int seeds = 3;
    std::string out = "report";
    lab::TrainConfig train;
};

int run_lab_compare(const LabOptions& l) {
    auto config = l.train;
    config.epochs = l.epochs;
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < l.seeds; ++i) seeds.push_back(static_cast<std::uint64_t>(i + 1));
    const auto settings = lab::parse_settings(l.settings);
    for (const auto& s : settings) {
        if (s.turn == reward::TurnScheme::naive) {
            std::cerr << "warning: naive turn shaping is included for comparison; it tends to collapse.\n";
        }
    }
    const auto report = lab::compare_settings(settings, config, seeds);
    report.write(l.out);
    std::cout << report.summary_table();
    std::cout << "curves and summary written to " << l.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-turn user-centric RL environments, reward shaping and rollouts"};
    app.set_config("--config", "", "TOML/INI file with any of the flags");
    app.require_subcommand(1);

    CommonOptions rollout_opts, eval_opts, adv_opts, human_opts;
    eval_opts.group_size = 1;

    auto* rollout = app.add_subcommand("rollout", "Collect rollout groups and export advantages");
    add_rollout_flags(rollout, rollout_opts);
    auto* eval = app.add_subcommand("eval", "Evaluate a policy (temperature 0 by default)");
    add_rollout_flags(eval, eval_opts);

    AdvantageOptions adv;
    auto* advantages = app.add_subcommand("advantages", "Compute advantages from saved trajectories");
    advantages->add_option("--trajectories", adv.trajectories, "trajectories.jsonl from a rollout")->required();
    advantages->add_option("--out", adv.out, "Output JSONL")->capture_default_str();
    add_shaping_flags(advantages, adv_opts);

    ReplayOptions rep;
    auto* replay = app.add_subcommand("replay", "Replay saved trajectories against scripted users");
    replay->add_option("--trajectories", rep.trajectories, "trajectories.jsonl")->required();
    replay->add_option("--tasks", rep.tasks, "Task JSONL file or directory")->capture_default_str();
    replay->add_option("--max-steps", rep.max_steps, "Gym step budget")->capture_default_str();

    HumanOptions hopts;
    auto* human = app.add_subcommand("human-serve", "Run sessions with a human playing the user");
    add_rollout_flags(human, human_opts);
    human->add_option("--address", hopts.address, "Bind address")->capture_default_str();
    human->add_option("--port", hopts.port, "Bind port")->capture_default_str();
    human->add_option("--console-dir", hopts.console_dir, "Directory with the console's static files");
    human->add_option("--reply-timeout", hopts.reply_timeout, "Seconds to wait for each human reply")
        ->capture_default_str();

    LabOptions lopts;
    auto* labcmd = app.add_subcommand("lab", "Tabular policy-gradient experiments on ChainGym");
    labcmd->require_subcommand(1);
    auto* compare = labcmd->add_subcommand("compare", "Compare shaping settings");
    compare->add_option("--settings", lopts.settings, "turn/traj pairs, comma separated")->capture_default_str();
    compare->add_option("--epochs", lopts.epochs, "Updates per run")->capture_default_str();
    compare->add_option("--seeds", lopts.seeds, "Number of seeds")->capture_default_str();
    compare->add_option("--out", lopts.out, "Report directory")->capture_default_str();
    compare->add_option("--lr", lopts.train.learning_rate, "Learning rate")->capture_default_str();
    compare->add_option("--group-size", lopts.train.group_size, "Trajectories per group")->capture_default_str();
    compare->add_option("--groups", lopts.train.groups_per_batch, "Groups per update")->capture_default_str();
    compare->add_option("--epsilon", lopts.train.epsilon, "Clip range")->capture_default_str();
    compare->add_option("--gamma", lopts.train.gamma, "Discount for r2g")->capture_default_str();
    compare->add_option("--k", lopts.train.k, "Sharpness of exponential mapping")->capture_default_str();

    CLI11_PARSE(app, argc, argv);
    try {
        if (*rollout) return run_rollout(rollout_opts, 1.0);
        if (*eval) return run_rollout(eval_opts, 0.0);
        if (*advantages) return run_advantages(adv_opts, adv);
        if (*replay) return run_replay(rep);
        if (*human) return run_human_serve(human_opts, hopts);
        if (*compare) return run_lab_compare(lopts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
