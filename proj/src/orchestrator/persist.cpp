#include "userl/orchestrator/persist.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "userl/core/errors.hpp"
#include "userl/env/session.hpp"

namespace userl::orchestrator {

AdvantageExport export_advantages(std::vector<RolloutGroup>& groups, const reward::ShapingSpec& spec,
                                  bool allow_aborted) {
    AdvantageExport out;
    for (auto& g : groups) {
        if (g.trajectories.size() < 2) {
            out.skipped.push_back(g.task_id + ": group has fewer than 2 trajectories");
            continue;
        }
        if (g.flagged() && !allow_aborted) {
            out.skipped.push_back(g.task_id + ": group contains aborted trajectories");
            continue;
        }
        auto records = reward::group_advantages(g, spec);
        out.records.insert(out.records.end(), std::make_move_iterator(records.begin()),
                           std::make_move_iterator(records.end()));
    }
    return out;
}

void write_files_atomically(const std::vector<std::pair<std::filesystem::path, std::string>>& files) {
    std::vector<std::filesystem::path> temps;
    try {
        for (const auto& [path, content] : files) {
            if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
            auto tmp = path;
            tmp += ".tmp";
            temps.push_back(tmp);
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            out << content;
            out.close();
            if (!out) throw std::runtime_error("failed writing " + tmp.string());
        }
    } catch (...) {
        std::error_code ec;
        for (const auto& t : temps) std::filesystem::remove(t, ec);
        throw;
    }
    for (std::size_t i = 0; i < files.size(); ++i) std::filesystem::rename(temps[i], files[i].first);
}

PersistResult persist_and_report(std::vector<GroupRun>& runs, const RolloutPlan& plan) {
    std::ostringstream trajectories;
    std::ostringstream transcripts;
    std::vector<RolloutGroup> groups;
    PersistResult result;
    for (auto& run : runs) {
        for (const auto& t : run.group.trajectories) {
            trajectories << Json(t).dump() << '\n';
            ++result.trajectory_records;
        }
        for (const auto& t : run.transcripts) transcripts << Json(t).dump() << '\n';
        groups.push_back(run.group);
    }
    auto adv = export_advantages(groups, plan.shaping, plan.allow_aborted);
    for (std::size_t i = 0; i < runs.size(); ++i) {
        runs[i].group.group_mean = groups[i].group_mean;
        runs[i].group.group_std = groups[i].group_std;
    }
    std::ostringstream advantages;
    reward::write_advantages_jsonl(advantages, adv.records);
    result.advantage_records = adv.records.size();
    result.skipped_groups = adv.skipped;
    result.report = compute_metrics(groups);

    Json report = result.report.to_json();
    report["shaping"] = {{"turn", reward::to_string(plan.shaping.turn_scheme)},
                         {"trajectory", reward::to_string(plan.shaping.traj_scheme)},
                         {"gamma", plan.shaping.gamma},
                         {"k", plan.shaping.k},
                         {"eta", plan.shaping.eta}};
    report["group_size"] = plan.group_size;
    report["max_turns"] = plan.max_turns;
    report["seed"] = plan.seed;
    report["skipped_advantage_groups"] = adv.skipped;

    write_files_atomically({{plan.out / "trajectories.jsonl", trajectories.str()},
                            {plan.out / "transcripts.jsonl", transcripts.str()},
                            {plan.out / "advantages.jsonl", advantages.str()},
                            {plan.out / "report.json", report.dump(2) + "\n"},
                            {plan.out / "report.txt", result.report.table()}});
    return result;
}

std::vector<RolloutGroup> load_groups(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<RolloutGroup> groups;
    std::map<std::string, std::size_t> index;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Trajectory t;
        try {
            t = Json::parse(line).get<Trajectory>();
        } catch (const Json::exception& e) {
            throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        auto [it, fresh] = index.emplace(t.task_id, groups.size());
        if (fresh) groups.push_back(RolloutGroup{t.task_id, {}, 0.0, 0.0});
        groups[it->second].trajectories.push_back(std::move(t));
    }
    return groups;
}

ReplayResult replay_trajectory(const Trajectory& trajectory, const TaskSpec& task, const EnvConfig& config,
                               const RolloutServices& services) {
    ReplayResult r;
    r.recorded = trajectory.rewards();
    auto port = services.users ? services.users(task, trajectory.trajectory_index) : nullptr;
    auto search = services.search ? services.search(task) : nullptr;
    EnvSession session = reset(task, config, GymServices{port.get(), search.get()});
    for (const auto& turn : trajectory.turns) {
        try {
            r.replayed.push_back(session.step(turn.choice).reward);
        } catch (const std::exception& e) {
            r.detail = "turn " + std::to_string(turn.turn_index) + ": " + e.what();
            return r;
        }
    }
    r.matches = r.recorded == r.replayed;
    if (!r.matches) r.detail = "reward sequences differ";
    return r;
}

}  // namespace userl::orchestrator
