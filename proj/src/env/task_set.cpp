#include "userl/env/task_set.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <string>

#include "userl/core/errors.hpp"

namespace userl {

const TaskSpec* TaskSet::find(std::string_view task_id) const {
    for (const auto& t : tasks) {
        if (t.task_id == task_id) return &t;
    }
    return nullptr;
}

TaskSet TaskSet::filter(GymKind kind) const {
    TaskSet out;
    std::copy_if(tasks.begin(), tasks.end(), std::back_inserter(out.tasks),
                 [kind](const TaskSpec& t) { return t.gym_kind == kind; });
    return out;
}

TaskSet load_task_set(std::istream& in) {
    TaskSet set;
    std::set<std::string> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            TaskSpec task = Json::parse(line).get<TaskSpec>();
            if (!seen.insert(task.task_id).second) throw SchemaError("duplicate task_id '" + task.task_id + "'");
            set.tasks.push_back(std::move(task));
        } catch (const Json::exception& e) {
            throw SchemaError("line " + std::to_string(line_no) + ": " + e.what());
        } catch (const SchemaError& e) {
            throw SchemaError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return set;
}

TaskSet load_task_set(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open task file " + path.string());
    return load_task_set(in);
}

TaskSet load_tasks(const std::filesystem::path& path) {
    if (!std::filesystem::is_directory(path)) return load_task_set(path);
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    TaskSet all;
    std::set<std::string> seen;
    for (const auto& f : files) {
        for (auto& t : load_task_set(f).tasks) {
            if (!seen.insert(t.task_id).second) throw SchemaError("duplicate task_id '" + t.task_id + "'");
            all.tasks.push_back(std::move(t));
        }
    }
    return all;
}

}  // namespace userl
