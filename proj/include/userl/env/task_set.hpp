#pragma once

#include <filesystem>
#include <istream>
#include <vector>

#include "userl/env/types.hpp"

namespace userl {

/// Tasks in file order. task_id is unique within a set.
struct TaskSet {
    std::vector<TaskSpec> tasks;

    const TaskSpec* find(std::string_view task_id) const;
    TaskSet filter(GymKind kind) const;
};

/// One JSON object per line: task_id, gym, payload, metadata. Blank lines are
/// skipped. Throws SchemaError with the offending line number.
TaskSet load_task_set(std::istream& in);
TaskSet load_task_set(const std::filesystem::path& path);
/// Loads every *.jsonl file in a directory (sorted by name), or one file.
TaskSet load_tasks(const std::filesystem::path& path);

}  // namespace userl
