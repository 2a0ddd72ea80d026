#include "userl/core/errors.hpp"

namespace userl {

namespace {

std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (const auto& n : names) {
        if (!out.empty()) out += ", ";
        out += n;
    }
    return out;
}

}  // namespace

MissingPlaceholder::MissingPlaceholder(std::vector<std::string> names)
    : Error("missing placeholder(s): " + join_names(names)), names_(std::move(names)) {}

SchemaViolation::SchemaViolation(std::string field, const std::string& what)
    : ReplyParseError("schema violation on field '" + field + "': " + what), field_(std::move(field)) {}

}  // namespace userl
