#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "userl/env/types.hpp"

namespace userl::usersim {

enum class FieldKind {
    string,
    /// Closed label set; matched after case folding, never fuzzily.
    enumeration,
    number,
    boolean,
    integer_list,
    /// Passed through untouched; the gym validates the elements.
    array,
};

struct FieldSpec {
    std::string name;
    FieldKind kind = FieldKind::string;
    std::vector<std::string> labels;
    bool required = true;
};

/// The fields a structured user reply must carry. Anything else in the
/// reply (thought, analysis, reasoning) is tolerated and dropped.
struct ReplySchema {
    std::vector<FieldSpec> fields;

    const FieldSpec* find(std::string_view name) const;
};

/// Extracts the first fenced block if present, else the first
/// brace-balanced region, and validates it against `schema`. Returns an
/// object holding only the schema's fields, with enum labels canonicalized.
/// Throws NoStructuredContent or SchemaViolation.
Json parse_structured_reply(std::string_view raw, const ReplySchema& schema);

/// Renders parsed fields back into a ```json fenced block.
std::string render_fenced(const Json& fields);

/// Locates the JSON text inside a reply without validating it.
std::string extract_structured_text(std::string_view raw);

}  // namespace userl::usersim
