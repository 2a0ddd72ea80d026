#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace userl::text {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
/// Trims and replaces every run of whitespace with a single space.
std::string collapse_whitespace(std::string_view s);

/// Lowercase, collapsed whitespace, trailing punctuation removed. Used as the
/// lookup key for scripted users and canned search results.
std::string canonicalize(std::string_view s);

/// Answer normalization for rule-based matching: lowercase, trim, collapse
/// whitespace, strip leading articles (a/an/the) and terminal punctuation.
std::string normalize_answer(std::string_view s);

/// Shortest round-trippable-looking decimal: integers print without a
/// fractional part, others with up to 12 significant digits.
std::string format_number(double v);

std::optional<double> parse_number(std::string_view s);

/// Splits on commas and/or whitespace, dropping empty pieces and an
/// optional surrounding pair of parentheses or brackets.
std::vector<std::string> split_list(std::string_view s);

std::size_t whitespace_token_count(std::string_view s);

}  // namespace userl::text
