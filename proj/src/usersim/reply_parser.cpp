#include "userl/usersim/reply_parser.hpp"

#include <cmath>

#include "userl/core/errors.hpp"
#include "userl/core/text.hpp"

namespace userl::usersim {

namespace {

// Returns [begin, end) of the first brace-balanced object, honouring string
// literals so braces inside strings do not count.
std::string_view first_balanced_object(std::string_view s) {
    const auto start = s.find('{');
    if (start == std::string_view::npos) return {};
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return s.substr(start, i - start + 1);
        }
    }
    return {};
}

std::string_view first_fenced_block(std::string_view s) {
    const auto open = s.find("```");
    if (open == std::string_view::npos) return {};
    auto body_start = s.find('\n', open + 3);
    if (body_start == std::string_view::npos) return {};
    // Anything between the fence and the newline is the info string ("json").
    ++body_start;
    const auto close = s.find("```", body_start);
    if (close == std::string_view::npos) return {};
    return s.substr(body_start, close - body_start);
}

Json coerce_field(const FieldSpec& spec, const Json& value) {
    switch (spec.kind) {
        case FieldKind::string:
            if (value.is_string()) return value;
            if (value.is_number() || value.is_boolean()) return value.dump();
            throw SchemaViolation(spec.name, "expected a string");
        case FieldKind::enumeration: {
            std::string given;
            if (value.is_string()) {
                given = value.get<std::string>();
            } else if (value.is_number_integer()) {
                given = std::to_string(value.get<long long>());
            } else {
                throw SchemaViolation(spec.name, "expected one of the allowed labels");
            }
            const std::string folded = text::to_lower(text::trim(given));
            for (const auto& label : spec.labels) {
                if (text::to_lower(label) == folded) return label;
            }
            throw SchemaViolation(spec.name, "'" + given + "' is not an allowed label");
        }
        case FieldKind::number:
            if (value.is_number()) return value.get<double>();
            if (value.is_string()) {
                if (auto v = text::parse_number(value.get<std::string>())) return *v;
            }
            throw SchemaViolation(spec.name, "expected a number");
        case FieldKind::boolean:
            if (value.is_boolean()) return value;
            if (value.is_string()) {
                const auto v = text::to_lower(text::trim(value.get<std::string>()));
                if (v == "true") return true;
                if (v == "false") return false;
            }
            throw SchemaViolation(spec.name, "expected true/false");
        case FieldKind::integer_list: {
            if (!value.is_array()) throw SchemaViolation(spec.name, "expected a list of integers");
            Json out = Json::array();
            for (const auto& e : value) {
                if (e.is_number_integer()) {
                    out.push_back(e.get<long long>());
                } else if (e.is_number_float() && std::floor(e.get<double>()) == e.get<double>()) {
                    out.push_back(static_cast<long long>(e.get<double>()));
                } else if (e.is_string()) {
                    auto v = text::parse_number(e.get<std::string>());
                    if (!v || std::floor(*v) != *v) throw SchemaViolation(spec.name, "non-integer element");
                    out.push_back(static_cast<long long>(*v));
                } else {
                    throw SchemaViolation(spec.name, "non-integer element");
                }
            }
            return out;
        }
        case FieldKind::array:
            if (!value.is_array()) throw SchemaViolation(spec.name, "expected a list");
            return value;
    }
    throw SchemaViolation(spec.name, "unsupported field kind");
}

}  // namespace

const FieldSpec* ReplySchema::find(std::string_view name) const {
    for (const auto& f : fields) {
        if (f.name == name) return &f;
    }
    return nullptr;
}

std::string extract_structured_text(std::string_view raw) {
    if (auto fenced = first_fenced_block(raw); !fenced.empty()) {
        // A fenced block can still carry prose around the object.
        if (auto obj = first_balanced_object(fenced); !obj.empty()) return std::string(obj);
        return text::trim(fenced);
    }
    if (auto obj = first_balanced_object(raw); !obj.empty()) return std::string(obj);
    throw NoStructuredContent("reply contains no fenced block or JSON object");
}

Json parse_structured_reply(std::string_view raw, const ReplySchema& schema) {
    const std::string body = extract_structured_text(raw);
    Json parsed = Json::parse(body, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded() || !parsed.is_object()) {
        throw NoStructuredContent("structured region is not a JSON object");
    }
    Json out = Json::object();
    for (const auto& field : schema.fields) {
        auto it = parsed.find(field.name);
        if (it == parsed.end() || it->is_null()) {
            if (field.required) throw SchemaViolation(field.name, "required field is missing");
            continue;
        }
        out[field.name] = coerce_field(field, *it);
    }
    return out;
}

std::string render_fenced(const Json& fields) { return "```json\n" + fields.dump(2) + "\n```"; }

}  // namespace userl::usersim
