#pragma once

#include <array>
#include <memory>
#include <string>
#include <string_view>

namespace userl::gyms {

/// Arity-4 arithmetic rule over the variables a, b, c, d with + - * /
/// (also the × ÷ − glyphs), numeric constants, unary minus and parentheses.
class Expression {
public:
    /// Throws SchemaError on malformed input.
    static Expression parse(std::string_view source);

    /// Division by zero yields a non-finite result rather than throwing.
    double evaluate(const std::array<double, 4>& args) const;
    const std::string& source() const { return source_; }

    struct Node;

private:
    std::string source_;
    std::shared_ptr<const Node> root_;
};

}  // namespace userl::gyms
