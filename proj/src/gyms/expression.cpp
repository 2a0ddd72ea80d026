#include "userl/gyms/expression.hpp"

#include <cctype>
#include <charconv>
#include <vector>

#include "userl/core/errors.hpp"

namespace userl::gyms {

struct Expression::Node {
    enum class Kind { constant, variable, negate, add, sub, mul, div } kind;
    double value = 0.0;
    int variable = 0;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

// Replaces the multi-byte operator glyphs with their ASCII forms.
std::string ascii_operators(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size();) {
        if (s.substr(i, 2) == "\xC3\x97") {  // ×
            out.push_back('*');
            i += 2;
        } else if (s.substr(i, 2) == "\xC3\xB7") {  // ÷
            out.push_back('/');
            i += 2;
        } else if (s.substr(i, 3) == "\xE2\x88\x92") {  // −
            out.push_back('-');
            i += 3;
        } else {
            out.push_back(s[i++]);
        }
    }
    return out;
}

class Parser {
public:
    explicit Parser(std::string_view src) : s_(src) {}

    NodePtr parse() {
        auto n = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw SchemaError("rule '" + std::string(s_) + "': " + why + " at offset " + std::to_string(pos_));
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    static NodePtr binary(Kind k, NodePtr l, NodePtr r) {
        return std::make_shared<Expression::Node>(Expression::Node{k, 0.0, 0, std::move(l), std::move(r)});
    }

    NodePtr expr() {
        auto lhs = term();
        while (true) {
            if (eat('+')) {
                lhs = binary(Kind::add, lhs, term());
            } else if (eat('-')) {
                lhs = binary(Kind::sub, lhs, term());
            } else {
                return lhs;
            }
        }
    }

    NodePtr term() {
        auto lhs = unary();
        while (true) {
            if (eat('*')) {
                lhs = binary(Kind::mul, lhs, unary());
            } else if (eat('/')) {
                lhs = binary(Kind::div, lhs, unary());
            } else {
                return lhs;
            }
        }
    }

    NodePtr unary() {
        if (eat('-')) return binary(Kind::negate, unary(), nullptr);
        if (eat('+')) return unary();
        return primary();
    }

    NodePtr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of rule");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            auto inner = expr();
            if (!eat(')')) fail("missing ')'");
            return inner;
        }
        if (c >= 'a' && c <= 'd') {
            ++pos_;
            if (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) fail("unknown identifier");
            return std::make_shared<Expression::Node>(Expression::Node{Kind::variable, 0.0, c - 'a', nullptr, nullptr});
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
            if (ec != std::errc{}) fail("bad number");
            pos_ = static_cast<std::size_t>(ptr - s_.data());
            return std::make_shared<Expression::Node>(Expression::Node{Kind::constant, v, 0, nullptr, nullptr});
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

double eval(const Expression::Node& n, const std::array<double, 4>& args) {
    switch (n.kind) {
        case Kind::constant: return n.value;
        case Kind::variable: return args[static_cast<std::size_t>(n.variable)];
        case Kind::negate: return -eval(*n.lhs, args);
        case Kind::add: return eval(*n.lhs, args) + eval(*n.rhs, args);
        case Kind::sub: return eval(*n.lhs, args) - eval(*n.rhs, args);
        case Kind::mul: return eval(*n.lhs, args) * eval(*n.rhs, args);
        case Kind::div: return eval(*n.lhs, args) / eval(*n.rhs, args);
    }
    return 0.0;
}

}  // namespace

Expression Expression::parse(std::string_view source) {
    Expression e;
    e.source_ = std::string(source);
    const std::string ascii = ascii_operators(source);
    if (ascii.find_first_not_of(" \t") == std::string::npos) throw SchemaError("rule is empty");
    e.root_ = Parser(ascii).parse();
    return e;
}

double Expression::evaluate(const std::array<double, 4>& args) const { return eval(*root_, args); }

}  // namespace userl::gyms
