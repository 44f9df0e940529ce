#pragma once

#include <cctype>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "wdeg/errors.hpp"

namespace wdeg {

/// Variables an expression may reference: spatial coordinates x, y and the
/// solution value s.
struct ExprEnv {
    double x = 0.0;
    double y = 0.0;
    double s = 0.0;
};

/// A parsed arithmetic expression over the grammar
///
///   expr    := term (('+' | '-') term)*
///   term    := factor (('*' | '/') factor)*
///   factor  := '-' factor | primary ('^' factor)?   right-associative,
///                                                   '^' binds tighter than '-'
///   primary := NUMBER | VAR | FUNC '(' expr (',' expr)* ')' | '(' expr ')'
///
/// with VAR in {x, y, s} and FUNC in {exp, abs, min, max}. Deliberately
/// small: enough for right-hand sides and boundary data, reproducible, and
/// no scripting runtime.
class Expression {
public:
    static Expression parse(const std::string& text) {
        Parser parser(text);
        Expression e;
        e.text_ = text;
        e.root_ = parser.parse_expr();
        parser.expect_end();
        return e;
    }

    double eval(const ExprEnv& env) const {
        if (!root_) throw invalid_input("Expression: empty");
        return eval_node(*root_, env);
    }

    /// True if the expression mentions the solution variable s.
    bool depends_on_s() const { return root_ && mentions_s(*root_); }

    const std::string& text() const { return text_; }

private:
    enum class Op { kConst, kVarX, kVarY, kVarS, kAdd, kSub, kMul, kDiv, kPow, kNeg,
                    kExp, kAbs, kMin, kMax };

    struct Node {
        Op op;
        double value = 0.0;
        std::unique_ptr<Node> a, b;
    };

    static double eval_node(const Node& n, const ExprEnv& env) {
        switch (n.op) {
            case Op::kConst: return n.value;
            case Op::kVarX: return env.x;
            case Op::kVarY: return env.y;
            case Op::kVarS: return env.s;
            case Op::kAdd: return eval_node(*n.a, env) + eval_node(*n.b, env);
            case Op::kSub: return eval_node(*n.a, env) - eval_node(*n.b, env);
            case Op::kMul: return eval_node(*n.a, env) * eval_node(*n.b, env);
            case Op::kDiv: return eval_node(*n.a, env) / eval_node(*n.b, env);
            case Op::kPow: return std::pow(eval_node(*n.a, env), eval_node(*n.b, env));
            case Op::kNeg: return -eval_node(*n.a, env);
            case Op::kExp: return std::exp(eval_node(*n.a, env));
            case Op::kAbs: return std::abs(eval_node(*n.a, env));
            case Op::kMin: return std::min(eval_node(*n.a, env), eval_node(*n.b, env));
            case Op::kMax: return std::max(eval_node(*n.a, env), eval_node(*n.b, env));
        }
        throw numerical_failure("Expression: corrupt node");
    }

    static bool mentions_s(const Node& n) {
        if (n.op == Op::kVarS) return true;
        if (n.a && mentions_s(*n.a)) return true;
        if (n.b && mentions_s(*n.b)) return true;
        return false;
    }

    class Parser {
    public:
        explicit Parser(const std::string& text) : text_(text) {}

        std::unique_ptr<Node> parse_expr() {
            auto lhs = parse_term();
            while (true) {
                skip_ws();
                if (match('+')) {
                    lhs = binary(Op::kAdd, std::move(lhs), parse_term());
                } else if (match('-')) {
                    lhs = binary(Op::kSub, std::move(lhs), parse_term());
                } else {
                    return lhs;
                }
            }
        }

        void expect_end() {
            skip_ws();
            if (pos_ != text_.size()) throw parse_error("unexpected trailing input", pos_);
        }

    private:
        std::unique_ptr<Node> parse_term() {
            auto lhs = parse_factor();
            while (true) {
                skip_ws();
                if (match('*')) {
                    lhs = binary(Op::kMul, std::move(lhs), parse_factor());
                } else if (match('/')) {
                    lhs = binary(Op::kDiv, std::move(lhs), parse_factor());
                } else {
                    return lhs;
                }
            }
        }

        std::unique_ptr<Node> parse_factor() {
            skip_ws();
            if (match('-')) {
                auto n = std::make_unique<Node>();
                n->op = Op::kNeg;
                n->a = parse_factor();
                return n;
            }
            auto base = parse_primary();
            skip_ws();
            if (match('^')) return binary(Op::kPow, std::move(base), parse_factor());
            return base;
        }

        std::unique_ptr<Node> parse_primary() {
            skip_ws();
            if (pos_ >= text_.size()) throw parse_error("unexpected end of expression", pos_);
            const char c = text_[pos_];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
            if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
            if (match('(')) {
                auto inner = parse_expr();
                skip_ws();
                if (!match(')')) throw parse_error("expected ')'", pos_);
                return inner;
            }
            throw parse_error(std::string("unexpected character '") + c + "'", pos_);
        }

        std::unique_ptr<Node> parse_number() {
            const std::size_t start = pos_;
            std::size_t consumed = 0;
            double value = 0.0;
            try {
                value = std::stod(text_.substr(start), &consumed);
            } catch (const std::exception&) {
                throw parse_error("malformed number", start);
            }
            pos_ = start + consumed;
            auto n = std::make_unique<Node>();
            n->op = Op::kConst;
            n->value = value;
            return n;
        }

        std::unique_ptr<Node> parse_ident() {
            const std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   std::isalnum(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
            const std::string name = text_.substr(start, pos_ - start);
            if (name == "x") return leaf(Op::kVarX);
            if (name == "y") return leaf(Op::kVarY);
            if (name == "s") return leaf(Op::kVarS);
            if (name == "exp") return call(Op::kExp, 1, start);
            if (name == "abs") return call(Op::kAbs, 1, start);
            if (name == "min") return call(Op::kMin, 2, start);
            if (name == "max") return call(Op::kMax, 2, start);
            throw parse_error("unknown identifier '" + name + "'", start);
        }

        std::unique_ptr<Node> leaf(Op op) {
            auto n = std::make_unique<Node>();
            n->op = op;
            return n;
        }

        std::unique_ptr<Node> call(Op op, int arity, std::size_t at) {
            skip_ws();
            if (!match('(')) throw parse_error("expected '(' after function name", pos_);
            auto n = std::make_unique<Node>();
            n->op = op;
            n->a = parse_expr();
            if (arity == 2) {
                skip_ws();
                if (!match(',')) throw parse_error("expected ',' between arguments", pos_);
                n->b = parse_expr();
            }
            skip_ws();
            if (!match(')')) throw parse_error("expected ')' to close call", at);
            return n;
        }

        std::unique_ptr<Node> binary(Op op, std::unique_ptr<Node> a, std::unique_ptr<Node> b) {
            auto n = std::make_unique<Node>();
            n->op = op;
            n->a = std::move(a);
            n->b = std::move(b);
            return n;
        }

        void skip_ws() {
            while (pos_ < text_.size() &&
                   std::isspace(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
        }

        bool match(char c) {
            if (pos_ < text_.size() && text_[pos_] == c) {
                ++pos_;
                return true;
            }
            return false;
        }

        const std::string& text_;
        std::size_t pos_ = 0;
    };

    std::string text_;
    std::shared_ptr<const Node> root_;  // shared: Expression is copyable
};

}  // namespace wdeg
