#include <catch2/catch_amalgamated.hpp>

#include "wdeg/expression.hpp"

using wdeg::ExprEnv;
using wdeg::Expression;

namespace {
double ev(const std::string& text, double x = 0.0, double y = 0.0, double s = 0.0) {
    ExprEnv env;
    env.x = x;
    env.y = y;
    env.s = s;
    return Expression::parse(text).eval(env);
}
}  // namespace

TEST_CASE("numbers and precedence") {
    REQUIRE(ev("2 + 3 * 4") == 14.0);
    REQUIRE(ev("(2 + 3) * 4") == 20.0);
    REQUIRE(ev("2 - 3 - 4") == -5.0);  // left associative
    REQUIRE(ev("12 / 3 / 2") == 2.0);
    REQUIRE(ev("1.5e2") == 150.0);
    REQUIRE(ev(".5 * 4") == 2.0);
}

TEST_CASE("power is right associative and binds tighter than unary minus") {
    REQUIRE(ev("2^3^2") == 512.0);
    REQUIRE(ev("-2^2") == -4.0);
    REQUIRE(ev("(-2)^2") == 4.0);
    REQUIRE(ev("2^-1") == 0.5);
    REQUIRE(ev("--3") == 3.0);
}

TEST_CASE("variables and functions") {
    REQUIRE(ev("x^2 + y", 3.0, 1.0) == 10.0);
    REQUIRE(ev("2 + exp(-s)", 0.0, 0.0, 0.0) == 3.0);
    REQUIRE(ev("abs(-4) + min(1, 2) + max(1, 2)") == 7.0);
    REQUIRE(ev("min(x, y) * max(x, y)", 2.0, 5.0) == 10.0);
}

TEST_CASE("depends_on_s detection") {
    REQUIRE(Expression::parse("x + y").depends_on_s() == false);
    REQUIRE(Expression::parse("x + exp(s)").depends_on_s() == true);
}

TEST_CASE("parse errors carry positions") {
    REQUIRE_THROWS_AS(Expression::parse("2 +"), wdeg::parse_error);
    REQUIRE_THROWS_AS(Expression::parse("foo(2)"), wdeg::parse_error);
    REQUIRE_THROWS_AS(Expression::parse("(1 + 2"), wdeg::parse_error);
    REQUIRE_THROWS_AS(Expression::parse("min(1)"), wdeg::parse_error);
    REQUIRE_THROWS_AS(Expression::parse("1 2"), wdeg::parse_error);
    try {
        Expression::parse("1 + $");
        FAIL("expected parse_error");
    } catch (const wdeg::parse_error& e) {
        REQUIRE(e.position == 4);
    }
}
