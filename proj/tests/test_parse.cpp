#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "sbmiqp/bench.hpp"
#include "sbmiqp/errors.hpp"
#include "sbmiqp/parse.hpp"

using namespace sbmiqp;

namespace {

const std::map<std::string, int> kVars = {{"x", 0}, {"y1", 1}, {"y2", 2}};

double eval1(const Expr& e, double x, double y1 = 0.0, double y2 = 0.0) {
    Eigen::VectorXd z(3);
    z << x, y1, y2;
    Tape t({e}, 3);
    return t.values(z)[0];
}

const char* kTutorialJson = R"json({
  "variables": [
    {"name": "x", "kind": "continuous"},
    {"name": "y1", "kind": "integer", "bounds": [-10, 10]},
    {"name": "y2", "kind": "integer", "bounds": [-10, 10]}
  ],
  "objective": "(y1 - 4.1)^2 + (y2 - 4)^2 + 1000*x",
  "constraints": [
    {"expr": "y1^2 + y2^2 - 9 - x", "cmp": "<=", "rhs": 0},
    {"expr": "-x", "cmp": "<=", "rhs": 0}
  ],
  "objective_split": {
    "f1": ["1.4142135623730951*(y1 - 4.1)", "1.4142135623730951*(y2 - 4)"],
    "f2": "1000*x"
  },
  "convex": true
})json";

} // namespace

TEST_CASE("expression grammar: precedence and associativity") {
    CHECK(eval1(parse_expression("1 + 2 * 3", kVars), 0.0) == doctest::Approx(7.0));
    CHECK(eval1(parse_expression("2 ^ 3 ^ 2", kVars), 0.0) == doctest::Approx(512.0));
    CHECK(eval1(parse_expression("-x^2", kVars), 3.0) == doctest::Approx(-9.0));
    CHECK(eval1(parse_expression("(1 + 2) * 3", kVars), 0.0) == doctest::Approx(9.0));
    CHECK(eval1(parse_expression("6 / 3 / 2", kVars), 0.0) == doctest::Approx(1.0));
    CHECK(eval1(parse_expression("2^-1", kVars), 0.0) == doctest::Approx(0.5));
    CHECK(eval1(parse_expression("1 - 2 - 3", kVars), 0.0) == doctest::Approx(-4.0));
}

TEST_CASE("expression grammar: functions and numbers") {
    CHECK(eval1(parse_expression("exp(0) + log(1) + sin(0) + cos(0)", kVars), 0.0) ==
          doctest::Approx(2.0));
    CHECK(eval1(parse_expression("sqrt(x)", kVars), 16.0) == doctest::Approx(4.0));
    CHECK(eval1(parse_expression("1.5e2 + .5", kVars), 0.0) == doctest::Approx(150.5));
    CHECK(eval1(parse_expression("2e-2", kVars), 0.0) == doctest::Approx(0.02));
}

TEST_CASE("expression grammar: diagnostics") {
    CHECK_THROWS_AS(parse_expression("y1 +* 2", kVars), ParseError);
    CHECK_THROWS_AS(parse_expression("y1 + ", kVars), ParseError);
    CHECK_THROWS_AS(parse_expression("(y1 + 2", kVars), ParseError);
    CHECK_THROWS_AS(parse_expression("unknown + 1", kVars), ParseError);
    CHECK_THROWS_AS(parse_expression("tan(y1)", kVars), ParseError);
    CHECK_THROWS_AS(parse_expression("y1 2", kVars), ParseError);
    try {
        parse_expression("y1 +* 2", kVars);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("column") != std::string::npos);
    }
}

TEST_CASE("tutorial round-trips through JSON to identical evaluations") {
    ModelMinlp parsed = parse_problem_string(kTutorialJson);
    ModelMinlp built = tutorial_problem();
    CHECK(parsed.nx == built.nx);
    CHECK(parsed.ny == built.ny);
    CHECK(parsed.declared_convex);
    CHECK(parsed.y_lo.isApprox(built.y_lo));
    CHECK(parsed.y_hi.isApprox(built.y_hi));
    REQUIRE(parsed.split.has_value());
    REQUIRE(parsed.n_g() == built.n_g());

    Eigen::VectorXd x(1), y(2);
    for (double yv : {-3.0, 0.0, 2.0, 4.5}) {
        x << yv * yv / 2.0 + 1.0;
        y << yv, -yv + 1.0;
        EvalResult a = evaluate(parsed, x, y);
        EvalResult b = evaluate(built, x, y);
        CHECK(a.f == doctest::Approx(b.f).epsilon(1e-12));
        for (int i = 0; i < a.g.size(); ++i)
            CHECK(a.g[i] == doctest::Approx(b.g[i]).epsilon(1e-12));
    }
}

TEST_CASE("schema errors") {
    CHECK_THROWS_AS(parse_problem_string("{ not json"), ParseError);
    CHECK_THROWS_AS(parse_problem_string(R"({"objective": "1"})"), SchemaError);
    // integer variable without bounds
    CHECK_THROWS_AS(parse_problem_string(R"({
        "variables": [{"name": "y", "kind": "integer"}],
        "objective": "y"})"),
                    SchemaError);
    // integer variable with infinite bounds
    CHECK_THROWS_AS(parse_problem_string(R"({
        "variables": [{"name": "y", "kind": "integer", "bounds": ["-inf", 3]}],
        "objective": "y"})"),
                    SchemaError);
    CHECK_THROWS_AS(parse_problem_string(R"({
        "variables": [{"name": "y", "kind": "binary", "bounds": [0, 1]}],
        "objective": "y"})"),
                    SchemaError);
    CHECK_THROWS_AS(parse_problem_string(R"({
        "variables": [{"name": "y", "kind": "integer", "bounds": [0, 1]},
                      {"name": "y", "kind": "integer", "bounds": [0, 1]}],
        "objective": "y"})"),
                    SchemaError);
    CHECK_THROWS_AS(parse_problem_string(R"({
        "variables": [{"name": "y", "kind": "integer", "bounds": [0, 1]}],
        "objective": "y",
        "constraints": [{"expr": "y", "cmp": "<", "rhs": 0}]})"),
                    SchemaError);
}

TEST_CASE("rhs and comparator handling") {
    ModelMinlp m = parse_problem_string(R"({
        "variables": [{"name": "x", "bounds": [0, 5]},
                      {"name": "y", "kind": "integer", "bounds": [0, 3]}],
        "objective": "x + y",
        "constraints": [{"expr": "x + 2*y", "cmp": "<=", "rhs": 4},
                        {"expr": "x - y", "cmp": "=", "rhs": 1}]})");
    CHECK(m.nx == 1);
    CHECK(m.ny == 1);
    REQUIRE(m.n_g() == 1);
    REQUIRE(m.n_h() == 1);
    Eigen::VectorXd x(1), y(1);
    x << 3.0;
    y << 2.0;
    EvalResult r = evaluate(m, x, y);
    CHECK(r.g[0] == doctest::Approx(3.0));  // 3 + 4 - 4
    CHECK(r.h[0] == doctest::Approx(0.0));  // 3 - 2 - 1
    CHECK_FALSE(m.declared_convex);
}

TEST_CASE("missing file raises ParseError") {
    CHECK_THROWS_AS(parse_problem("/nonexistent/problem.json"), ParseError);
}
