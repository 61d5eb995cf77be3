// Golden tests for the expression language: precedence, associativity,
// functions, constants, round-trip printing and error positions.

#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "nambugeo/expr.hpp"

using namespace nambugeo;

static int failures = 0;

static void check(bool ok, const std::string& what) {
    if (!ok) {
        std::printf("FAIL  %s\n", what.c_str());
        ++failures;
    }
}

static double eval_at(const std::string& text, const std::vector<double>& u,
                      const std::map<std::string, double>& consts = {}) {
    Expr e = parse(text);
    EvalEnv env;
    const int nv = std::max(max_param(e), 1);
    for (int a = 0; a < nv; ++a)
        env.params.push_back(
            Jet::variable(a, a < static_cast<int>(u.size()) ? u[a] : 0.0, nv, 2));
    env.constants = &consts;
    return evaluate(e, env).value();
}

static void expect_value(const std::string& text, double want,
                         const std::map<std::string, double>& consts = {},
                         const std::vector<double>& u = {}) {
    double got = eval_at(text, u, consts);
    if (std::abs(got - want) > 1e-12 * std::max(1.0, std::abs(want))) {
        std::printf("FAIL  %s = %.17g, expected %.17g\n", text.c_str(), got, want);
        ++failures;
    }
}

static void expect_parse_error(const std::string& text) {
    try {
        parse(text);
        std::printf("FAIL  parse(\"%s\") should have thrown\n", text.c_str());
        ++failures;
    } catch (const ParseError&) {
    }
}

int main() {
    const std::map<std::string, double> pi_map{{"pi", 3.141592653589793}};

    // Precedence and associativity.
    expect_value("2^3^2", 512.0);  // right-associative power
    expect_value("2+3*4", 14.0);
    expect_value("2*3+4/2", 8.0);
    expect_value("-2^2", -4.0);  // unary minus binds looser than ^
    expect_value("(-2)^2", 4.0);
    expect_value("(-2)^3", -8.0);  // integer exponent works on negatives
    expect_value("10-4-3", 3.0);   // left-associative subtraction
    expect_value("24/4/2", 3.0);
    expect_value("2^0.5", std::sqrt(2.0));

    // Functions and constants.
    expect_value("sin(pi/2)", 1.0, pi_map);
    expect_value("cos(0)", 1.0);
    expect_value("tan(0.3)", std::tan(0.3));
    expect_value("sinh(0.4)+cosh(0.4)", std::exp(0.4));
    expect_value("exp(log(5))", 5.0);
    expect_value("sqrt(16)", 4.0);
    expect_value("r*2", 6.0, {{"r", 3.0}});

    // Parameters.
    expect_value("u1^2-u2^2", 0.25 - 0.04, {}, {0.5, 0.2});
    expect_value("u1*u2", 0.1, {}, {0.5, 0.2});

    // Derivatives flow through evaluation.
    {
        Expr e = parse("u1^3+sin(u2)");
        EvalEnv env;
        env.params = {Jet::variable(0, 2.0, 2, 2), Jet::variable(1, 0.7, 2, 2)};
        Jet j = evaluate(e, env);
        check(std::abs(j.partial({1, 0}) - 12.0) < 1e-12, "d/du1 u1^3 at 2");
        check(std::abs(j.partial({0, 1}) - std::cos(0.7)) < 1e-12, "d/du2 sin(u2)");
        check(std::abs(j.partial({2, 0}) - 12.0) < 1e-12, "d2/du1^2 u1^3 at 2");
    }

    // Round trip through the printer.
    for (const std::string& text :
         {"u1^2-u2^2", "-(u1+u2)*u1", "sin(u1)*cos(u2)+3.5", "2^3^2", "u1/(u2+1)"}) {
        Expr e = parse(text);
        Expr back = parse(print(e));
        check(structurally_equal(e, back), "round trip of " + text);
    }

    // max_param.
    check(max_param(parse("3+4")) == 0, "max_param constant expr");
    check(max_param(parse("u2*u1")) == 2, "max_param u2*u1");
    check(max_param(parse("u3")) == 3, "max_param u3");

    // Ambient prefix.
    {
        Expr e = parse("x1*x4", 'x');
        check(max_param(e) == 4, "x-prefixed params");
        try {
            parse("u1", 'x');
            // "u1" under prefix 'x' is a lone constant name, still parses.
        } catch (const ParseError&) {
            std::printf("FAIL  u1 under x-prefix should parse as a constant\n");
            ++failures;
        }
    }

    // Malformed input.
    expect_parse_error("2+");
    expect_parse_error("sin 3");
    expect_parse_error("(2");
    expect_parse_error("");
    expect_parse_error("2**3");
    expect_parse_error("foo(2)");  // no user-defined functions
    expect_parse_error("2 3");     // no implicit multiplication

    // Error metadata.
    try {
        parse("1+*2");
        ++failures;
    } catch (const ParseError& e) {
        check(e.offset() == 2, "error offset of 1+*2");
    }

    // Unknown constant surfaces at evaluation, not parse.
    try {
        eval_at("bogus+1", {});
        std::printf("FAIL  unknown constant should throw\n");
        ++failures;
    } catch (const EvalError&) {
    }

    if (failures == 0) std::printf("expr: all tests passed\n");
    return failures == 0 ? 0 : 1;
}
