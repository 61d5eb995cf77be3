#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "nambugeo/jet.hpp"

// Expression language for embedding coordinates, densities and ambient
// metric components. Grammar (loosest to tightest binding):
//
//   expr  := term  (('+' | '-') term)*
//   term  := unary (('*' | '/') unary)*
//   unary := '-' unary | power
//   power := atom ('^' unary)?          right-associative
//   atom  := number | param | constant | fn '(' expr ')' | '(' expr ')'
//
// Parameters are u1..u9 (or another single-letter prefix, used for ambient
// variables x1..x9). Any other identifier is a named constant resolved at
// evaluation time. No implicit multiplication; angles in radians.

namespace nambugeo {

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t offset, std::string message, std::string expected)
        : std::runtime_error(message + " at offset " + std::to_string(offset)),
          offset_(offset), message_(std::move(message)), expected_(std::move(expected)) {}

    std::size_t offset() const { return offset_; }
    const std::string& message() const { return message_; }
    const std::string& expected() const { return expected_; }

private:
    std::size_t offset_;
    std::string message_;
    std::string expected_;
};

class EvalError : public std::runtime_error {
public:
    explicit EvalError(const std::string& message) : std::runtime_error(message) {}
};

enum class FnName { sin, cos, tan, sinh, cosh, exp, log, sqrt };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    enum class Kind { number, param, constant, neg, add, sub, mul, div, pow, call };

    Kind kind;
    double number = 0.0;       // number
    int param_index = 0;       // param, 0-based
    std::string name;          // constant
    FnName fn = FnName::sin;   // call
    ExprPtr a, b;              // operands
};

class Expr {
public:
    Expr() = default;
    explicit Expr(ExprPtr root) : root_(std::move(root)) {}

    const ExprNode* node() const { return root_.get(); }
    bool empty() const { return root_ == nullptr; }

private:
    ExprPtr root_;
};

// Throws ParseError on malformed input. param_prefix selects the parameter
// letter: 'u' for surface parameters, 'x' for ambient coordinates.
Expr parse(const std::string& text, char param_prefix = 'u');

// Precedence-aware printer; parse(print(e)) reproduces e.
std::string print(const Expr& e, char param_prefix = 'u');

bool structurally_equal(const Expr& a, const Expr& b);

// 1 + highest parameter index used, 0 when none appear.
int max_param(const Expr& e);

struct EvalEnv {
    std::vector<Jet> params;                    // one jet per parameter
    const std::map<std::string, double>* constants = nullptr;
};

// Recursive evaluation through jet arithmetic. Integer-literal exponents
// expand to repeated multiplication; other exponents go through exp/log and
// need a positive base. Domain errors from jets propagate as-is; unknown
// constants and out-of-range parameters raise EvalError.
Jet evaluate(const Expr& e, const EvalEnv& env);

}  // namespace nambugeo
