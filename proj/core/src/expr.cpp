#include "nambugeo/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>

namespace nambugeo {

namespace {

const std::map<std::string, FnName>& function_names() {
    static const std::map<std::string, FnName> fns = {
        {"sin", FnName::sin},   {"cos", FnName::cos},   {"tan", FnName::tan},
        {"sinh", FnName::sinh}, {"cosh", FnName::cosh}, {"exp", FnName::exp},
        {"log", FnName::log},   {"sqrt", FnName::sqrt},
    };
    return fns;
}

ExprPtr make(ExprNode n) { return std::make_shared<ExprNode>(std::move(n)); }

ExprPtr make_binary(ExprNode::Kind k, ExprPtr a, ExprPtr b) {
    ExprNode n;
    n.kind = k;
    n.a = std::move(a);
    n.b = std::move(b);
    return make(std::move(n));
}

class Parser {
public:
    Parser(const std::string& text, char prefix) : s_(text), prefix_(prefix) {}

    ExprPtr run() {
        ExprPtr e = parse_expr();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected trailing input", "end of input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg, const std::string& expected) {
        throw ParseError(pos_, msg, expected);
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) { ++pos_; return true; }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    ExprPtr parse_expr() {
        ExprPtr e = parse_term();
        for (;;) {
            if (eat('+')) e = make_binary(ExprNode::Kind::add, e, parse_term());
            else if (eat('-')) e = make_binary(ExprNode::Kind::sub, e, parse_term());
            else return e;
        }
    }

    ExprPtr parse_term() {
        ExprPtr e = parse_unary();
        for (;;) {
            if (eat('*')) e = make_binary(ExprNode::Kind::mul, e, parse_unary());
            else if (eat('/')) e = make_binary(ExprNode::Kind::div, e, parse_unary());
            else return e;
        }
    }

    ExprPtr parse_unary() {
        if (eat('-')) {
            ExprNode n;
            n.kind = ExprNode::Kind::neg;
            n.a = parse_unary();
            return make(std::move(n));
        }
        return parse_power();
    }

    ExprPtr parse_power() {
        ExprPtr base = parse_atom();
        if (eat('^')) return make_binary(ExprNode::Kind::pow, base, parse_unary());
        return base;
    }

    ExprPtr parse_atom() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input", "number, identifier or '('");
        const char c = s_[pos_];

        if (c == '(') {
            ++pos_;
            ExprPtr e = parse_expr();
            if (!eat(')')) fail("unbalanced parenthesis", "')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        fail(std::string("unexpected character '") + c + "'", "number, identifier or '('");
    }

    ExprPtr parse_number() {
        double v = 0.0;
        const char* begin = s_.data() + pos_;
        const char* end = s_.data() + s_.size();
        auto [ptr, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc()) fail("malformed number", "number");
        pos_ += static_cast<std::size_t>(ptr - begin);
        // reject implicit multiplication like "2u1"
        if (pos_ < s_.size()) {
            const char nx = s_[pos_];
            if (std::isalpha(static_cast<unsigned char>(nx)) || nx == '_')
                fail("missing operator before identifier", "operator");
        }
        ExprNode n;
        n.kind = ExprNode::Kind::number;
        n.number = v;
        return make(std::move(n));
    }

    ExprPtr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        const std::string name = s_.substr(start, pos_ - start);

        if (name.size() == 2 && name[0] == prefix_ && name[1] >= '1' && name[1] <= '9') {
            ExprNode n;
            n.kind = ExprNode::Kind::param;
            n.param_index = name[1] - '1';
            return make(std::move(n));
        }
        if (auto it = function_names().find(name); it != function_names().end()) {
            if (!eat('(')) {
                pos_ = start;
                fail("function name '" + name + "' needs an argument list", "'('");
            }
            ExprPtr arg = parse_expr();
            if (!eat(')')) fail("unbalanced parenthesis in call", "')'");
            ExprNode n;
            n.kind = ExprNode::Kind::call;
            n.fn = it->second;
            n.a = std::move(arg);
            return make(std::move(n));
        }
        ExprNode n;
        n.kind = ExprNode::Kind::constant;
        n.name = name;
        return make(std::move(n));
    }

    const std::string& s_;
    char prefix_;
    std::size_t pos_ = 0;
};

const char* fn_name(FnName f) {
    switch (f) {
        case FnName::sin: return "sin";
        case FnName::cos: return "cos";
        case FnName::tan: return "tan";
        case FnName::sinh: return "sinh";
        case FnName::cosh: return "cosh";
        case FnName::exp: return "exp";
        case FnName::log: return "log";
        case FnName::sqrt: return "sqrt";
    }
    return "?";
}

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

// binding strength for the printer; higher binds tighter
int prec(ExprNode::Kind k) {
    switch (k) {
        case ExprNode::Kind::add:
        case ExprNode::Kind::sub: return 1;
        case ExprNode::Kind::mul:
        case ExprNode::Kind::div: return 2;
        case ExprNode::Kind::neg: return 3;
        case ExprNode::Kind::pow: return 4;
        default: return 5;
    }
}

void print_node(const ExprNode* n, char prefix, std::string& out);

void print_child(const ExprNode* child, char prefix, int parent_prec, bool tighten,
                 std::string& out) {
    const bool parens = prec(child->kind) < parent_prec + (tighten ? 1 : 0);
    if (parens) out += '(';
    print_node(child, prefix, out);
    if (parens) out += ')';
}

void print_node(const ExprNode* n, char prefix, std::string& out) {
    switch (n->kind) {
        case ExprNode::Kind::number:
            if (n->number < 0) {
                out += '(';
                out += format_double(n->number);
                out += ')';
            } else {
                out += format_double(n->number);
            }
            break;
        case ExprNode::Kind::param:
            out += prefix;
            out += static_cast<char>('1' + n->param_index);
            break;
        case ExprNode::Kind::constant:
            out += n->name;
            break;
        case ExprNode::Kind::neg:
            out += '-';
            print_child(n->a.get(), prefix, prec(n->kind), true, out);
            break;
        case ExprNode::Kind::add:
        case ExprNode::Kind::sub:
        case ExprNode::Kind::mul:
        case ExprNode::Kind::div: {
            const int p = prec(n->kind);
            print_child(n->a.get(), prefix, p, false, out);
            out += n->kind == ExprNode::Kind::add   ? '+'
                   : n->kind == ExprNode::Kind::sub ? '-'
                   : n->kind == ExprNode::Kind::mul ? '*'
                                                    : '/';
            print_child(n->b.get(), prefix, p, true, out);
            break;
        }
        case ExprNode::Kind::pow: {
            const int p = prec(n->kind);
            print_child(n->a.get(), prefix, p, true, out);  // left side binds tighter
            out += '^';
            print_child(n->b.get(), prefix, p, false, out);
            break;
        }
        case ExprNode::Kind::call:
            out += fn_name(n->fn);
            out += '(';
            print_node(n->a.get(), prefix, out);
            out += ')';
            break;
    }
}

// Detects integer-literal exponents, including a negated literal.
bool integer_literal(const ExprNode* n, long& k) {
    if (n->kind == ExprNode::Kind::neg) {
        if (!integer_literal(n->a.get(), k)) return false;
        k = -k;
        return true;
    }
    if (n->kind != ExprNode::Kind::number) return false;
    if (std::nearbyint(n->number) != n->number || std::abs(n->number) > 1e9) return false;
    k = static_cast<long>(n->number);
    return true;
}

Jet eval_node(const ExprNode* n, const EvalEnv& env) {
    switch (n->kind) {
        case ExprNode::Kind::number: {
            const Jet& any = env.params.front();
            return Jet::constant(n->number, any.n_vars(), any.order());
        }
        case ExprNode::Kind::param:
            if (n->param_index >= static_cast<int>(env.params.size()))
                throw EvalError("parameter index " + std::to_string(n->param_index + 1) +
                                " exceeds the declared parameter count");
            return env.params[n->param_index];
        case ExprNode::Kind::constant: {
            if (env.constants != nullptr) {
                if (auto it = env.constants->find(n->name); it != env.constants->end()) {
                    const Jet& any = env.params.front();
                    return Jet::constant(it->second, any.n_vars(), any.order());
                }
            }
            throw EvalError("unknown constant '" + n->name + "'");
        }
        case ExprNode::Kind::neg:
            return -eval_node(n->a.get(), env);
        case ExprNode::Kind::add:
            return eval_node(n->a.get(), env) + eval_node(n->b.get(), env);
        case ExprNode::Kind::sub:
            return eval_node(n->a.get(), env) - eval_node(n->b.get(), env);
        case ExprNode::Kind::mul:
            return eval_node(n->a.get(), env) * eval_node(n->b.get(), env);
        case ExprNode::Kind::div:
            return eval_node(n->a.get(), env) / eval_node(n->b.get(), env);
        case ExprNode::Kind::pow: {
            Jet base = eval_node(n->a.get(), env);
            long k = 0;
            if (integer_literal(n->b.get(), k)) {
                Jet r = Jet::constant(1.0, base.n_vars(), base.order());
                for (long i = 0; i < std::labs(k); ++i) r = r * base;
                if (k < 0) r = Jet::constant(1.0, base.n_vars(), base.order()) / r;
                return r;
            }
            Jet expo = eval_node(n->b.get(), env);
            if (base.value() <= 0.0)
                throw EvalError("pow needs a positive base unless the exponent is an integer literal");
            return apply_univariate(expo * apply_univariate(base, UnivariateFn::log),
                                    UnivariateFn::exp);
        }
        case ExprNode::Kind::call: {
            Jet a = eval_node(n->a.get(), env);
            switch (n->fn) {
                case FnName::sin: return apply_univariate(a, UnivariateFn::sin);
                case FnName::cos: return apply_univariate(a, UnivariateFn::cos);
                case FnName::exp: return apply_univariate(a, UnivariateFn::exp);
                case FnName::log: return apply_univariate(a, UnivariateFn::log);
                case FnName::sqrt: return apply_univariate(a, UnivariateFn::sqrt);
                case FnName::tan:
                    return apply_univariate(a, UnivariateFn::sin) /
                           apply_univariate(a, UnivariateFn::cos);
                case FnName::sinh: {
                    Jet e = apply_univariate(a, UnivariateFn::exp);
                    return 0.5 * (e - Jet::constant(1.0, a.n_vars(), a.order()) / e);
                }
                case FnName::cosh: {
                    Jet e = apply_univariate(a, UnivariateFn::exp);
                    return 0.5 * (e + Jet::constant(1.0, a.n_vars(), a.order()) / e);
                }
            }
            throw EvalError("unhandled function");
        }
    }
    throw EvalError("unhandled expression node");
}

bool equal_nodes(const ExprNode* a, const ExprNode* b) {
    if (a == b) return true;
    if (a == nullptr || b == nullptr || a->kind != b->kind) return false;
    switch (a->kind) {
        case ExprNode::Kind::number: return a->number == b->number;
        case ExprNode::Kind::param: return a->param_index == b->param_index;
        case ExprNode::Kind::constant: return a->name == b->name;
        case ExprNode::Kind::call:
            return a->fn == b->fn && equal_nodes(a->a.get(), b->a.get());
        case ExprNode::Kind::neg: return equal_nodes(a->a.get(), b->a.get());
        default:
            return equal_nodes(a->a.get(), b->a.get()) && equal_nodes(a->b.get(), b->b.get());
    }
}

int max_param_node(const ExprNode* n) {
    if (n == nullptr) return 0;
    int m = n->kind == ExprNode::Kind::param ? n->param_index + 1 : 0;
    m = std::max(m, max_param_node(n->a.get()));
    return std::max(m, max_param_node(n->b.get()));
}

}  // namespace

Expr parse(const std::string& text, char param_prefix) {
    return Expr(Parser(text, param_prefix).run());
}

std::string print(const Expr& e, char param_prefix) {
    std::string out;
    if (!e.empty()) print_node(e.node(), param_prefix, out);
    return out;
}

bool structurally_equal(const Expr& a, const Expr& b) { return equal_nodes(a.node(), b.node()); }

int max_param(const Expr& e) { return max_param_node(e.node()); }

Jet evaluate(const Expr& e, const EvalEnv& env) {
    if (e.empty()) throw EvalError("empty expression");
    if (env.params.empty()) throw EvalError("evaluation needs at least one parameter jet");
    return eval_node(e.node(), env);
}

}  // namespace nambugeo
