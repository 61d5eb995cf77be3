#pragma once

#include <initializer_list>
#include <vector>

// Forward-mode truncated-Taylor arithmetic ("jets") in up to 9 variables,
// derivative order capped at 3. A jet stores raw partial derivatives
// ∂^α f indexed by exponent vectors, not Taylor coefficients, so downstream
// tensor formulas read off ∂_a x^i etc. without factorial bookkeeping.

namespace nambugeo {

struct DerivIndex {
    std::vector<int> exponents;

    int degree() const {
        int d = 0;
        for (int e : exponents) d += e;
        return d;
    }
};

class Jet {
public:
    Jet() = default;

    static Jet constant(double c, int n_vars, int order);
    // Identity coordinate function: value base, first partial 1 at index.
    static Jet variable(int index, double base, int n_vars, int order);

    int n_vars() const { return n_vars_; }
    int order() const { return order_; }
    double value() const { return c_[0]; }

    // Raw partial ∂^α f. Degree of idx must not exceed the jet order.
    double partial(const DerivIndex& idx) const;
    double partial(std::initializer_list<int> exponents) const;

    // Same function, lower truncation order.
    Jet truncated(int new_order) const;

    // Jet of ∂_var f, one order lower.
    Jet derivative(int var) const;

    Jet operator-() const;
    Jet& operator+=(const Jet& o);
    Jet& operator-=(const Jet& o);

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator*(const Jet& a, const Jet& b);
    friend Jet operator/(const Jet& a, const Jet& b);

    friend Jet operator*(double s, Jet a);
    friend Jet operator*(Jet a, double s) { return s * std::move(a); }
    friend Jet operator+(Jet a, double s);
    friend Jet operator+(double s, Jet a) { return std::move(a) + s; }
    friend Jet operator-(Jet a, double s) { return std::move(a) + (-s); }

    friend Jet apply_univariate_table(const Jet& a, const double* d);
    friend Jet compose(const Jet& outer, const std::vector<Jet>& inners);

private:
    Jet(int n_vars, int order);

    int n_vars_ = 1;
    int order_ = 0;
    std::vector<double> c_;
};

enum class UnivariateFn { sin, cos, exp, log, sqrt, neg };

// Chain rule through the jet's order. log and sqrt require a.value > 0.
Jet apply_univariate(const Jet& a, UnivariateFn f);

// a^r via the chain rule. Non-integral r requires a.value > 0; integral r
// only excludes 0^negative.
Jet apply_pow(const Jet& a, double r);

// Multivariate chain rule: outer is a jet in m ambient variables evaluated
// at (inners[0].value(), ..., inners[m-1].value()); the caller is
// responsible for that base-point agreement since jets do not carry their
// expansion point. All orders must match.
Jet compose(const Jet& outer, const std::vector<Jet>& inners);

// Determinant of a row-major k x k jet matrix, k <= 3.
Jet jet_det(const std::vector<Jet>& a, int k);

// Gauss-Jordan inverse of a row-major k x k jet matrix, pivoting on the
// largest entry value. Throws std::domain_error when singular.
std::vector<Jet> jet_mat_inverse(std::vector<Jet> a, int k);

}  // namespace nambugeo
