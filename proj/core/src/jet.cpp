#include "nambugeo/jet.hpp"

#include <array>
#include <cmath>
#include <map>
#include <stdexcept>

namespace nambugeo {

namespace {

constexpr int kMaxOrder = 3;
constexpr int kMaxVars = 9;

// Enumeration of exponent vectors with degree <= order, graded then
// lexicographic. Tables are built once per (n_vars, order) pair and then
// only read, so concurrent use after first touch is safe.
struct IndexTable {
    int n_vars = 0;
    int order = 0;
    std::vector<std::vector<int>> exps;          // position -> exponents
    std::map<std::vector<int>, int> pos;         // exponents -> position
    // mul_terms[p] lists (q, r, binom) with exps[q] + exps[r] == exps[p].
    std::vector<std::vector<std::array<int, 3>>> mul_terms;

    int position(const std::vector<int>& e) const {
        auto it = pos.find(e);
        return it == pos.end() ? -1 : it->second;
    }
};

void enumerate(int n_vars, int degree_left, std::vector<int>& cur,
               std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == n_vars) {
        out.push_back(cur);
        return;
    }
    for (int e = 0; e <= degree_left; ++e) {
        cur.push_back(e);
        enumerate(n_vars, degree_left - e, cur, out);
        cur.pop_back();
    }
}

int binom(int n, int k) {
    if (k < 0 || k > n) return 0;
    int r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - i + 1) / i;
    return r;
}

IndexTable build_table(int n_vars, int order) {
    IndexTable t;
    t.n_vars = n_vars;
    t.order = order;
    std::vector<std::vector<int>> all;
    std::vector<int> cur;
    enumerate(n_vars, order, cur, all);
    // graded sort: degree first, lexicographic inside a degree
    std::vector<std::vector<int>> by_degree;
    for (int d = 0; d <= order; ++d)
        for (const auto& e : all) {
            int deg = 0;
            for (int x : e) deg += x;
            if (deg == d) by_degree.push_back(e);
        }
    t.exps = std::move(by_degree);
    for (int p = 0; p < static_cast<int>(t.exps.size()); ++p) t.pos[t.exps[p]] = p;

    t.mul_terms.resize(t.exps.size());
    for (int p = 0; p < static_cast<int>(t.exps.size()); ++p) {
        const auto& alpha = t.exps[p];
        // walk all beta <= alpha componentwise
        std::vector<int> beta(n_vars, 0);
        for (;;) {
            std::vector<int> gamma(n_vars);
            int coeff = 1;
            for (int v = 0; v < n_vars; ++v) {
                gamma[v] = alpha[v] - beta[v];
                coeff *= binom(alpha[v], beta[v]);
            }
            t.mul_terms[p].push_back({t.pos.at(beta), t.pos.at(gamma), coeff});
            int v = 0;
            while (v < n_vars && beta[v] == alpha[v]) beta[v++] = 0;
            if (v == n_vars) break;
            ++beta[v];
        }
    }
    return t;
}

const IndexTable& table(int n_vars, int order) {
    static const auto* tables = [] {
        auto* ts = new std::map<std::pair<int, int>, IndexTable>;
        for (int n = 1; n <= kMaxVars; ++n)
            for (int k = 0; k <= kMaxOrder; ++k) (*ts)[{n, k}] = build_table(n, k);
        return ts;
    }();
    return tables->at({n_vars, order});
}

void check_shape(const Jet& a, const Jet& b) {
    if (a.n_vars() != b.n_vars() || a.order() != b.order())
        throw std::invalid_argument("jet shape mismatch");
}

}  // namespace

Jet::Jet(int n_vars, int order) : n_vars_(n_vars), order_(order) {
    if (n_vars < 1 || n_vars > kMaxVars) throw std::invalid_argument("jet: bad n_vars");
    if (order < 0 || order > kMaxOrder) throw std::invalid_argument("jet: bad order");
    c_.assign(table(n_vars, order).exps.size(), 0.0);
}

Jet Jet::constant(double c, int n_vars, int order) {
    Jet j(n_vars, order);
    j.c_[0] = c;
    return j;
}

Jet Jet::variable(int index, double base, int n_vars, int order) {
    if (index < 0 || index >= n_vars) throw std::invalid_argument("jet: variable index out of range");
    Jet j(n_vars, order);
    j.c_[0] = base;
    if (order >= 1) {
        std::vector<int> e(n_vars, 0);
        e[index] = 1;
        j.c_[table(n_vars, order).position(e)] = 1.0;
    }
    return j;
}

double Jet::partial(const DerivIndex& idx) const {
    if (static_cast<int>(idx.exponents.size()) != n_vars_)
        throw std::invalid_argument("partial: index arity mismatch");
    if (idx.degree() > order_) throw std::invalid_argument("partial: degree exceeds jet order");
    return c_[table(n_vars_, order_).position(idx.exponents)];
}

double Jet::partial(std::initializer_list<int> exponents) const {
    return partial(DerivIndex{std::vector<int>(exponents)});
}

Jet Jet::truncated(int new_order) const {
    if (new_order > order_) throw std::invalid_argument("truncated: cannot raise order");
    if (new_order == order_) return *this;
    Jet r(n_vars_, new_order);
    const auto& tr = table(n_vars_, new_order);
    const auto& ts = table(n_vars_, order_);
    for (std::size_t p = 0; p < tr.exps.size(); ++p) r.c_[p] = c_[ts.pos.at(tr.exps[p])];
    return r;
}

Jet Jet::derivative(int var) const {
    if (order_ < 1) throw std::invalid_argument("derivative: order-0 jet");
    if (var < 0 || var >= n_vars_) throw std::invalid_argument("derivative: bad variable");
    Jet r(n_vars_, order_ - 1);
    const auto& tr = table(n_vars_, order_ - 1);
    const auto& ts = table(n_vars_, order_);
    for (std::size_t p = 0; p < tr.exps.size(); ++p) {
        auto e = tr.exps[p];
        ++e[var];
        r.c_[p] = c_[ts.pos.at(e)];
    }
    return r;
}

Jet Jet::operator-() const {
    Jet r = *this;
    for (double& v : r.c_) v = -v;
    return r;
}

Jet& Jet::operator+=(const Jet& o) {
    check_shape(*this, o);
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
    return *this;
}

Jet& Jet::operator-=(const Jet& o) {
    check_shape(*this, o);
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
    return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
    check_shape(a, b);
    Jet r(a.n_vars_, a.order_);
    const auto& t = table(a.n_vars_, a.order_);
    for (std::size_t p = 0; p < r.c_.size(); ++p) {
        double s = 0.0;
        for (const auto& [q, g, coeff] : t.mul_terms[p]) s += coeff * a.c_[q] * b.c_[g];
        r.c_[p] = s;
    }
    return r;
}

Jet operator*(double s, Jet a) {
    for (double& v : a.c_) v *= s;
    return a;
}

Jet operator+(Jet a, double s) {
    a.c_[0] += s;
    return a;
}

// d holds f, f', f'', f''' at a.value (entries beyond a.order unused).
Jet apply_univariate_table(const Jet& a, const double* d) {
    const int k = a.order_;
    Jet centered = a;
    centered.c_[0] = 0.0;
    Jet r = Jet::constant(d[0], a.n_vars_, k);
    if (k >= 1) r += d[1] * centered;
    if (k >= 2) {
        Jet c2 = centered * centered;
        r += (d[2] / 2.0) * c2;
        if (k >= 3) r += (d[3] / 6.0) * (c2 * centered);
    }
    return r;
}

Jet apply_univariate(const Jet& a, UnivariateFn f) {
    const double v = a.value();
    double d[4] = {0, 0, 0, 0};
    switch (f) {
        case UnivariateFn::neg:
            return -a;
        case UnivariateFn::sin:
            d[0] = std::sin(v); d[1] = std::cos(v); d[2] = -d[0]; d[3] = -d[1];
            break;
        case UnivariateFn::cos:
            d[0] = std::cos(v); d[1] = -std::sin(v); d[2] = -d[0]; d[3] = -d[1];
            break;
        case UnivariateFn::exp:
            d[0] = d[1] = d[2] = d[3] = std::exp(v);
            break;
        case UnivariateFn::log:
            if (v <= 0.0) throw std::domain_error("log of non-positive value");
            d[0] = std::log(v); d[1] = 1.0 / v; d[2] = -1.0 / (v * v); d[3] = 2.0 / (v * v * v);
            break;
        case UnivariateFn::sqrt: {
            if (v <= 0.0) throw std::domain_error("sqrt of non-positive value");
            const double s = std::sqrt(v);
            d[0] = s; d[1] = 0.5 / s; d[2] = -0.25 / (s * v); d[3] = 0.375 / (s * v * v);
            break;
        }
    }
    return apply_univariate_table(a, d);
}

Jet apply_pow(const Jet& a, double r) {
    const double v = a.value();
    const bool integral = std::nearbyint(r) == r && std::abs(r) < 1e15;
    if (!integral && v <= 0.0) throw std::domain_error("pow of non-positive base with non-integer exponent");
    if (integral && v == 0.0 && r < 0.0) throw std::domain_error("zero base with negative exponent");
    double d[4];
    double coeff = 1.0;
    for (int k = 0; k <= a.order(); ++k) {
        d[k] = coeff == 0.0 ? 0.0 : coeff * std::pow(v, r - k);
        coeff *= (r - k);
    }
    return apply_univariate_table(a, d);
}

Jet operator/(const Jet& a, const Jet& b) {
    check_shape(a, b);
    const double v = b.value();
    if (v == 0.0) throw std::domain_error("division by zero value");
    double d[4] = {1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v), -6.0 / (v * v * v * v)};
    return a * apply_univariate_table(b, d);
}

Jet compose(const Jet& outer, const std::vector<Jet>& inners) {
    const int m = outer.n_vars_;
    if (static_cast<int>(inners.size()) != m)
        throw std::invalid_argument("compose: arity mismatch");
    const int k = outer.order_;
    const int n = inners.front().n_vars_;
    for (const Jet& g : inners)
        if (g.n_vars() != n || g.order() != k)
            throw std::invalid_argument("compose: inner jet shape mismatch");

    // Truncated Taylor expansion of the outer function around the inner
    // values: sum_beta F_beta / beta! * prod_i (g_i - g_i(0))^{beta_i}.
    std::vector<std::vector<Jet>> powers(m);
    for (int i = 0; i < m; ++i) {
        Jet centered = inners[i];
        centered.c_[0] = 0.0;
        powers[i].push_back(Jet::constant(1.0, n, k));
        for (int e = 1; e <= k; ++e) powers[i].push_back(powers[i][e - 1] * centered);
    }

    const auto& t = table(m, k);
    Jet r = Jet::constant(0.0, n, k);
    for (std::size_t p = 0; p < t.exps.size(); ++p) {
        const double f = outer.c_[p];
        if (f == 0.0) continue;
        double fact = 1.0;
        Jet term = Jet::constant(1.0, n, k);
        for (int i = 0; i < m; ++i) {
            const int e = t.exps[p][i];
            for (int j = 1; j <= e; ++j) fact *= j;
            if (e > 0) term = term * powers[i][e];
        }
        r += (f / fact) * term;
    }
    return r;
}

Jet jet_det(const std::vector<Jet>& a, int k) {
    if (k == 1) return a[0];
    if (k == 2) return a[0] * a[3] - a[1] * a[2];
    if (k != 3) throw std::invalid_argument("jet_det: size must be 1, 2 or 3");
    Jet d = a[0] * (a[4] * a[8] - a[5] * a[7]);
    d -= a[1] * (a[3] * a[8] - a[5] * a[6]);
    d += a[2] * (a[3] * a[7] - a[4] * a[6]);
    return d;
}

std::vector<Jet> jet_mat_inverse(std::vector<Jet> a, int k) {
    const int nv = a[0].n_vars();
    const int ord = a[0].order();
    std::vector<Jet> inv(k * k, Jet::constant(0.0, nv, ord));
    for (int i = 0; i < k; ++i) inv[i * k + i] = Jet::constant(1.0, nv, ord);

    for (int c = 0; c < k; ++c) {
        int piv = c;
        for (int r = c + 1; r < k; ++r)
            if (std::abs(a[r * k + c].value()) > std::abs(a[piv * k + c].value())) piv = r;
        if (std::abs(a[piv * k + c].value()) < 1e-14)
            throw std::domain_error("jet_mat_inverse: singular matrix");
        if (piv != c)
            for (int j = 0; j < k; ++j) {
                std::swap(a[piv * k + j], a[c * k + j]);
                std::swap(inv[piv * k + j], inv[c * k + j]);
            }
        const Jet pivot = a[c * k + c];
        for (int j = 0; j < k; ++j) {
            a[c * k + j] = a[c * k + j] / pivot;
            inv[c * k + j] = inv[c * k + j] / pivot;
        }
        for (int r = 0; r < k; ++r) {
            if (r == c) continue;
            const Jet f = a[r * k + c];
            for (int j = 0; j < k; ++j) {
                a[r * k + j] -= f * a[c * k + j];
                inv[r * k + j] -= f * inv[c * k + j];
            }
        }
    }
    return inv;
}

}  // namespace nambugeo
