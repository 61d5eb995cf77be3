#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "nambugeo/jet.hpp"

using namespace nambugeo;

TEST_CASE("variable and constant jets expose the right partials") {
    Jet u = Jet::variable(0, 1.5, 2, 3);
    Jet c = Jet::constant(4.0, 2, 3);

    CHECK(u.value() == 1.5);
    CHECK(u.partial({1, 0}) == 1.0);
    CHECK(u.partial({0, 1}) == 0.0);
    CHECK(u.partial({2, 0}) == 0.0);
    CHECK(c.value() == 4.0);
    CHECK(c.partial({1, 0}) == 0.0);

    CHECK_THROWS_AS(Jet::variable(2, 0.0, 2, 3), std::invalid_argument);
    CHECK_THROWS_AS(Jet::variable(-1, 0.0, 2, 3), std::invalid_argument);
}

TEST_CASE("products and sums differentiate like the analytic formulas") {
    const double a = 0.8, b = -0.3;
    Jet u = Jet::variable(0, a, 2, 3);
    Jet v = Jet::variable(1, b, 2, 3);

    // f = sin(u) cos(v) + u^3 v
    Jet f = apply_univariate(u, UnivariateFn::sin) * apply_univariate(v, UnivariateFn::cos) +
            u * u * u * v;

    CHECK(f.value() == doctest::Approx(std::sin(a) * std::cos(b) + a * a * a * b).epsilon(1e-14));
    CHECK(f.partial({1, 0}) ==
          doctest::Approx(std::cos(a) * std::cos(b) + 3 * a * a * b).epsilon(1e-14));
    CHECK(f.partial({0, 1}) ==
          doctest::Approx(-std::sin(a) * std::sin(b) + a * a * a).epsilon(1e-14));
    CHECK(f.partial({1, 1}) ==
          doctest::Approx(-std::cos(a) * std::sin(b) + 3 * a * a).epsilon(1e-14));
    CHECK(f.partial({2, 0}) ==
          doctest::Approx(-std::sin(a) * std::cos(b) + 6 * a * b).epsilon(1e-14));
    CHECK(f.partial({2, 1}) ==
          doctest::Approx(std::sin(a) * std::sin(b) + 6 * a).epsilon(1e-14));
    CHECK(f.partial({3, 0}) ==
          doctest::Approx(-std::cos(a) * std::cos(b) + 6 * b).epsilon(1e-14));
}

TEST_CASE("quotients propagate through third order") {
    const double a = 0.4;
    Jet u = Jet::variable(0, a, 1, 3);
    Jet f = Jet::constant(1.0, 1, 3) / (u + 1.0);  // 1/(1+u)

    const double d = 1.0 + a;
    CHECK(f.value() == doctest::Approx(1 / d).epsilon(1e-14));
    CHECK(f.partial({1}) == doctest::Approx(-1 / (d * d)).epsilon(1e-14));
    CHECK(f.partial({2}) == doctest::Approx(2 / (d * d * d)).epsilon(1e-14));
    CHECK(f.partial({3}) == doctest::Approx(-6 / (d * d * d * d)).epsilon(1e-13));
}

TEST_CASE("apply_pow handles integral and fractional exponents") {
    Jet u = Jet::variable(0, 2.0, 1, 2);

    Jet cube = apply_pow(u, 3.0);
    CHECK(cube.value() == doctest::Approx(8.0));
    CHECK(cube.partial({1}) == doctest::Approx(12.0));
    CHECK(cube.partial({2}) == doctest::Approx(12.0));

    Jet root = apply_pow(u, 0.5);
    CHECK(root.value() == doctest::Approx(std::sqrt(2.0)));
    CHECK(root.partial({1}) == doctest::Approx(0.5 / std::sqrt(2.0)));

    // Negative base with an integral exponent.
    Jet w = Jet::variable(0, -2.0, 1, 2);
    CHECK(apply_pow(w, 2.0).value() == doctest::Approx(4.0));
    CHECK(apply_pow(w, 3.0).partial({1}) == doctest::Approx(12.0));

    // Zero base with a positive integral exponent must not produce NaN.
    Jet z = Jet::variable(0, 0.0, 1, 2);
    Jet z3 = apply_pow(z, 3.0);
    CHECK(z3.value() == 0.0);
    CHECK(z3.partial({1}) == 0.0);
    CHECK(z3.partial({2}) == 0.0);
}

TEST_CASE("log and sqrt reject non-positive bases") {
    Jet neg = Jet::variable(0, -1.0, 1, 2);
    CHECK_THROWS(apply_univariate(neg, UnivariateFn::log));
    CHECK_THROWS(apply_univariate(neg, UnivariateFn::sqrt));
}

TEST_CASE("truncated and derivative views") {
    Jet u = Jet::variable(0, 0.6, 2, 3);
    Jet v = Jet::variable(1, 0.2, 2, 3);
    Jet f = u * u * v;

    Jet t = f.truncated(1);
    CHECK(t.order() == 1);
    CHECK(t.value() == f.value());
    CHECK(t.partial({1, 0}) == f.partial({1, 0}));

    Jet df = f.derivative(0);  // 2uv
    CHECK(df.order() == 2);
    CHECK(df.value() == doctest::Approx(2 * 0.6 * 0.2));
    CHECK(df.partial({1, 0}) == doctest::Approx(2 * 0.2));
    CHECK(df.partial({0, 1}) == doctest::Approx(2 * 0.6));
}

TEST_CASE("compose applies the multivariate chain rule") {
    // outer(x, y) = x^2 y at (x, y) = (g(u,v), h(u,v)), g = u+v, h = u*v.
    const double a = 0.7, b = -0.2;
    Jet g = Jet::variable(0, a, 2, 2) + Jet::variable(1, b, 2, 2);
    Jet h = Jet::variable(0, a, 2, 2) * Jet::variable(1, b, 2, 2);

    Jet x = Jet::variable(0, g.value(), 2, 2);
    Jet y = Jet::variable(1, h.value(), 2, 2);
    Jet outer = x * x * y;

    Jet f = compose(outer, {g, h});
    // f(u,v) = (u+v)^2 uv
    const double s = a + b;
    CHECK(f.value() == doctest::Approx(s * s * a * b).epsilon(1e-14));
    CHECK(f.partial({1, 0}) ==
          doctest::Approx(2 * s * a * b + s * s * b).epsilon(1e-13));
    CHECK(f.partial({0, 1}) ==
          doctest::Approx(2 * s * a * b + s * s * a).epsilon(1e-13));
    CHECK(f.partial({1, 1}) ==
          doctest::Approx(2 * a * b + 2 * s * (a + b) + s * s).epsilon(1e-13));
}

TEST_CASE("jet determinants and inverses") {
    const double a = 0.9, b = 0.1;
    Jet u = Jet::variable(0, a, 2, 2);
    Jet v = Jet::variable(1, b, 2, 2);
    Jet one = Jet::constant(1.0, 2, 2);

    // [[u, v], [v, 1]] has det u - v^2.
    std::vector<Jet> mat{u, v, v, one};
    Jet det = jet_det(mat, 2);
    CHECK(det.value() == doctest::Approx(a - b * b).epsilon(1e-14));
    CHECK(det.partial({1, 0}) == doctest::Approx(1.0));
    CHECK(det.partial({0, 1}) == doctest::Approx(-2 * b));

    std::vector<Jet> inv = jet_mat_inverse(mat, 2);
    // Product must be the identity jet-wise.
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            Jet s = Jet::constant(0.0, 2, 2);
            for (int k = 0; k < 2; ++k) s += mat[i * 2 + k] * inv[k * 2 + j];
            CHECK(s.value() == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-13));
            CHECK(s.partial({1, 0}) == doctest::Approx(0.0).epsilon(1e-13));
            CHECK(s.partial({0, 1}) == doctest::Approx(0.0).epsilon(1e-13));
        }

    std::vector<Jet> singular{u, u, u, u};
    CHECK_THROWS_AS(jet_mat_inverse(singular, 2), std::domain_error);
}

TEST_CASE("first partials agree with central finite differences") {
    // A handful of composite functions; the full seeded sweep lives in the
    // acceptance binary.
    auto f = [](double x, double y) {
        return std::exp(0.3 * x) * std::sin(y) + std::sqrt(x + 2.0) / (y * y + 1.0);
    };
    auto jet_of = [](double x, double y) {
        Jet u = Jet::variable(0, x, 2, 1), v = Jet::variable(1, y, 2, 1);
        return apply_univariate(0.3 * u, UnivariateFn::exp) *
                   apply_univariate(v, UnivariateFn::sin) +
               apply_univariate(u + 2.0, UnivariateFn::sqrt) /
                   (v * v + Jet::constant(1.0, 2, 1));
    };

    const double h = 1e-6;
    for (double x : {-0.5, 0.2, 1.3})
        for (double y : {-1.1, 0.4}) {
            Jet j = jet_of(x, y);
            const double dx = (f(x + h, y) - f(x - h, y)) / (2 * h);
            const double dy = (f(x, y + h) - f(x, y - h)) / (2 * h);
            CHECK(j.partial({1, 0}) == doctest::Approx(dx).epsilon(1e-7));
            CHECK(j.partial({0, 1}) == doctest::Approx(dy).epsilon(1e-7));
        }
}
