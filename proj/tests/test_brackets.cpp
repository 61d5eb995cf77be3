#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "nambugeo/brackets.hpp"
#include "nambugeo/classical.hpp"
#include "nambugeo/embedding.hpp"

using namespace nambugeo;

namespace {

struct Setup {
    PointFrame fr;
    MetricData md;
    ConnectionCurvature cc;
    NormalFrame nf;
    ShapeData sd;
    BracketContext cx;
    BracketTensors bt;
};

Setup at(const EmbeddingSpec& spec, const Vec& u) {
    Setup s{frame_at(spec, u), {}, {}, {}, {}, {}, {}};
    s.md = induced_metric(s.fr);
    s.cc = sigma_connection_curvature(s.fr, s.md);
    s.nf = gram_schmidt_normals(s.fr);
    s.sd = shape_data(s.fr, s.md, s.nf);
    s.cx = make_context(s.fr);
    s.bt = build_tensors(s.cx, s.nf);
    return s;
}

Setup at(const std::string& catalog_name, const Vec& u) {
    return at(catalog_spec(catalog_name), u);
}

// One of the n - 2 test-function slots, or empty for surfaces.
std::vector<Jet> test_fns(const Setup& s) {
    if (s.fr.n == 2) return {};
    Jet u1 = Jet::variable(0, s.fr.u[0], s.fr.n, 3);
    return {apply_univariate(u1, UnivariateFn::sin)};
}

Vec tangent_row(const Setup& s, int a) {
    Vec X(s.fr.m);
    for (int i = 0; i < s.fr.m; ++i) X[i] = s.fr.tangent(a, i);
    return X;
}

}  // namespace

TEST_CASE("engine evaluates the determinant-over-density bracket") {
    Jet rho = Jet::constant(2.0, 2, 3);
    BracketEngine eng = make_engine(2, rho);

    Jet u = Jet::variable(0, 0.7, 2, 3);
    Jet v = Jet::variable(1, -0.4, 2, 3);

    CHECK(eng.value({u, v}) == doctest::Approx(0.5));        // det I / 2
    CHECK(eng.value({v, u}) == doctest::Approx(-0.5));       // antisymmetry
    CHECK(eng.value({u, u}) == doctest::Approx(0.0));

    // {uv, v} = v {u, v}.
    CHECK(eng.value({u * v, v}) == doctest::Approx(-0.4 * 0.5));

    // The jet form reproduces the value and differentiates the bracket.
    Jet b = eng.jet({u * u, v});  // {u^2, v} = 2u/2 = u
    CHECK(b.value() == doctest::Approx(0.7));
    CHECK(b.partial({1, 0}) == doctest::Approx(1.0));
}

TEST_CASE("trace identities hold on the catalog in both density modes") {
    struct Pt {
        const char* name;
        Vec u;
    };
    const std::vector<Pt> pts = {{"sphere", {0.9, 0.4}},   {"torus", {0.9, 0.7}},
                                 {"graph2", {0.3, -0.5}},  {"clifford", {0.8, 2.1}},
                                 {"s3", {1.2, 1.0, 0.6}},  {"graph3", {0.3, -0.2, 0.5}}};

    for (const Pt& pt : pts) {
        EmbeddingSpec base = catalog_spec(pt.name);
        for (DensityKind dk : {DensityKind::sqrt_g, DensityKind::one}) {
            Setup s = at(base.with_density(dk), pt.u);
            const int n = s.fr.n, p = s.fr.m - s.fr.n;
            CAPTURE(pt.name);
            CAPTURE(density_kind_name(dk));

            CHECK(s.bt.trP2 / n == doctest::Approx(s.cx.gamma2).epsilon(1e-10));
            for (int A = 0; A < p; ++A) {
                double trW = 0.0, detW = 0.0;
                Mat W = s.sd.W[A];
                for (int a = 0; a < n; ++a) trW += W(a, a);
                detW = determinant(W);
                CHECK(s.bt.trB[A] ==
                      doctest::Approx(s.cx.gamma2 * trW).epsilon(1e-9).scale(1.0));
                CHECK(s.bt.trST[A] / n ==
                      doctest::Approx(-s.cx.gamma2 * detW).epsilon(1e-9).scale(1.0));
            }
        }
    }
}

TEST_CASE("P2 projector and mean curvature") {
    for (const char* name : {"sphere", "torus", "clifford", "graph3"}) {
        EmbeddingSpec spec = catalog_spec(name);
        Vec u(spec.n);
        for (int a = 0; a < spec.n; ++a)
            u[a] = 0.4 * (spec.domain[a][0] + spec.domain[a][1]) + 0.27;
        Setup s = at(spec, u);
        CAPTURE(name);

        PbstReport pb = check_pbst(s.cx, s.md, s.nf, s.sd, s.bt);
        CHECK(pb.full_P2 < 1e-10);
        CHECK(pb.full_B < 1e-9);
        CHECK(pb.full_ST < 1e-9);
        CHECK(pb.t_forms < 1e-10);

        ProjectionReport pr = projection_and_H(s.cx, s.nf, s.sd, s.bt);
        CHECK(pr.idempotent < 1e-10);
        CHECK(pr.tangent_fix < 1e-10);
        CHECK(pr.normal_kill < 1e-10);
        CHECK(pr.H_vs_oracle < 1e-9);

        NormalConnReport nc = normal_connection(s.cx, s.nf, s.sd, s.bt);
        CHECK(nc.antisym < 1e-10);
        CHECK(nc.vs_oracle < 1e-9);
    }
}

TEST_CASE("Ricci endomorphism from brackets") {
    Setup sph = at("sphere", {1.1, 0.7});
    RicciReport r1 = ricci_bracket(sph.cx, sph.md, sph.sd, sph.bt);
    CHECK(r1.residual < 1e-9);

    // Unit sphere: R(e_b) = 1 * e_b in ambient components.
    for (int b = 0; b < 2; ++b)
        for (int i = 0; i < 3; ++i)
            CHECK(r1.bracket_side(i, b) ==
                  doctest::Approx(sph.fr.tangent(b, i)).epsilon(1e-9).scale(1.0));

    Setup s3 = at("s3", {1.2, 1.0, 0.6});
    RicciReport r2 = ricci_bracket(s3.cx, s3.md, s3.sd, s3.bt);
    CHECK(r2.residual < 1e-9);
    for (int b = 0; b < 3; ++b)
        for (int i = 0; i < 4; ++i)
            CHECK(r2.bracket_side(i, b) ==
                  doctest::Approx(2.0 * s3.fr.tangent(b, i)).epsilon(1e-8).scale(1.0));
}

TEST_CASE("Z family recovers the normal space") {
    Setup sph = at("sphere", {0.9, 2.2});
    ZFamily zf = z_normals(sph.cx);
    ZReport zr = check_z(sph.cx, sph.nf, zf);
    CHECK(zf.normals.size() == 1);
    CHECK(zr.unit < 1e-10);
    CHECK(zr.perp < 1e-12);
    CHECK(zr.span < 1e-10);
    CHECK(zr.count == 0.0);
    CHECK(zr.trace < 1e-10);

    Setup cl = at("clifford", {0.8, 2.1});
    ZFamily zf2 = z_normals(cl.cx);
    ZReport zr2 = check_z(cl.cx, cl.nf, zf2);
    CHECK(zf2.normals.size() == 2);
    CHECK(zf2.trace == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(zr2.idem < 1e-9);
    CHECK(zr2.eigs < 1e-9);
    CHECK(zr2.span < 1e-9);
}

TEST_CASE("normal-free curvature sums match the frame assembly") {
    for (const char* name : {"sphere", "clifford", "s3"}) {
        EmbeddingSpec spec = catalog_spec(name);
        Vec u(spec.n);
        for (int a = 0; a < spec.n; ++a)
            u[a] = 0.5 * (spec.domain[a][0] + spec.domain[a][1]) + 0.13;
        Setup s = at(spec, u);
        CAPTURE(name);

        for (int a = 0; a < s.fr.n; ++a) {
            NormalFreeSums nfs = normal_free_sums(s.cx, s.nf, s.bt, tangent_row(s, a));
            CHECK(nfs.r1 < 1e-9);
            CHECK(nfs.r2 < 1e-9);
            CHECK(nfs.r3 < 1e-9);
        }
    }
}

TEST_CASE("hypersurface det W and symmetric functions") {
    Setup sph = at("sphere", {1.0, 0.5});
    DetWReport dw = detw_bracket(sph.cx, sph.md, sph.nf, sph.sd);
    CHECK(dw.residual < 1e-10);
    CHECK(dw.bracket_value == doctest::Approx(1.0).epsilon(1e-10));

    SymFnReport sf = symmetric_functions(sph.cx, sph.sd, sph.bt);
    CHECK(sf.residual < 1e-10);
    CHECK(sf.sigma[0] == doctest::Approx(-2.0).epsilon(1e-10));  // Tr W
    CHECK(sf.sigma[1] == doctest::Approx(1.0).epsilon(1e-10));   // det W

    // Torus: det W = K = cos(u1)/(R + r cos(u1)) / r with R = 2, r = 1.
    Setup tor = at("torus", {0.9, 0.7});
    DetWReport dwt = detw_bracket(tor.cx, tor.md, tor.nf, tor.sd);
    const double K = std::cos(0.9) / (2.0 + std::cos(0.9));
    CHECK(dwt.residual < 1e-10);
    CHECK(dwt.bracket_value == doctest::Approx(K).epsilon(1e-10));

    // Saddle at the origin: principal curvatures +-2.
    Setup sad = at("graph2", {0.0, 0.0});
    DetWReport dws = detw_bracket(sad.cx, sad.md, sad.nf, sad.sd);
    CHECK(dws.bracket_value == doctest::Approx(-4.0).epsilon(1e-10));

    // Unit 3-sphere: |det W| = 1 and the bracket value matches the oracle's.
    Setup s3 = at("s3", {1.2, 1.0, 0.6});
    DetWReport dw3 = detw_bracket(s3.cx, s3.md, s3.nf, s3.sd);
    CHECK(dw3.residual < 1e-9);
    CHECK(std::abs(dw3.bracket_value) == doctest::Approx(1.0).epsilon(1e-9));

    SymFnReport sf3 = symmetric_functions(s3.cx, s3.sd, s3.bt);
    CHECK(sf3.residual < 1e-9);
}

TEST_CASE("Gaussian curvature three ways") {
    Setup sph = at("sphere", {1.1, 0.7});
    SurfaceKReport k1 = surface_K(sph.cx, sph.md, sph.cc, sph.nf, sph.bt);
    CHECK(k1.K_S == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(k1.r_S < 1e-10);
    CHECK(k1.r_direct < 1e-10);
    CHECK(k1.r_Z < 1e-10);

    Setup tor = at("torus", {2.3, 0.4});
    SurfaceKReport k2 = surface_K(tor.cx, tor.md, tor.cc, tor.nf, tor.bt);
    const double K = std::cos(2.3) / (2.0 + std::cos(2.3));
    CHECK(k2.K_oracle == doctest::Approx(K).epsilon(1e-11));
    CHECK(k2.r_S < 1e-10);
    CHECK(k2.r_direct < 1e-10);
    CHECK(k2.r_Z < 1e-10);

    // Codimension 2: only the S-form applies, the others are skipped
    // upstream, but the S-form still has to match the oracle.
    Setup cl = at("clifford", {0.8, 2.1});
    SurfaceKReport k3 = surface_K(cl.cx, cl.md, cl.cc, cl.nf, cl.bt);
    CHECK(k3.K_oracle == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
    CHECK(k3.r_S < 1e-10);
}

TEST_CASE("gamma P is a complex structure on surfaces") {
    for (const char* name : {"sphere", "torus", "graph2", "clifford"}) {
        EmbeddingSpec spec = catalog_spec(name);
        Vec u(spec.n);
        for (int a = 0; a < spec.n; ++a)
            u[a] = 0.37 * (spec.domain[a][0] + spec.domain[a][1]) + 0.4;
        Setup s = at(spec, u);
        CAPTURE(name);

        ComplexStructureReport cs = complex_structure(s.cx, s.md, s.bt);
        CHECK(cs.match < 1e-10);
        CHECK(cs.squared < 1e-10);
    }
}

TEST_CASE("Codazzi-Mainardi residuals vanish on the catalog") {
    for (const char* name : {"sphere", "torus", "graph2", "clifford", "s3", "graph3"}) {
        EmbeddingSpec spec = catalog_spec(name);
        Vec u(spec.n);
        for (int a = 0; a < spec.n; ++a)
            u[a] = 0.52 * (spec.domain[a][0] + spec.domain[a][1]) + 0.19;
        Setup s = at(spec, u);
        CAPTURE(name);

        CmReport cm = cm_residual(s.cx, s.md, s.cc, s.nf, s.sd, test_fns(s));
        CHECK(cm.ca_vs_def < 1e-9);
        CHECK(cm.wpi < 1e-9);
        CHECK(cm.thm < 1e-9);
        CHECK(cm.flat < 1e-9);
        CHECK(cm.tangency < 1e-9);
    }
}

TEST_CASE("Codazzi-Mainardi in a curved ambient keeps the tangential form") {
    const std::string cfg = R"json({
        "name": "conformal-graph",
        "n": 2, "m": 3,
        "coords": ["u1", "u2", "u1*u2"],
        "ambient": [["exp(2*x3)", "0", "0"],
                    ["0", "exp(2*x3)", "0"],
                    ["0", "0", "exp(2*x3)"]],
        "domain": [[-1, 1], [-1, 1]]
    })json";
    Setup s = at(load_spec(cfg), {0.4, -0.3});

    CmReport cm = cm_residual(s.cx, s.md, s.cc, s.nf, s.sd, {});
    CHECK(cm.ca_vs_def < 1e-9);
    CHECK(cm.wpi < 1e-9);
    CHECK(cm.thm < 1e-9);
    CHECK(cm.flat == 0.0);  // display not defined off the flat ambient
    CHECK(cm.tangency < 1e-9);
}

TEST_CASE("surface and hypersurface bracket identity batteries") {
    for (const char* name : {"sphere", "torus", "graph2"}) {
        Setup s = at(name, {0.9, 0.7});
        CAPTURE(name);
        SurfaceCmReport sr = cm_surface(s.cx, s.md, s.cc, s.nf, s.sd, s.bt);
        CHECK(sr.compact < 1e-9);
        CHECK(sr.r3 < 1e-9);
        CHECK(sr.swap_f < 1e-9);
        CHECK(sr.p2_form < 1e-9);
        CHECK(sr.classical < 1e-9);

        HypersurfaceCmReport hr =
            cm_hypersurface_identities(s.cx, s.md, s.cc, s.nf, s.sd, {});
        CHECK(hr.swap_f < 1e-9);
        CHECK(hr.grad_h < 1e-9);
        CHECK(hr.closure < 1e-9);
    }

    Setup g3 = at("graph3", {0.3, -0.2, 0.5});
    HypersurfaceCmReport hr =
        cm_hypersurface_identities(g3.cx, g3.md, g3.cc, g3.nf, g3.sd, test_fns(g3));
    CHECK(hr.swap_f < 1e-9);
    CHECK(hr.grad_h < 1e-9);
    CHECK(hr.closure < 1e-9);
}

TEST_CASE("Poisson identity for an arbitrary triple of functions") {
    // x = (u1, u2, u1*u2) with rho = 1 at (1, 1).
    BracketEngine eng = make_engine(2, Jet::constant(1.0, 2, 3));
    Jet u1 = Jet::variable(0, 1.0, 2, 3);
    Jet u2 = Jet::variable(1, 1.0, 2, 3);
    std::vector<Jet> xs{u1, u2, u1 * u2};

    PoissonReport pr = poisson_identity(eng, xs);
    CHECK(pr.gamma2 > 1e-10);
    CHECK(pr.residual < 1e-10);

    // A transcendental triple at a generic point.
    Jet a = Jet::variable(0, 0.6, 2, 3);
    Jet b = Jet::variable(1, -0.9, 2, 3);
    std::vector<Jet> ys{apply_univariate(a, UnivariateFn::exp) + b,
                        a * b + Jet::constant(2.0, 2, 3),
                        apply_univariate(b, UnivariateFn::sin) + a * a};
    PoissonReport pr2 = poisson_identity(eng, ys);
    CHECK(pr2.gamma2 > 1e-10);
    CHECK(pr2.residual < 1e-9);
}

TEST_CASE("closure identity for arbitrary jets") {
    BracketEngine eng = make_engine(3, Jet::constant(1.0, 3, 3));
    Jet u1 = Jet::variable(0, 0.4, 3, 3);
    Jet u2 = Jet::variable(1, 0.8, 3, 3);
    Jet u3 = Jet::variable(2, -0.3, 3, 3);
    std::vector<Jet> xs{u1 + u2 * u3, u2, u3 * u3 + u1,
                        apply_univariate(u1, UnivariateFn::cos) + u2};
    std::vector<Jet> fs{u1 * u2};

    CHECK(epsilon_closure(eng, xs, fs) < 1e-9);
}

TEST_CASE("context rejects near-degenerate density") {
    // gamma = sqrt(g)/rho collapses when the custom density blows up.
    const std::string cfg = R"({
        "name": "tiny-gamma",
        "n": 2, "m": 3,
        "coords": ["u1", "u2", "0"],
        "density": "10000000",
        "domain": [[-1, 1], [-1, 1]]
    })";
    PointFrame fr = frame_at(load_spec(cfg), {0.1, 0.1});
    CHECK_THROWS_AS(make_context(fr), DegeneratePointError);
}
