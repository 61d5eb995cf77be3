#include <gtest/gtest.h>

#include <cmath>

#include "nambugeo/classical.hpp"
#include "nambugeo/embedding.hpp"

using namespace nambugeo;

namespace {

struct Oracle {
    PointFrame fr;
    MetricData md;
    NormalFrame nf;
    ShapeData sd;
    ConnectionCurvature cc;
};

Oracle oracle_at(const EmbeddingSpec& spec, const Vec& u) {
    Oracle o{frame_at(spec, u), {}, {}, {}, {}};
    o.md = induced_metric(o.fr);
    o.cc = sigma_connection_curvature(o.fr, o.md);
    o.nf = gram_schmidt_normals(o.fr);
    o.sd = shape_data(o.fr, o.md, o.nf);
    return o;
}

}  // namespace

TEST(Metric, InverseAndDeterminant) {
    for (const char* name : {"sphere", "torus", "graph2", "clifford", "s3", "graph3"}) {
        EmbeddingSpec spec = catalog_spec(name);
        Vec u(spec.n);
        for (int a = 0; a < spec.n; ++a)
            u[a] = 0.53 * (spec.domain[a][0] + spec.domain[a][1]) + 0.11;
        Oracle o = oracle_at(spec, u);

        const int n = spec.n;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                double s = 0.0;
                for (int c = 0; c < n; ++c) s += o.md.g(a, c) * o.md.g_inv(c, b);
                EXPECT_NEAR(s, a == b ? 1.0 : 0.0, 1e-12) << name;
            }
        EXPECT_NEAR(o.md.sqrt_g * o.md.sqrt_g, o.md.det_g, 1e-12) << name;
        EXPECT_NEAR(o.md.sqrt_g, o.fr.sqrt_g, 1e-12) << name;
    }
}

TEST(Curvature, SphereGoldens) {
    // Radius-2 sphere: K = 1/4, scalar = 2/r^2 = 1/2, W = -(1/2) Id,
    // |H| = 2 * (1/2) / 2 = 1/2.
    EmbeddingSpec spec = catalog_spec("sphere", {{"r", "2"}});
    Oracle o = oracle_at(spec, {1.1, 0.7});

    EXPECT_NEAR(o.cc.scalar, 0.5, 1e-11);
    EXPECT_NEAR(o.sd.scalar_gauss, 0.5, 1e-11);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            EXPECT_NEAR(o.sd.W[0](a, b), a == b ? -0.5 : 0.0, 1e-11);
    EXPECT_NEAR(o.sd.H_norm, 0.5, 1e-11);

    // Ricci of a 2-sphere: (1/r^2) g.
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            EXPECT_NEAR(o.cc.ricci(a, b), 0.25 * o.md.g(a, b), 1e-11);
}

TEST(Curvature, TorusGoldens) {
    // Torus of revolution, R = 2, r = 1, u1 the tube angle:
    // K = cos(u1) / (r (R + r cos u1)).
    EmbeddingSpec spec = catalog_spec("torus");
    for (double th : {0.0, 0.9, 2.3}) {
        Oracle o = oracle_at(spec, {th, 1.3});
        const double K = std::cos(th) / (2.0 + std::cos(th));
        EXPECT_NEAR(o.cc.scalar, 2.0 * K, 1e-11) << "u1 = " << th;
        // detW equals K for a hypersurface in flat R^3.
        const double detW =
            o.sd.W[0](0, 0) * o.sd.W[0](1, 1) - o.sd.W[0](0, 1) * o.sd.W[0](1, 0);
        EXPECT_NEAR(detW, K, 1e-11) << "u1 = " << th;
    }
    // Outer equator of the (2,1) torus: K = 1/3.
    Oracle o = oracle_at(spec, {0.0, 0.4});
    EXPECT_NEAR(o.cc.scalar / 2.0, 1.0 / 3.0, 1e-12);
}

TEST(Curvature, SaddleAndFlat) {
    Oracle saddle = oracle_at(catalog_spec("graph2"), {0.3, 0.2});
    // K = -4 / (1 + 4u1^2 + 4u2^2)^2 for x3 = u1^2 - u2^2.
    const double w = 1.0 + 4 * 0.09 + 4 * 0.04;
    EXPECT_NEAR(saddle.cc.scalar / 2.0, -4.0 / (w * w), 1e-11);

    Oracle flat = oracle_at(catalog_spec("plane"), {0.5, -0.7});
    EXPECT_DOUBLE_EQ(flat.cc.scalar, 0.0);
    EXPECT_DOUBLE_EQ(flat.sd.H_norm, 0.0);

    // Clifford torus: intrinsically flat, extrinsically curved.
    Oracle cl = oracle_at(catalog_spec("clifford"), {0.8, 2.1});
    EXPECT_NEAR(cl.cc.scalar, 0.0, 1e-11);
    EXPECT_NEAR(cl.sd.H_norm, 1.0, 1e-11);
}

TEST(Curvature, RoundThreeSphere) {
    // Unit S^3: scalar = 6, Ricci eigenvalues all 2.
    Oracle o = oracle_at(catalog_spec("s3"), {1.2, 1.0, 0.6});
    EXPECT_NEAR(o.cc.scalar, 6.0, 1e-10);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            EXPECT_NEAR(o.cc.ricci_mixed(a, b), a == b ? 2.0 : 0.0, 1e-10);
}

TEST(NormalFrame, OrthonormalOrientedAndTangentFree) {
    for (const char* name : {"sphere", "torus", "clifford", "graph3"}) {
        EmbeddingSpec spec = catalog_spec(name);
        Vec u(spec.n);
        for (int a = 0; a < spec.n; ++a)
            u[a] = 0.45 * (spec.domain[a][0] + spec.domain[a][1]) + 0.2;
        Oracle o = oracle_at(spec, u);

        const int p = o.nf.p, m = o.nf.m, n = o.fr.n;
        for (int A = 0; A < p; ++A) {
            for (int B = 0; B < p; ++B) {
                double dot = 0.0;
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < m; ++j)
                        dot += o.fr.gbar(i, j) * o.nf.normals(A, i) * o.nf.normals(B, j);
                EXPECT_NEAR(dot, A == B ? 1.0 : 0.0, 1e-12) << name;
            }
            for (int a = 0; a < n; ++a) {
                double dot = 0.0;
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < m; ++j)
                        dot += o.fr.gbar(i, j) * o.nf.normals(A, i) * o.fr.tangent(a, j);
                EXPECT_NEAR(dot, 0.0, 1e-12) << name;
            }
        }

        // det(e_1..e_n, N_1..N_p) > 0 fixes the orientation.
        Mat full(m, m);
        for (int a = 0; a < n; ++a)
            for (int i = 0; i < m; ++i) full(a, i) = o.fr.tangent(a, i);
        for (int A = 0; A < p; ++A)
            for (int i = 0; i < m; ++i) full(n + A, i) = o.nf.normals(A, i);
        EXPECT_GT(determinant(full), 0.0) << name;
    }
}

TEST(NormalFrame, SphereOutwardNormalSign) {
    // With the orientation convention above, the unit sphere's normal is the
    // outward radial direction and W = -Id.
    Oracle o = oracle_at(catalog_spec("sphere"), {0.9, 0.4});
    for (int i = 0; i < 3; ++i)
        EXPECT_NEAR(o.nf.normals(0, i), o.fr.x_jets[i].value(), 1e-12);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            EXPECT_NEAR(o.sd.W[0](a, b), a == b ? -1.0 : 0.0, 1e-12);
}

TEST(ShapeData, SymmetryAndGaussConsistency) {
    for (const char* name : {"sphere", "torus", "graph2", "clifford", "s3", "graph3"}) {
        EmbeddingSpec spec = catalog_spec(name);
        Vec u(spec.n);
        for (int a = 0; a < spec.n; ++a)
            u[a] = 0.35 * (spec.domain[a][0] + spec.domain[a][1]) + 0.31;
        Oracle o = oracle_at(spec, u);

        const int n = o.sd.n, p = o.sd.p;
        for (int A = 0; A < p; ++A)
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < a; ++b)
                    EXPECT_NEAR(o.sd.h[A](a, b), o.sd.h[A](b, a), 1e-10) << name;

        // Intrinsic scalar curvature against the Gauss-equation assembly.
        EXPECT_NEAR(o.cc.scalar, o.sd.scalar_gauss, 1e-9) << name;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                EXPECT_NEAR(o.cc.ricci_mixed(a, b), o.sd.ricci_gauss(a, b), 1e-9) << name;

        // Normal-connection coefficients are antisymmetric in (A, B).
        for (int a = 0; a < n; ++a)
            for (int A = 0; A < p; ++A)
                for (int B = 0; B < p; ++B)
                    EXPECT_NEAR(o.sd.dcoef_at(a, A, B), -o.sd.dcoef_at(a, B, A), 1e-10)
                        << name;
    }
}

TEST(ShapeData, CurvedAmbientGaussConsistency) {
    // Plane chart in a conformally flat ambient metric: the intrinsic
    // curvature assembled from W plus the ambient Riemann term must match
    // the chart curvature.
    const std::string cfg = R"json({
        "name": "conformal-graph",
        "n": 2, "m": 3,
        "coords": ["u1", "u2", "u1*u2"],
        "ambient": [["exp(2*x3)", "0", "0"],
                    ["0", "exp(2*x3)", "0"],
                    ["0", "0", "exp(2*x3)"]],
        "domain": [[-1, 1], [-1, 1]]
    })json";
    Oracle o = oracle_at(load_spec(cfg), {0.4, -0.3});
    EXPECT_NEAR(o.cc.scalar, o.sd.scalar_gauss, 1e-9);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            EXPECT_NEAR(o.cc.ricci_mixed(a, b), o.sd.ricci_gauss(a, b), 1e-9);
}
