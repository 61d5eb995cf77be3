#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>
#include <set>
#include <string>
#include <vector>

#include "nambugeo/embedding.hpp"
#include "nambugeo/verify.hpp"

using namespace nambugeo;

TEST_CASE("grid sampling: counts, margins, ordering") {
    EmbeddingSpec sphere = catalog_spec("sphere");
    std::vector<Vec> pts = sample_points(sphere, SamplePlan::grid(3));
    REQUIRE(pts.size() == 9);

    for (const Vec& u : pts)
        for (int a = 0; a < 2; ++a) {
            CHECK(u[a] > sphere.domain[a][0]);
            CHECK(u[a] < sphere.domain[a][1]);
        }

    // Cell centers of the margin-shrunk box; first coordinate varies
    // slowest.
    auto center = [&](int axis, int cell) {
        const double lo = sphere.domain[axis][0], hi = sphere.domain[axis][1];
        const double margin = 1e-3 * (hi - lo);
        const double a = lo + margin, b = hi - margin;
        return a + (cell + 0.5) * (b - a) / 3.0;
    };
    int idx = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j, ++idx) {
            CHECK(pts[idx][0] == doctest::Approx(center(0, i)).epsilon(1e-14));
            CHECK(pts[idx][1] == doctest::Approx(center(1, j)).epsilon(1e-14));
        }

    EmbeddingSpec s3 = catalog_spec("s3");
    CHECK(sample_points(s3, SamplePlan::grid(2)).size() == 8);

    CHECK_THROWS_AS(sample_points(sphere, SamplePlan::grid(1)), ConfigError);
}

TEST_CASE("random sampling is seeded and reproducible") {
    EmbeddingSpec torus = catalog_spec("torus");

    std::vector<Vec> a = sample_points(torus, SamplePlan::random(5, 42));
    std::vector<Vec> b = sample_points(torus, SamplePlan::random(5, 42));
    REQUIRE(a.size() == 5);
    for (size_t i = 0; i < a.size(); ++i)
        for (int c = 0; c < 2; ++c) CHECK(a[i][c] == b[i][c]);

    std::vector<Vec> other = sample_points(torus, SamplePlan::random(5, 43));
    bool same = true;
    for (size_t i = 0; i < a.size(); ++i)
        for (int c = 0; c < 2; ++c)
            if (a[i][c] != other[i][c]) same = false;
    CHECK_FALSE(same);

    for (const Vec& u : a)
        for (int c = 0; c < 2; ++c) {
            CHECK(u[c] > torus.domain[c][0]);
            CHECK(u[c] < torus.domain[c][1]);
        }

    CHECK_THROWS_AS(sample_points(torus, SamplePlan::random(0, 1)), ConfigError);
}

TEST_CASE("check catalog is stable and queryable") {
    const auto& cat = check_catalog();
    CHECK(cat.size() == 53);

    std::set<std::string> ids;
    for (const CheckInfo& c : cat) {
        CHECK(!c.id.empty());
        CHECK(!c.statement.empty());
        CHECK(c.tol > 0.0);
        CHECK(ids.insert(c.id).second);  // no duplicates
    }

    const CheckInfo* tr = find_check("trace-P2");
    REQUIRE(tr != nullptr);
    CHECK(tr->tol == 1e-9);
    CHECK(find_check("no-such-check") == nullptr);
}

TEST_CASE("full suite passes on the sphere with every id applicable") {
    IdentityReport rep = run_suite(catalog_spec("sphere"), SamplePlan::grid(3));

    CHECK(rep.spec_name == "sphere");
    CHECK(rep.n == 2);
    CHECK(rep.m == 3);
    CHECK(rep.p == 1);
    CHECK(rep.points.size() == 9);
    CHECK(rep.densities == std::vector<std::string>{"sqrt_g", "one"});

    // 53 ids x 9 points x 2 densities, all applicable on a hypersurface
    // in flat R^3.
    CHECK(rep.checks.size() == 53 * 9 * 2);
    CHECK(rep.n_pass == static_cast<int>(rep.checks.size()));
    CHECK(rep.n_fail == 0);
    CHECK(rep.n_na == 0);
    CHECK(rep.n_skipped == 0);
    CHECK(rep.all_pass());
}

TEST_CASE("dimension and flatness gates surface as n/a") {
    IdentityReport rep = run_suite(catalog_spec("s3"), SamplePlan::grid(2));

    // The n = 2 checks do not apply on a 3-parameter chart.
    std::set<std::string> na_ids;
    for (const IdentityCheck& c : rep.checks)
        if (c.status == "n/a") na_ids.insert(c.id);

    CHECK(na_ids.count("k-bracket") == 1);
    CHECK(na_ids.count("complex-squared") == 1);
    CHECK(na_ids.count("poisson-r3") == 1);
    CHECK(na_ids.count("cm-surface-compact") == 1);
    CHECK(na_ids.count("trace-P2") == 0);
    CHECK(na_ids.count("detw-bracket") == 0);

    CHECK(rep.n_fail == 0);
    CHECK(rep.n_na == static_cast<int>(na_ids.size()) * 8 * 2);

    // Codimension 2 disables the hypersurface-only ids instead.
    IdentityReport cl = run_suite(catalog_spec("clifford"), SamplePlan::grid(2));
    std::set<std::string> cl_na;
    for (const IdentityCheck& c : cl.checks)
        if (c.status == "n/a") cl_na.insert(c.id);
    CHECK(cl_na.count("detw-bracket") == 1);
    CHECK(cl_na.count("sym-functions") == 1);
    CHECK(cl_na.count("k-bracket") == 0);
    CHECK(cl.n_fail == 0);
}

TEST_CASE("degenerate points are skipped with a reason") {
    EmbeddingSpec sphere = catalog_spec("sphere");
    std::vector<Vec> pts = {{0.0, 0.0}, {1.0, 1.0}};  // pole, then regular

    IdentityReport rep = run_suite(sphere, pts);
    CHECK(rep.sampling == "explicit(2 points)");

    // Every id at the pole is marked skipped, once per density mode.
    CHECK(rep.n_skipped == 53 * 2);
    REQUIRE(rep.skipped.size() == 2);
    CHECK(rep.skipped[0].point_index == 0);
    CHECK(rep.skipped[0].reason.find("sqrt(g)") != std::string::npos);

    for (const IdentityCheck& c : rep.checks)
        if (c.point_index == 0) {
            CHECK(c.status == "skipped-degenerate");
            CHECK(!c.reason.empty());
        }
    CHECK(rep.n_fail == 0);
    CHECK(rep.all_pass());  // skips are not failures
}

TEST_CASE("id selection and tolerance override") {
    EmbeddingSpec sphere = catalog_spec("sphere");

    SuiteOptions opts;
    opts.ids = {"trace-P2", "k-bracket"};
    IdentityReport rep = run_suite(sphere, SamplePlan::grid(2), opts);
    CHECK(rep.checks.size() == 2 * 4 * 2);
    for (const IdentityCheck& c : rep.checks)
        CHECK((c.id == "trace-P2" || c.id == "k-bracket"));

    // An impossible tolerance turns real residuals into failures.
    SuiteOptions tight;
    tight.tol_override = 1e-20;
    IdentityReport hard = run_suite(sphere, SamplePlan::grid(2), tight);
    CHECK(hard.n_fail > 0);
    CHECK_FALSE(hard.all_pass());
    for (const IdentityCheck& c : hard.checks)
        if (c.applicable()) CHECK(c.tol == 1e-20);

    SuiteOptions bogus;
    bogus.ids = {"trace-P2", "not-a-check"};
    CHECK_THROWS_AS(run_suite(sphere, SamplePlan::grid(2), bogus), ConfigError);
}

TEST_CASE("custom density joins the density-mode list") {
    const std::string cfg = R"({
        "name": "weighted-saddle",
        "n": 2, "m": 3,
        "coords": ["u1", "u2", "u1^2-u2^2"],
        "density": "1+u1^2",
        "domain": [[-1, 1], [-1, 1]]
    })";
    IdentityReport rep = run_suite(load_spec(cfg), SamplePlan::grid(2));
    CHECK(rep.densities == std::vector<std::string>{"sqrt_g", "one", "custom"});
    CHECK(rep.checks.size() == 53 * 4 * 3);
    CHECK(rep.n_fail == 0);
}

TEST_CASE("report serialization is schema-stable and deterministic") {
    EmbeddingSpec torus = catalog_spec("torus");
    SuiteOptions opts;
    opts.ids = {"trace-P2", "gamma-sq-sum", "mean-curvature"};

    IdentityReport rep = run_suite(torus, SamplePlan::random(3, 7), opts);
    const std::string text = report_json(rep);

    IdentityReport rep2 = run_suite(torus, SamplePlan::random(3, 7), opts);
    CHECK(report_json(rep2) == text);

    nlohmann::json doc = nlohmann::json::parse(text);
    CHECK(doc.at("schema_version").get<int>() == 1);
    CHECK(doc.at("spec").at("name") == "torus");
    CHECK(doc.at("spec").at("n") == 2);
    CHECK(doc.at("sampling") == "random(count=3,seed=7)");
    CHECK(doc.at("seed") == 7);
    CHECK(doc.at("points").size() == 3);
    CHECK(doc.at("summary").at("all_pass").get<bool>());
    CHECK(doc.at("summary").at("total").get<int>() == 3 * 3 * 2);
    CHECK(doc.at("checks").size() == 3 * 3 * 2);

    const auto& first = doc.at("checks").at(0);
    CHECK(first.contains("id"));
    CHECK(first.contains("statement"));
    CHECK(first.contains("point"));
    CHECK(first.contains("u"));
    CHECK(first.contains("density"));
    CHECK(first.contains("status"));
    CHECK(first.contains("residual"));
    CHECK(first.contains("tol"));

    const std::string line = report_summary(rep);
    CHECK(line.find("torus") != std::string::npos);
    CHECK(line.find("fail") != std::string::npos);
}
