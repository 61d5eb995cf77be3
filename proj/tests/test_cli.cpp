#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "nambugeo/cli.hpp"

using namespace nambugeo;

namespace {

struct RunResult {
    int code;
    std::string out, err;
};

RunResult run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("usage errors exit with code 2") {
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"frobnicate"}).code == kExitUsage);
    CHECK(run({"eval", "catalog:sphere"}).code == kExitUsage);  // missing --point
    CHECK(run({"eval", "catalog:sphere", "--point", "1,2", "--density", "woble"}).code ==
          kExitUsage);
    CHECK(run({"verify", "catalog:sphere", "--grid", "3", "--random", "4"}).code ==
          kExitUsage);
    CHECK(run({"verify", "catalog:sphere", "--ids", "not-a-check"}).code == kExitUsage);
    CHECK(run({"grid", "catalog:sphere"}).code == kExitUsage);  // missing --grid
    CHECK(run({"grid", "catalog:sphere", "--grid", "1"}).code == kExitUsage);
    CHECK(run({"eval", "catalog:nope", "--point", "1,2"}).code == kExitUsage);
    CHECK(run({"eval", "catalog:sphere", "--point", "1,2,3"}).code == kExitUsage);

    CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("catalog lists the built-in embeddings") {
    RunResult text = run({"catalog"});
    CHECK(text.code == kExitOk);
    CHECK(text.out.find("sphere") != std::string::npos);
    CHECK(text.out.find("torus") != std::string::npos);

    RunResult js = run({"catalog", "--format", "json"});
    CHECK(js.code == kExitOk);
    nlohmann::json doc = nlohmann::json::parse(js.out);
    REQUIRE(doc.is_array());
    CHECK(doc.size() == 7);
    CHECK(doc.at(0).contains("name"));
    CHECK(doc.at(0).contains("n"));
    CHECK(doc.at(0).contains("params"));
}

TEST_CASE("eval prints point quantities as JSON") {
    RunResult r = run({"eval", "catalog:sphere", "--point", "1.0,0.5"});
    REQUIRE(r.code == kExitOk);

    nlohmann::json doc = nlohmann::json::parse(r.out);
    CHECK(doc.at("schema_version") == 1);
    CHECK(doc.at("spec").at("name") == "sphere");
    CHECK(doc.at("density") == "sqrt_g");
    CHECK(doc.at("gamma").get<double>() == doctest::Approx(1.0));

    bool saw_k = false, saw_h = false;
    for (const auto& q : doc.at("quantities")) {
        if (q.at("id") == "k-bracket") {
            saw_k = true;
            CHECK(q.at("K").get<double>() == doctest::Approx(1.0).epsilon(1e-10));
            CHECK(q.at("residual").get<double>() < 1e-10);
        }
        if (q.at("id") == "mean-curvature") {
            saw_h = true;
            CHECK(q.at("Hnorm").get<double>() == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
    CHECK(saw_k);
    CHECK(saw_h);

    // Degenerate point: dedicated exit code, message on the error stream.
    RunResult pole = run({"eval", "catalog:sphere", "--point", "0,0"});
    CHECK(pole.code == kExitDegenerate);
    CHECK(pole.err.find("degenerate") != std::string::npos);
}

TEST_CASE("verify reports pass/fail through the exit code") {
    RunResult ok = run({"verify", "catalog:sphere", "--grid", "2"});
    CHECK(ok.code == kExitOk);
    nlohmann::json doc = nlohmann::json::parse(ok.out);
    CHECK(doc.at("schema_version") == 1);
    CHECK(doc.at("summary").at("all_pass").get<bool>());
    CHECK(ok.err.find("pass") != std::string::npos);  // summary line

    RunResult rerun = run({"verify", "catalog:sphere", "--grid", "2"});
    CHECK(rerun.out == ok.out);

    RunResult tight = run({"verify", "catalog:sphere", "--grid", "2", "--tol", "1e-20"});
    CHECK(tight.code == kExitChecksFailed);

    RunResult seeded =
        run({"verify", "catalog:torus", "--random", "3", "--seed", "11"});
    CHECK(seeded.code == kExitOk);
    CHECK(nlohmann::json::parse(seeded.out).at("sampling") ==
          "random(count=3,seed=11)");
}

TEST_CASE("verify --out writes the report file") {
    const std::string path = "test_cli_report_tmp.json";
    RunResult r = run({"verify", "catalog:sphere", "--grid", "2", "--ids", "trace-P2",
                       "--out", path});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("pass") != std::string::npos);  // summary moves to stdout

    std::ifstream in(path);
    REQUIRE(in.good());
    nlohmann::json doc = nlohmann::json::parse(in);
    CHECK(doc.at("checks").size() == 4 * 2);
    in.close();
    std::remove(path.c_str());
}

TEST_CASE("grid emits the pinned CSV layout") {
    RunResult r = run({"grid", "catalog:torus", "--grid", "4"});
    REQUIRE(r.code == kExitOk);

    std::istringstream lines(r.out);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "u1,u2,K_bracket,K_oracle,gamma,Hnorm,reason");

    int rows = 0;
    std::string line;
    while (std::getline(lines, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 16);

    RunResult rerun = run({"grid", "catalog:torus", "--grid", "4"});
    CHECK(rerun.out == r.out);

    // Three parameters: the surface-only columns drop out.
    RunResult r3 = run({"grid", "catalog:s3", "--grid", "2"});
    REQUIRE(r3.code == kExitOk);
    std::string header3 = r3.out.substr(0, r3.out.find('\n'));
    CHECK(header3 == "u1,u2,u3,gamma,Hnorm,reason");

    RunResult js = run({"grid", "catalog:torus", "--grid", "2", "--format", "json"});
    REQUIRE(js.code == kExitOk);
    nlohmann::json doc = nlohmann::json::parse(js.out);
    CHECK(doc.at("rows").size() == 4);
}

TEST_CASE("grid keeps degenerate cells as annotated empty rows") {
    const std::string path = "test_cli_grid_cfg_tmp.json";
    {
        std::ofstream cfg(path);
        cfg << R"({"name":"half-degenerate","n":2,"m":3,
                   "coords":["u1","u2","0"],
                   "density":"u1",
                   "domain":[[-1,1],[-1,1]]})";
    }
    RunResult r = run({"grid", path, "--grid", "2"});
    std::remove(path.c_str());
    REQUIRE(r.code == kExitOk);  // degenerate cells do not fail the run

    std::istringstream lines(r.out);
    std::string line;
    std::getline(lines, line);  // header
    int good = 0, bad = 0;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        if (line.find("density") != std::string::npos || line.find(",,") != std::string::npos)
            ++bad;
        else
            ++good;
    }
    CHECK(good == 2);  // u1 > 0 half
    CHECK(bad == 2);   // u1 < 0 half, flagged with a reason
}
