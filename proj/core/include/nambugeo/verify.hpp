#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nambugeo/embedding.hpp"
#include "nambugeo/smallmat.hpp"

// Identity-check suite: samples points on an embedding, evaluates every
// applicable bracket/oracle identity at each point under each density
// mode, and aggregates the residuals into a deterministic report.

namespace nambugeo {

// ---------------------------------------------------------------------
// Point sampling.

struct SamplePlan {
    enum class Mode { grid, random };
    Mode mode = Mode::grid;
    int grid_k = 3;        // points per axis (grid mode), k >= 2
    int random_count = 5;  // random mode, count >= 1
    std::uint64_t seed = 42;

    static SamplePlan grid(int k) { return {Mode::grid, k, 0, 0}; }
    static SamplePlan random(int count, std::uint64_t seed) {
        return {Mode::random, 0, count, seed};
    }

    std::string describe() const;
};

// Points strictly inside the declared domain: each interval is shrunk by
// a margin of 1e-3 of its length. Grid mode returns the k^n centers of
// the k-per-axis cell partition of the shrunk box, row-major with the
// first parameter varying slowest. Random mode draws count points with a
// SplitMix64 stream: state += 0x9E3779B97F4A7C15; z = state;
// z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
// z *= 0x94D049BB133111EB; z ^= z >> 31; yielding the double
// (z >> 11) * 2^-53 in [0,1), one draw per coordinate in order.
std::vector<Vec> sample_points(const EmbeddingSpec& spec, const SamplePlan& plan);

// ---------------------------------------------------------------------
// Check catalog.

struct CheckInfo {
    std::string id;         // stable slug
    std::string statement;  // what the check asserts
    double tol;             // default tolerance
};

// Every check the suite knows, in report order.
const std::vector<CheckInfo>& check_catalog();

// nullptr when the id is unknown.
const CheckInfo* find_check(const std::string& id);

// ---------------------------------------------------------------------
// Suite execution.

struct IdentityCheck {
    std::string id;
    std::string statement;
    int point_index = 0;
    Vec point;
    std::string density;  // sqrt_g | one | custom
    std::string status;   // pass | fail | n/a | skipped-degenerate
    double residual = 0;  // meaningful for pass and fail rows
    double tol = 0;
    std::string reason;   // set on skipped-degenerate rows

    bool applicable() const { return status == "pass" || status == "fail"; }
};

struct SkipNote {
    int point_index = 0;
    std::string density;
    std::string reason;
};

struct IdentityReport {
    std::string spec_name;
    int n = 0, m = 0, p = 0;
    std::string sampling;  // human-readable plan, e.g. "grid(k=3)"
    std::uint64_t seed = 0;
    std::vector<Vec> points;
    std::vector<std::string> densities;
    std::vector<IdentityCheck> checks;  // every selected id x point x density
    std::vector<SkipNote> skipped;

    int n_pass = 0, n_fail = 0, n_na = 0, n_skipped = 0;

    bool all_pass() const { return n_fail == 0; }
};

struct SuiteOptions {
    std::vector<std::string> ids;        // empty selects the full catalog
    std::optional<double> tol_override;  // replaces every default tolerance
};

// Runs each selected check at every point x density mode. Density modes
// are sqrt_g and one, plus the spec's own custom density when it has one.
// Checks gated off by dimension, codimension or ambient flatness appear
// as "n/a"; points where the frame, the normal frame or the bracket
// context degenerates appear as "skipped-degenerate" with the reason.
// Throws ConfigError on unknown ids in options.
IdentityReport run_suite(const EmbeddingSpec& spec, const std::vector<Vec>& points,
                         const SuiteOptions& opts = {});

// Convenience overload: sample then run.
IdentityReport run_suite(const EmbeddingSpec& spec, const SamplePlan& plan,
                         const SuiteOptions& opts = {});

// ---------------------------------------------------------------------
// Serialization.

// JSON document with "schema_version": 1; field order and float
// formatting (shortest round-trip decimals) are stable, so equal inputs
// serialize byte-identically.
std::string report_json(const IdentityReport& rep, int indent = 2);

// One line: counts and verdict.
std::string report_summary(const IdentityReport& rep);

}  // namespace nambugeo
