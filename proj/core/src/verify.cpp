#include "nambugeo/verify.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

#include "nambugeo/brackets.hpp"
#include "nambugeo/classical.hpp"

namespace nambugeo {
namespace {

// =====================================================================
// Sampling
// =====================================================================

struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state;
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    // Uniform in [0, 1), 53 significant bits.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

constexpr double kDomainMargin = 1e-3;

}  // namespace

std::string SamplePlan::describe() const {
    char buf[64];
    if (mode == Mode::grid)
        std::snprintf(buf, sizeof buf, "grid(k=%d)", grid_k);
    else
        std::snprintf(buf, sizeof buf, "random(count=%d,seed=%llu)", random_count,
                      static_cast<unsigned long long>(seed));
    return buf;
}

std::vector<Vec> sample_points(const EmbeddingSpec& spec, const SamplePlan& plan) {
    const int n = spec.n;
    std::vector<double> lo(n), hi(n);
    for (int a = 0; a < n; ++a) {
        const double margin = kDomainMargin * (spec.domain[a][1] - spec.domain[a][0]);
        lo[a] = spec.domain[a][0] + margin;
        hi[a] = spec.domain[a][1] - margin;
        if (!(lo[a] < hi[a]))
            throw ConfigError("sample_points: empty domain on axis " + std::to_string(a + 1));
    }

    std::vector<Vec> pts;
    if (plan.mode == SamplePlan::Mode::grid) {
        const int k = plan.grid_k;
        if (k < 2) throw ConfigError("sample_points: grid needs k >= 2");
        int total = 1;
        for (int a = 0; a < n; ++a) total *= k;
        pts.reserve(total);
        for (int idx = 0; idx < total; ++idx) {
            Vec u(n);
            int rem = idx;
            for (int a = n - 1; a >= 0; --a) {
                const int cell = rem % k;
                rem /= k;
                u[a] = lo[a] + (cell + 0.5) * (hi[a] - lo[a]) / k;
            }
            pts.push_back(std::move(u));
        }
    } else {
        if (plan.random_count < 1) throw ConfigError("sample_points: random needs count >= 1");
        SplitMix64 rng(plan.seed);
        pts.reserve(plan.random_count);
        for (int i = 0; i < plan.random_count; ++i) {
            Vec u(n);
            for (int a = 0; a < n; ++a) u[a] = lo[a] + rng.next_double() * (hi[a] - lo[a]);
            pts.push_back(std::move(u));
        }
    }
    return pts;
}

// =====================================================================
// Check catalog
// =====================================================================

const std::vector<CheckInfo>& check_catalog() {
    static const std::vector<CheckInfo> table = {
        {"bracket-antisym", "bracket changes sign under any argument swap", 1e-13},
        {"bracket-leibniz", "bracket obeys the product rule in its first slot", 1e-11},
        {"gamma-sq-sum", "averaged square of the coordinate brackets equals gamma^2", 1e-10},
        {"cofactor-lemma",
         "epsilon-contracted metric products equal det(g) times the inverse metric", 1e-10},
        {"oracle-metric-inverse", "induced metric times its inverse is the identity", 1e-12},
        {"oracle-h-symmetric", "second fundamental forms are symmetric", 1e-10},
        {"oracle-gauss-consistency",
         "chart curvature matches its Weingarten and ambient-curvature assembly", 1e-8},
        {"oracle-dcoef-antisym",
         "normal-connection coefficients are antisymmetric in the normal labels", 1e-10},
        {"pbst-p2", "P contraction equals gamma^2 times the tangent projector", 1e-8},
        {"pbst-b", "B endomorphisms equal gamma^2 times the extended Weingarten maps", 1e-8},
        {"pbst-st", "S.T contractions match their shape-operator closed form", 1e-8},
        {"pbst-t-form", "epsilon and bracket constructions of T agree", 1e-10},
        {"trace-P2", "Tr P^2 / n equals gamma^2", 1e-9},
        {"trace-B", "Tr B_A equals gamma^2 tr W_A", 1e-9},
        {"trace-ST", "Tr S_A T_A / n equals -gamma^2 det W_A", 1e-9},
        {"proj-idempotent", "normalized P^2 is idempotent", 1e-10},
        {"proj-tangent-fix", "normalized P^2 fixes tangent vectors", 1e-10},
        {"proj-normal-kill", "normalized P^2 annihilates normal vectors", 1e-10},
        {"mean-curvature", "bracket mean-curvature vector matches the oracle", 1e-8},
        {"normal-connection",
         "bracket normal-connection coefficients match gbar(D_a N_A, N_B)", 1e-9},
        {"nconn-antisym", "bracket normal-connection coefficients are antisymmetric", 1e-10},
        {"ricci-bracket", "bracket Ricci assembly matches the oracle endomorphism", 1e-8},
        {"z-unit", "kept Z vectors are unit length", 1e-9},
        {"z-perp", "Z vectors are orthogonal to the tangent space", 1e-12},
        {"z-span", "Z projector reproduces the normal-space projector", 1e-9},
        {"z-count", "number of kept Z vectors equals the codimension", 1e-9},
        {"z-trace", "trace of the Z pencil equals the codimension", 1e-9},
        {"z-idem", "symmetrized Z pencil is idempotent", 1e-9},
        {"z-eigs", "Z pencil eigenvalues sit at 0 or 1", 1e-9},
        {"nfree-trbb", "normal-free sum of (Tr B_A) B_A(X) matches the frame assembly", 1e-8},
        {"nfree-bsq", "normal-free sum of B_A^2(X) matches the frame assembly", 1e-8},
        {"nfree-trbn", "normal-free sum of (Tr B_A) N_A matches the frame assembly", 1e-8},
        {"detw-bracket", "nested-bracket det W equals the oracle determinant", 1e-8},
        {"sym-functions",
         "elementary symmetric functions of W from traces match the oracle", 1e-8},
        {"cm-bracket-vs-def",
         "bracket form of the Codazzi vector matches its covariant assembly", 1e-8},
        {"cm-wpi",
         "gamma^2 times the Codazzi two-form equals minus the projected ambient curvature",
         1e-8},
        {"cm-thm",
         "gamma^2 times the Codazzi vector equals the projected Christoffel-bracket form",
         1e-8},
        {"cm-flat", "flat-ambient Codazzi bracket display vanishes", 1e-8},
        {"cm-tangency", "Codazzi vectors are tangent", 1e-8},
        {"cm-surface-compact",
         "surface Codazzi contraction cancels the B.S normal sum", 1e-8},
        {"cm-surface-r3",
         "surface Codazzi contraction vanishes for a surface in 3-space", 1e-8},
        {"cm-surface-swap",
         "a factor moves between bracket slots in the surface swap identity", 1e-8},
        {"cm-p2-form", "projected-normal bracket sum vanishes for a surface in 3-space",
         1e-8},
        {"cm-classical-gradh",
         "projected-normal bracket sum matches the curl of the second fundamental form",
         1e-8},
        {"cm-hyp-swap",
         "a factor moves between bracket slots in the hypersurface swap identity", 1e-8},
        {"cm-hyp-gradh",
         "hypersurface bracket sum matches the antisymmetrized derivative of h", 1e-8},
        {"cm-hyp-closure", "epsilon-contracted hypersurface brackets vanish", 1e-8},
        {"poisson-r3", "three-component Poisson identity for a surface chart in 3-space",
         1e-8},
        {"k-bracket", "Gaussian curvature from S-tensor traces matches the oracle", 1e-8},
        {"k-direct",
         "Gaussian curvature from coordinate-normal brackets matches the oracle", 1e-8},
        {"k-znormal", "Gaussian curvature from nested Z brackets matches the oracle", 1e-8},
        {"complex-squared",
         "gamma-normalized P squares to minus the identity on tangent vectors", 1e-10},
        {"complex-match", "gamma-normalized P matches the metric epsilon form", 1e-8},
    };
    return table;
}

const CheckInfo* find_check(const std::string& id) {
    for (const CheckInfo& c : check_catalog())
        if (c.id == id) return &c;
    return nullptr;
}

// =====================================================================
// Per-point evaluation
// =====================================================================

namespace {

struct SignedPerm {
    std::vector<int> idx;
    int sign;
};

std::vector<SignedPerm> signed_perms(int n) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::vector<SignedPerm> out;
    do {
        int inv = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (idx[i] > idx[j]) ++inv;
        out.push_back({idx, (inv % 2 == 0) ? 1 : -1});
    } while (std::next_permutation(idx.begin(), idx.end()));
    return out;
}

double factorial(int k) {
    double f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

// Antisymmetry of the engine on a deterministic argument set.
double antisym_residual(const BracketContext& cx) {
    const PointFrame& fr = cx.frame();
    const int n = fr.n, m = fr.m;
    std::vector<Jet> args;
    args.push_back(fr.x_jets[0]);
    args.push_back(fr.x_jets[1 % m] + fr.x_jets[2 % m] * fr.x_jets[0]);
    if (n >= 3) args.push_back(fr.x_jets[2 % m] * fr.x_jets[3 % m]);
    const double base = cx.engine.value(args);
    double worst = 0.0;
    for (const SignedPerm& pr : signed_perms(n)) {
        std::vector<const Jet*> permuted(n);
        for (int i = 0; i < n; ++i) permuted[i] = &args[pr.idx[i]];
        worst = std::max(worst, std::abs(cx.engine.value(permuted) - pr.sign * base));
    }
    return worst;
}

// Product rule in the first slot on a deterministic argument set.
double leibniz_residual(const BracketContext& cx) {
    const PointFrame& fr = cx.frame();
    const int n = fr.n, m = fr.m;
    const Jet& f = fr.x_jets[0];
    const Jet g = fr.x_jets[1 % m] + fr.x_jets[2 % m];
    std::vector<const Jet*> rest;
    for (int k = 1; k < n; ++k) rest.push_back(&fr.x_jets[k % m]);

    Jet fg = f * g;
    std::vector<const Jet*> a1{&fg}, a2{&f}, a3{&g};
    for (const Jet* r : rest) {
        a1.push_back(r);
        a2.push_back(r);
        a3.push_back(r);
    }
    const double lhs = cx.engine.value(a1);
    const double rhs = f.value() * cx.engine.value(a3) + g.value() * cx.engine.value(a2);
    return std::abs(lhs - rhs);
}

// gamma^2 as the normalized sum of squared coordinate brackets, indices
// lowered with the ambient metric.
double gamma_sq_sum_residual(const BracketContext& cx) {
    const PointFrame& fr = cx.frame();
    const int n = fr.n, m = fr.m;
    int mn = 1;
    for (int a = 0; a < n; ++a) mn *= m;

    std::vector<double> b(mn);
    std::vector<int> digits(n);
    for (int code = 0; code < mn; ++code) {
        int rem = code;
        for (int a = n - 1; a >= 0; --a) {
            digits[a] = rem % m;
            rem /= m;
        }
        std::vector<const Jet*> args(n);
        for (int a = 0; a < n; ++a) args[a] = &fr.x_jets[digits[a]];
        b[code] = cx.engine.value(args);
    }

    double total = 0.0;
    if (fr.ambient_euclidean) {
        for (int code = 0; code < mn; ++code) total += b[code] * b[code];
    } else {
        std::vector<int> d2(n);
        for (int code = 0; code < mn; ++code) {
            if (b[code] == 0.0) continue;
            int rem = code;
            for (int a = n - 1; a >= 0; --a) {
                digits[a] = rem % m;
                rem /= m;
            }
            for (int other = 0; other < mn; ++other) {
                if (b[other] == 0.0) continue;
                int r2 = other;
                for (int a = n - 1; a >= 0; --a) {
                    d2[a] = r2 % m;
                    r2 /= m;
                }
                double w = 1.0;
                for (int a = 0; a < n; ++a) w *= fr.gbar_at(digits[a], d2[a]);
                total += b[code] * w * b[other];
            }
        }
    }
    return std::abs(total / factorial(n) - cx.gamma2);
}

// det(g) g^{ba} = (1/(n-1)!) eps^{a avec} eps^{b bvec} prod g_{a_t b_t}.
double cofactor_residual(const MetricData& md) {
    const int n = md.n;
    const auto perms = signed_perms(n);
    double worst = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            double sum = 0.0;
            for (const SignedPerm& sp : perms) {
                if (sp.idx[0] != a) continue;
                for (const SignedPerm& tp : perms) {
                    if (tp.idx[0] != b) continue;
                    double prod = 1.0;
                    for (int t = 1; t < n; ++t) prod *= md.g(sp.idx[t], tp.idx[t]);
                    sum += sp.sign * tp.sign * prod;
                }
            }
            sum /= factorial(n - 1);
            worst = std::max(worst, std::abs(sum - md.det_g * md.g_inv(b, a)));
        }
    return worst;
}

// Test-function sets for the Codazzi checks: empty for n = 2; for n = 3
// the chart coordinates u1, u2 and the transcendental sin(u1).
std::vector<std::vector<Jet>> cm_test_functions(const PointFrame& fr) {
    const int n = fr.n;
    if (n == 2) return {{}};
    Jet u1 = Jet::variable(0, fr.u[0], n, 3);
    Jet u2 = Jet::variable(1, fr.u[1], n, 3);
    return {{u1}, {u2}, {apply_univariate(u1, UnivariateFn::sin)}};
}

// Runs everything applicable at one frame; keys are check ids. Checks not
// applicable at this (n, m, ambient) are simply absent.
std::map<std::string, double> point_residuals(const EmbeddingSpec& spec, const Vec& u) {
    PointFrame fr = frame_at(spec, u, 3);
    MetricData md = induced_metric(fr);
    ConnectionCurvature cc = sigma_connection_curvature(fr, md);
    NormalFrame nf = gram_schmidt_normals(fr);
    ShapeData sd = shape_data(fr, md, nf);
    BracketContext cx = make_context(fr);
    BracketTensors bt = build_tensors(cx, nf);

    const int n = fr.n, m = fr.m, p = nf.p;
    const bool euclid = fr.ambient_euclidean;
    std::map<std::string, double> R;

    R["bracket-antisym"] = antisym_residual(cx);
    R["bracket-leibniz"] = leibniz_residual(cx);
    R["gamma-sq-sum"] = gamma_sq_sum_residual(cx);
    R["cofactor-lemma"] = cofactor_residual(md);

    R["oracle-metric-inverse"] = (md.g * md.g_inv - Mat::identity(n)).max_abs();
    {
        double h_sym = 0.0;
        for (int A = 0; A < p; ++A)
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    h_sym = std::max(h_sym, std::abs(sd.h_at(A, a, b) - sd.h_at(A, b, a)));
        R["oracle-h-symmetric"] = h_sym;
        R["oracle-gauss-consistency"] =
            std::max(std::abs(cc.scalar - sd.scalar_gauss),
                     (cc.ricci_mixed - sd.ricci_gauss).max_abs());
        double d_anti = 0.0;
        for (int a = 0; a < n; ++a)
            for (int A = 0; A < p; ++A)
                for (int B = 0; B < p; ++B)
                    d_anti = std::max(d_anti,
                                      std::abs(sd.dcoef_at(a, A, B) + sd.dcoef_at(a, B, A)));
        R["oracle-dcoef-antisym"] = d_anti;
    }

    PbstReport pb = check_pbst(cx, md, nf, sd, bt);
    R["pbst-p2"] = std::max(pb.full_P2, pb.restr_P2);
    R["pbst-b"] = std::max(pb.full_B, pb.restr_B);
    R["pbst-st"] = std::max(pb.full_ST, pb.restr_ST);
    R["pbst-t-form"] = pb.t_forms;
    R["trace-P2"] = pb.trace_P2;
    R["trace-B"] = pb.trace_B;
    R["trace-ST"] = pb.trace_ST;

    ProjectionReport pj = projection_and_H(cx, nf, sd, bt);
    R["proj-idempotent"] = pj.idempotent;
    R["proj-tangent-fix"] = pj.tangent_fix;
    R["proj-normal-kill"] = pj.normal_kill;
    R["mean-curvature"] = pj.H_vs_oracle;

    NormalConnReport nc = normal_connection(cx, nf, sd, bt);
    R["normal-connection"] = nc.vs_oracle;
    R["nconn-antisym"] = nc.antisym;

    R["ricci-bracket"] = ricci_bracket(cx, md, sd, bt).residual;

    ZFamily zf = z_normals(cx);
    ZReport zr = check_z(cx, nf, zf);
    R["z-unit"] = zr.unit;
    R["z-perp"] = zr.perp;
    R["z-span"] = zr.span;
    R["z-count"] = zr.count;
    R["z-trace"] = zr.trace;
    R["z-idem"] = zr.idem;
    R["z-eigs"] = zr.eigs;

    if (euclid) {
        static const double weights[3] = {1.0, 0.7, -0.4};
        Vec X(m, 0.0);
        for (int a = 0; a < n; ++a)
            for (int i = 0; i < m; ++i) X[i] += weights[a] * fr.tangent(a, i);
        NormalFreeSums ns = normal_free_sums(cx, nf, bt, X);
        R["nfree-trbb"] = ns.r1;
        R["nfree-bsq"] = ns.r2;
        R["nfree-trbn"] = ns.r3;
    }

    if (p == 1) R["sym-functions"] = symmetric_functions(cx, sd, bt).residual;
    if (p == 1 && euclid) R["detw-bracket"] = detw_bracket(cx, md, nf, sd).residual;

    {
        double vs_def = 0, wpi = 0, thm = 0, flat = 0, tang = 0;
        for (const std::vector<Jet>& fs : cm_test_functions(fr)) {
            CmReport cm = cm_residual(cx, md, cc, nf, sd, fs);
            vs_def = std::max(vs_def, cm.ca_vs_def);
            wpi = std::max(wpi, cm.wpi);
            thm = std::max(thm, cm.thm);
            flat = std::max(flat, cm.flat);
            tang = std::max(tang, cm.tangency);
        }
        R["cm-bracket-vs-def"] = vs_def;
        R["cm-wpi"] = wpi;
        R["cm-thm"] = thm;
        R["cm-tangency"] = tang;
        if (euclid) R["cm-flat"] = flat;
    }

    if (n == 2 && euclid) {
        SurfaceCmReport sc = cm_surface(cx, md, cc, nf, sd, bt);
        R["cm-surface-compact"] = sc.compact;
        R["cm-surface-swap"] = sc.swap_f;
        if (m == 3) {
            R["cm-surface-r3"] = sc.r3;
            R["cm-p2-form"] = sc.p2_form;
            R["cm-classical-gradh"] = sc.classical;
        }
    }

    if (p == 1 && euclid) {
        double swap = 0, gradh = 0, closure = 0;
        for (const std::vector<Jet>& fs : cm_test_functions(fr)) {
            HypersurfaceCmReport hc = cm_hypersurface_identities(cx, md, cc, nf, sd, fs);
            swap = std::max(swap, hc.swap_f);
            gradh = std::max(gradh, hc.grad_h);
            closure = std::max(closure, hc.closure);
        }
        R["cm-hyp-swap"] = swap;
        R["cm-hyp-gradh"] = gradh;
        R["cm-hyp-closure"] = closure;
    }

    if (n == 2 && m == 3)
        R["poisson-r3"] = poisson_identity(cx.engine, fr.x_jets).residual;

    if (n == 2) {
        SurfaceKReport kr = surface_K(cx, md, cc, nf, bt);
        R["k-bracket"] = kr.r_S;
        if (euclid) {
            R["k-direct"] = kr.r_direct;
            R["k-znormal"] = kr.r_Z;
        }
        ComplexStructureReport cs = complex_structure(cx, md, bt);
        R["complex-squared"] = cs.squared;
        R["complex-match"] = cs.match;
    }

    return R;
}

struct CellOutcome {
    bool ok = false;
    std::map<std::string, double> residuals;
    std::string skip_reason;
};

// Index-sharded worker pool; results land in pre-sized slots so the
// aggregation order never depends on scheduling.
template <typename F>
void parallel_for(int count, F&& body) {
    int workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    workers = std::min(workers, count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace

// =====================================================================
// Suite
// =====================================================================

IdentityReport run_suite(const EmbeddingSpec& spec, const std::vector<Vec>& points,
                         const SuiteOptions& opts) {
    // Resolve the id selection in catalog order.
    std::vector<const CheckInfo*> selected;
    if (opts.ids.empty()) {
        for (const CheckInfo& c : check_catalog()) selected.push_back(&c);
    } else {
        std::set<std::string> wanted(opts.ids.begin(), opts.ids.end());
        for (const std::string& id : wanted)
            if (!find_check(id)) throw ConfigError("unknown check id: " + id);
        for (const CheckInfo& c : check_catalog())
            if (wanted.count(c.id)) selected.push_back(&c);
    }

    std::vector<DensityKind> modes{DensityKind::sqrt_g, DensityKind::one};
    if (spec.density == DensityKind::custom) modes.push_back(DensityKind::custom);

    IdentityReport rep;
    rep.spec_name = spec.name;
    rep.n = spec.n;
    rep.m = spec.m;
    rep.p = spec.p();
    rep.sampling = "explicit(" + std::to_string(points.size()) + " points)";
    rep.points = points;
    for (DensityKind k : modes) rep.densities.push_back(density_kind_name(k));

    const int P = static_cast<int>(points.size());
    const int D = static_cast<int>(modes.size());
    std::vector<EmbeddingSpec> mode_specs;
    for (DensityKind k : modes) mode_specs.push_back(spec.with_density(k));

    std::vector<CellOutcome> cells(static_cast<std::size_t>(P) * D);
    parallel_for(P * D, [&](int idx) {
        const int k = idx / D, j = idx % D;
        CellOutcome& out = cells[idx];
        try {
            out.residuals = point_residuals(mode_specs[j], points[k]);
            out.ok = true;
        } catch (const DegeneratePointError& e) {
            out.skip_reason = e.what();
        } catch (const ConfigError& e) {
            out.skip_reason = e.what();
        } catch (const std::domain_error& e) {
            out.skip_reason = e.what();
        }
    });

    for (int k = 0; k < P; ++k)
        for (int j = 0; j < D; ++j) {
            const CellOutcome& cell = cells[static_cast<std::size_t>(k) * D + j];
            if (!cell.ok)
                rep.skipped.push_back({k, rep.densities[j], cell.skip_reason});
            for (const CheckInfo* info : selected) {
                IdentityCheck row;
                row.id = info->id;
                row.statement = info->statement;
                row.point_index = k;
                row.point = points[k];
                row.density = rep.densities[j];
                row.tol = opts.tol_override.value_or(info->tol);
                if (!cell.ok) {
                    row.status = "skipped-degenerate";
                    row.reason = cell.skip_reason;
                } else if (auto it = cell.residuals.find(info->id);
                           it != cell.residuals.end()) {
                    row.residual = it->second;
                    row.status = row.residual <= row.tol ? "pass" : "fail";
                } else {
                    row.status = "n/a";
                }
                rep.checks.push_back(std::move(row));
            }
        }

    for (const IdentityCheck& c : rep.checks) {
        if (c.status == "pass")
            ++rep.n_pass;
        else if (c.status == "fail")
            ++rep.n_fail;
        else if (c.status == "n/a")
            ++rep.n_na;
        else
            ++rep.n_skipped;
    }
    return rep;
}

IdentityReport run_suite(const EmbeddingSpec& spec, const SamplePlan& plan,
                         const SuiteOptions& opts) {
    IdentityReport rep = run_suite(spec, sample_points(spec, plan), opts);
    rep.sampling = plan.describe();
    rep.seed = plan.mode == SamplePlan::Mode::random ? plan.seed : 0;
    return rep;
}

// =====================================================================
// Serialization
// =====================================================================

std::string report_json(const IdentityReport& rep, int indent) {
    using json = nlohmann::ordered_json;
    json doc;
    doc["schema_version"] = 1;
    doc["spec"] = {{"name", rep.spec_name}, {"n", rep.n}, {"m", rep.m}, {"p", rep.p}};
    doc["sampling"] = rep.sampling;
    doc["seed"] = rep.seed;
    json pts = json::array();
    for (const Vec& u : rep.points) pts.push_back(u);
    doc["points"] = std::move(pts);
    doc["densities"] = rep.densities;
    doc["summary"] = {{"total", rep.checks.size()},
                      {"pass", rep.n_pass},
                      {"fail", rep.n_fail},
                      {"n/a", rep.n_na},
                      {"skipped", rep.n_skipped},
                      {"all_pass", rep.all_pass()}};
    json skips = json::array();
    for (const SkipNote& s : rep.skipped)
        skips.push_back({{"point", s.point_index}, {"density", s.density}, {"reason", s.reason}});
    doc["skipped_points"] = std::move(skips);
    json checks = json::array();
    for (const IdentityCheck& c : rep.checks) {
        json row;
        row["id"] = c.id;
        row["statement"] = c.statement;
        row["point"] = c.point_index;
        row["u"] = c.point;
        row["density"] = c.density;
        row["status"] = c.status;
        if (c.applicable()) {
            row["residual"] = c.residual;
            row["tol"] = c.tol;
        }
        if (!c.reason.empty()) row["reason"] = c.reason;
        checks.push_back(std::move(row));
    }
    doc["checks"] = std::move(checks);
    return doc.dump(indent) + "\n";
}

std::string report_summary(const IdentityReport& rep) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "%s: %d pass, %d fail, %d n/a, %d skipped over %zu points x %zu densities "
                  "[%s]",
                  rep.spec_name.c_str(), rep.n_pass, rep.n_fail, rep.n_na, rep.n_skipped,
                  rep.points.size(), rep.densities.size(), rep.all_pass() ? "OK" : "FAIL");
    return buf;
}

}  // namespace nambugeo
