#include "nambugeo/brackets.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nambugeo {

namespace {

struct Perm {
    std::vector<int> idx;
    int sign;
};

// All permutations of {0..k-1} with signs, cached per size.
const std::vector<Perm>& perms(int k) {
    static std::vector<std::vector<Perm>> cache = [] {
        std::vector<std::vector<Perm>> all(7);
        for (int k = 1; k <= 6; ++k) {
            std::vector<int> v(k);
            for (int i = 0; i < k; ++i) v[i] = i;
            do {
                int sign = 1;
                for (int i = 0; i < k; ++i)
                    for (int j = i + 1; j < k; ++j)
                        if (v[i] > v[j]) sign = -sign;
                all[k].push_back({v, sign});
            } while (std::next_permutation(v.begin(), v.end()));
        }
        return all;
    }();
    return cache[k];
}

// Dense enumeration of length-k tuples over {0..m-1}, most significant
// digit first.
struct Tuples {
    int m = 0, k = 0, count = 1;
    Tuples(int m_, int k_) : m(m_), k(k_) {
        for (int i = 0; i < k; ++i) count *= m;
    }
    void decode(int idx, int* out) const {
        for (int t = k - 1; t >= 0; --t) {
            out[t] = idx % m;
            idx /= m;
        }
    }
    int encode(const int* d) const {
        int v = 0;
        for (int t = 0; t < k; ++t) v = v * m + d[t];
        return v;
    }
};

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

// Adjugate of a symmetric k x k matrix (k <= 3), a * adj(a) = det(a) * id.
Mat adjugate(const Mat& a, int k) {
    Mat r(k, k);
    if (k == 1) {
        r(0, 0) = 1.0;
    } else if (k == 2) {
        r(0, 0) = a(1, 1);
        r(1, 1) = a(0, 0);
        r(0, 1) = -a(0, 1);
        r(1, 0) = -a(1, 0);
    } else {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const int r1 = (j + 1) % 3, r2 = (j + 2) % 3;
                const int c1 = (i + 1) % 3, c2 = (i + 2) % 3;
                r(i, j) = a(r1, c1) * a(r2, c2) - a(r1, c2) * a(r2, c1);
            }
    }
    return r;
}

DerivIndex unit_index(int var, int n) {
    DerivIndex d;
    d.exponents.assign(n, 0);
    d.exponents[var] = 1;
    return d;
}

double det_small(const double* a, int k) {
    if (k == 1) return a[0];
    if (k == 2) return a[0] * a[3] - a[1] * a[2];
    return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
           a[2] * (a[3] * a[7] - a[4] * a[6]);
}

Vec tangent_row(const PointFrame& fr, int a) {
    Vec v(fr.m);
    for (int i = 0; i < fr.m; ++i) v[i] = fr.tangent(a, i);
    return v;
}

Vec gbar_lower(const PointFrame& fr, const Vec& v) {
    Vec w(fr.m, 0.0);
    for (int i = 0; i < fr.m; ++i)
        for (int j = 0; j < fr.m; ++j) w[i] += fr.gbar(i, j) * v[j];
    return w;
}

Vec mat_apply(const Mat& e, const Vec& v) { return mat_vec(e, v); }

double brv(const BracketEngine& eng, std::initializer_list<const Jet*> il) {
    return eng.value(std::vector<const Jet*>(il));
}

Jet brj(const BracketEngine& eng, std::initializer_list<const Jet*> il) {
    return eng.jet(std::vector<const Jet*>(il));
}

double max_abs_diff(const Vec& a, const Vec& b) {
    double r = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) r = std::max(r, std::abs(a[i] - b[i]));
    return r;
}

double max_abs(const Vec& a) {
    double r = 0.0;
    for (double v : a) r = std::max(r, std::abs(v));
    return r;
}

// Bracket values of coordinate functions only, for all n-tuples: the
// determinant of rows d_a x^{c_t} over rho.
std::vector<double> coord_bracket_values(const BracketContext& cx) {
    const PointFrame& fr = cx.frame();
    const int n = fr.n, m = fr.m;
    Tuples tn(m, n);
    std::vector<double> br(tn.count);
    std::vector<int> c(n);
    std::vector<double> d(n * n);
    const double inv_rho = cx.engine.inv_rho.value();
    for (int idx = 0; idx < tn.count; ++idx) {
        tn.decode(idx, c.data());
        for (int a = 0; a < n; ++a)
            for (int k = 0; k < n; ++k) d[a * n + k] = fr.tangent(a, c[k]);
        br[idx] = det_small(d.data(), n) * inv_rho;
    }
    return br;
}

// Jets of {x^{c_1},...,x^{c_n}} for all n-tuples (order 2).
std::vector<Jet> coord_bracket_jets(const BracketContext& cx) {
    const PointFrame& fr = cx.frame();
    const int n = fr.n, m = fr.m;
    Tuples tn(m, n);
    std::vector<Jet> out(tn.count);
    std::vector<int> c(n);
    for (int idx = 0; idx < tn.count; ++idx) {
        tn.decode(idx, c.data());
        std::vector<const Jet*> args(n);
        for (int k = 0; k < n; ++k) args[k] = &fr.x_jets[c[k]];
        out[idx] = cx.engine.jet(args);
    }
    return out;
}

// gbar products over multi-index tuples: GI(I,J) = prod_t gbar(I_t, J_t).
Mat tuple_metric(const PointFrame& fr, const Tuples& tp) {
    Mat gi(tp.count, tp.count);
    std::vector<int> a(std::max(tp.k, 1)), b(std::max(tp.k, 1));
    for (int i = 0; i < tp.count; ++i) {
        tp.decode(i, a.data());
        for (int j = 0; j < tp.count; ++j) {
            tp.decode(j, b.data());
            double v = 1.0;
            for (int t = 0; t < tp.k; ++t) v *= fr.gbar(a[t], b[t]);
            gi(i, j) = v;
        }
    }
    return gi;
}

Mat sym_sqrt_inverse(const Mat& g) {
    EigenResult eg = jacobi_eigen(g);
    const int k = static_cast<int>(g.rows());
    Mat r(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            double v = 0.0;
            for (int e = 0; e < k; ++e) {
                if (eg.values[e] <= 0.0)
                    throw std::domain_error("sym_sqrt_inverse: matrix not positive-definite");
                v += eg.vectors(i, e) * eg.vectors(j, e) / std::sqrt(eg.values[e]);
            }
            r(i, j) = v;
        }
    return r;
}

}  // namespace

// ---------------------------------------------------------------------

double BracketEngine::value(const std::vector<const Jet*>& args) const {
    if (static_cast<int>(args.size()) != n)
        throw std::invalid_argument("bracket: expected " + std::to_string(n) + " arguments");
    double d[9];
    for (int a = 0; a < n; ++a) {
        DerivIndex di = unit_index(a, n);
        for (int k = 0; k < n; ++k) d[a * n + k] = args[k]->partial(di);
    }
    return det_small(d, n) * inv_rho.value();
}

Jet BracketEngine::jet(const std::vector<const Jet*>& args) const {
    if (static_cast<int>(args.size()) != n)
        throw std::invalid_argument("bracket: expected " + std::to_string(n) + " arguments");
    int ord = args[0]->order();
    for (const Jet* a : args) ord = std::min(ord, a->order());
    ord -= 1;
    if (ord < 0) throw std::invalid_argument("bracket jet: argument of order 0");
    std::vector<Jet> d(n * n);
    for (int a = 0; a < n; ++a)
        for (int k = 0; k < n; ++k) d[a * n + k] = args[k]->derivative(a).truncated(ord);
    return jet_det(d, n) * inv_rho.truncated(ord);
}

double BracketEngine::value(const std::vector<Jet>& args) const {
    std::vector<const Jet*> p(args.size());
    for (std::size_t i = 0; i < args.size(); ++i) p[i] = &args[i];
    return value(p);
}

Jet BracketEngine::jet(const std::vector<Jet>& args) const {
    std::vector<const Jet*> p(args.size());
    for (std::size_t i = 0; i < args.size(); ++i) p[i] = &args[i];
    return jet(p);
}

BracketEngine make_engine(int n, const Jet& rho_jet) {
    BracketEngine e;
    e.n = n;
    e.inv_rho = Jet::constant(1.0, rho_jet.n_vars(), rho_jet.order()) / rho_jet;
    return e;
}

BracketContext make_context(const PointFrame& fr) {
    BracketContext cx;
    cx.fr = &fr;
    cx.engine = make_engine(fr.n, fr.rho_jet);
    cx.gamma = fr.gamma;
    cx.gamma2 = fr.gamma * fr.gamma;
    if (cx.gamma < 1e-6)
        throw DegeneratePointError("gamma = " + std::to_string(cx.gamma) + " < 1e-6");
    cx.gamma2_jet = fr.det_g_jet * cx.engine.inv_rho * cx.engine.inv_rho;
    return cx;
}

// ---------------------------------------------------------------------

BracketTensors build_tensors(const BracketContext& cx, const NormalFrame& nf) {
    const PointFrame& fr = cx.frame();
    const int n = fr.n, m = fr.m, p = nf.p;
    Tuples ti(m, n - 1);

    BracketTensors bt;
    bt.n = n;
    bt.m = m;
    bt.p = p;
    bt.nI = ti.count;

    const double norm = 1.0 / std::sqrt(factorial(n - 1));
    const double sgn_n = (n % 2 == 0) ? 1.0 : -1.0;
    const double inv_rho = cx.engine.inv_rho.value();

    // P^{iI} = norm {x^i, vec{x}^I}
    std::vector<double> brn = coord_bracket_values(cx);
    Tuples tn(m, n);
    bt.P.assign((std::size_t)m * ti.count, 0.0);
    {
        std::vector<int> full(n), I(std::max(n - 1, 1));
        for (int i = 0; i < m; ++i)
            for (int Ii = 0; Ii < ti.count; ++Ii) {
                ti.decode(Ii, I.data());
                full[0] = i;
                for (int t = 0; t < n - 1; ++t) full[t + 1] = I[t];
                bt.P[i * ti.count + Ii] = norm * brn[tn.encode(full.data())];
            }
    }

    // S_A^{iI} = sgn_n norm (eps^{a avec}/rho) (d_a x^i) prod_t (D_{a_t} N_A)^{I_t}
    bt.S.assign((std::size_t)p * m * ti.count, 0.0);
    {
        std::vector<int> I(std::max(n - 1, 1));
        for (int A = 0; A < p; ++A)
            for (int Ii = 0; Ii < ti.count; ++Ii) {
                ti.decode(Ii, I.data());
                for (int i = 0; i < m; ++i) {
                    double s = 0.0;
                    for (const Perm& pr : perms(n)) {
                        double t = pr.sign * fr.tangent(pr.idx[0], i);
                        for (int q = 0; q < n - 1; ++q)
                            t *= nf.deriv_at(pr.idx[q + 1], A, I[q]);
                        s += t;
                    }
                    bt.S[(A * m + i) * ti.count + Ii] = sgn_n * norm * inv_rho * s;
                }
            }
    }

    // T_A^{Ij} = sgn_n norm (eps^{avec a}/rho) (d_{avec} vec{x}^I) (D_a N_A)^j
    bt.T.assign((std::size_t)p * ti.count * m, 0.0);
    {
        std::vector<int> I(std::max(n - 1, 1));
        for (int A = 0; A < p; ++A)
            for (int Ii = 0; Ii < ti.count; ++Ii) {
                ti.decode(Ii, I.data());
                for (int j = 0; j < m; ++j) {
                    double s = 0.0;
                    for (const Perm& pr : perms(n)) {
                        double t = pr.sign * nf.deriv_at(pr.idx[n - 1], A, j);
                        for (int q = 0; q < n - 1; ++q) t *= fr.tangent(pr.idx[q], I[q]);
                        s += t;
                    }
                    bt.T[(A * ti.count + Ii) * m + j] = sgn_n * norm * inv_rho * s;
                }
            }
    }

    // Bracket form of T: sgn_n norm ({vec{x}^I, n_A^j} + {vec{x}^I, x^k} Gb^j_{kl} n_A^l)
    bt.T_bracket.assign((std::size_t)p * ti.count * m, 0.0);
    {
        std::vector<int> I(std::max(n - 1, 1));
        std::vector<const Jet*> args(n);
        for (int A = 0; A < p; ++A)
            for (int Ii = 0; Ii < ti.count; ++Ii) {
                ti.decode(Ii, I.data());
                for (int t = 0; t < n - 1; ++t) args[t] = &fr.x_jets[I[t]];
                for (int j = 0; j < m; ++j) {
                    args[n - 1] = &nf.n_jet(A, j);
                    double v = cx.engine.value(args);
                    if (!fr.ambient_euclidean)
                        for (int k = 0; k < m; ++k) {
                            args[n - 1] = &fr.x_jets[k];
                            const double bk = cx.engine.value(args);
                            for (int l = 0; l < m; ++l)
                                v += bk * fr.gammabar_at(j, k, l) * nf.normals(A, l);
                        }
                    bt.T_bracket[(A * ti.count + Ii) * m + j] = sgn_n * norm * v;
                }
            }
    }

    // Contractions, with the second ambient index lowered by gbar.
    const bool euclid = fr.ambient_euclidean;
    Mat gi;
    if (!euclid) gi = tuple_metric(fr, ti);

    auto contract = [&](const double* left, const double* right) {
        // left[i*nI + I], right[J*m + k] -> endo(i,k)
        Mat up(m, m);
        for (int i = 0; i < m; ++i)
            for (int k = 0; k < m; ++k) {
                double v = 0.0;
                if (euclid) {
                    for (int I = 0; I < ti.count; ++I)
                        v += left[i * ti.count + I] * right[I * m + k];
                } else {
                    for (int I = 0; I < ti.count; ++I)
                        for (int J = 0; J < ti.count; ++J)
                            v += left[i * ti.count + I] * gi(I, J) * right[J * m + k];
                }
                up(i, k) = v;
            }
        Mat endo(m, m);
        for (int i = 0; i < m; ++i)
            for (int k = 0; k < m; ++k) {
                double v = 0.0;
                for (int j = 0; j < m; ++j) v += up(i, j) * fr.gbar(j, k);
                endo(i, k) = v;
            }
        return endo;
    };

    // P as a "right" factor needs layout [J*m + k] with value P^{kJ}.
    std::vector<double> p_right((std::size_t)ti.count * m);
    for (int k = 0; k < m; ++k)
        for (int J = 0; J < ti.count; ++J)
            p_right[J * m + k] = bt.P[k * ti.count + J];

    bt.P2 = contract(bt.P.data(), p_right.data());
    bt.trP2 = bt.P2.trace();
    for (int A = 0; A < p; ++A) {
        bt.B.push_back(contract(bt.P.data(), &bt.T[(std::size_t)A * ti.count * m]));
        bt.ST.push_back(
            contract(&bt.S[(std::size_t)A * m * ti.count], &bt.T[(std::size_t)A * ti.count * m]));
        bt.trB.push_back(bt.B[A].trace());
        bt.trST.push_back(bt.ST[A].trace());
    }
    return bt;
}

// ---------------------------------------------------------------------

PbstReport check_pbst(const BracketContext& cx, const MetricData& md,
                      const NormalFrame& nf, const ShapeData& sd,
                      const BracketTensors& bt) {
    const PointFrame& fr = cx.frame();
    const int n = fr.n, m = fr.m, p = nf.p;
    const double g2 = cx.gamma2;

    PbstReport rep;

    // Expected endomorphisms from the frame side.
    std::vector<Vec> e_low(n), dN_low(n * p);
    for (int a = 0; a < n; ++a) e_low[a] = gbar_lower(fr, tangent_row(fr, a));
    for (int a = 0; a < n; ++a)
        for (int A = 0; A < p; ++A) {
            Vec d(m);
            for (int i = 0; i < m; ++i) d[i] = nf.deriv_at(a, A, i);
            dN_low[a * p + A] = gbar_lower(fr, d);
        }

    Mat expP2(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            double v = 0.0;
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    v += g2 * fr.tangent(b, i) * md.g_inv(a, b) * e_low[a][j];
            expP2(i, j) = v;
        }
    rep.full_P2 = (bt.P2 - expP2).max_abs();

    for (int A = 0; A < p; ++A) {
        const double detW = determinant(sd.W[A]);
        Mat expB(m, m), expST(m, m);
        // det(W) h^{ab} stays finite through adj(h)/det(g) even when the
        // second fundamental form is singular.
        Mat dw_h_inv = adjugate(sd.h[A], n);
        dw_h_inv *= 1.0 / md.det_g;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                double vb = 0.0, vst = 0.0;
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b) {
                        vb += -g2 * fr.tangent(b, i) * md.g_inv(a, b) * dN_low[a * p + A][j];
                        vst += g2 * fr.tangent(b, i) * dw_h_inv(a, b) *
                               dN_low[a * p + A][j];
                    }
                expB(i, j) = vb;
                expST(i, j) = vst;
            }
        rep.full_B = std::max(rep.full_B, (bt.B[A] - expB).max_abs());
        rep.full_ST = std::max(rep.full_ST, (bt.ST[A] - expST).max_abs());

        // Restricted statements on tangent vectors.
        for (int c = 0; c < n; ++c) {
            Vec ec = tangent_row(fr, c);
            Vec w(m, 0.0);  // W_A(e_c) in ambient components
            for (int d = 0; d < n; ++d)
                for (int i = 0; i < m; ++i) w[i] += sd.W[A](d, c) * fr.tangent(d, i);
            Vec b1 = mat_apply(bt.B[A], ec), st1 = mat_apply(bt.ST[A], ec);
            for (int i = 0; i < m; ++i) {
                rep.restr_B = std::max(rep.restr_B, std::abs(b1[i] - g2 * w[i]));
                rep.restr_ST = std::max(rep.restr_ST, std::abs(st1[i] + g2 * detW * ec[i]));
            }
        }
        rep.trace_B = std::max(rep.trace_B, std::abs(bt.trB[A] - g2 * sd.W[A].trace()));
        rep.trace_ST = std::max(rep.trace_ST, std::abs(bt.trST[A] / n + g2 * detW));
    }

    for (int c = 0; c < n; ++c) {
        Vec ec = tangent_row(fr, c);
        Vec p1 = mat_apply(bt.P2, ec);
        for (int i = 0; i < m; ++i)
            rep.restr_P2 = std::max(rep.restr_P2, std::abs(p1[i] - g2 * ec[i]));
    }
    rep.trace_P2 = std::abs(bt.trP2 / n - g2);

    for (std::size_t t = 0; t < bt.T.size(); ++t)
        rep.t_forms = std::max(rep.t_forms, std::abs(bt.T[t] - bt.T_bracket[t]));
    return rep;
}

ProjectionReport projection_and_H(const BracketContext& cx, const NormalFrame& nf,
                                  const ShapeData& sd, const BracketTensors& bt) {
    const PointFrame& fr = cx.frame();
    const int n = fr.n, m = fr.m, p = nf.p;

    ProjectionReport rep;
    rep.Pi = bt.P2;
    rep.Pi *= n / bt.trP2;
    rep.idempotent = (rep.Pi * rep.Pi - rep.Pi).max_abs();
    for (int a = 0; a < n; ++a) {
        Vec ea = tangent_row(fr, a);
        rep.tangent_fix = std::max(rep.tangent_fix, max_abs_diff(mat_apply(rep.Pi, ea), ea));
    }
    for (int A = 0; A < p; ++A) {
        Vec nA(m);
        for (int i = 0; i < m; ++i) nA[i] = nf.normals(A, i);
        rep.normal_kill = std::max(rep.normal_kill, max_abs(mat_apply(rep.Pi, nA)));
    }

    rep.H.assign(m, 0.0);
    for (int A = 0; A < p; ++A)
        for (int i = 0; i < m; ++i) rep.H[i] += bt.trB[A] * nf.normals(A, i) / bt.trP2;
    rep.H_vs_oracle = max_abs_diff(rep.H, sd.H);
    return rep;
}

NormalConnReport normal_connection(const BracketContext& cx, const NormalFrame& nf,
                                   const ShapeData& sd, const BracketTensors& bt) {
    const PointFrame& fr = cx.frame();
    const int n = fr.n, m = fr.m, p = nf.p;

    NormalConnReport rep;
    rep.D.assign((std::size_t)n * p * p, 0.0);
    for (int c = 0; c < n; ++c) {
        Vec ec_low = gbar_lower(fr, tangent_row(fr, c));
        for (int A = 0; A < p; ++A) {
            Vec nA(m);
            for (int i = 0; i < m; ++i) nA[i] = nf.normals(A, i);
            for (int B = 0; B < p; ++B) {
                Vec bn = mat_apply(bt.B[B], nA);
                double v = dot(bn, ec_low) / cx.gamma2;
                rep.D[(c * p + A) * p + B] = v;
            }
        }
    }
    for (int c = 0; c < n; ++c)
        for (int A = 0; A < p; ++A)
            for (int B = 0; B < p; ++B) {
                rep.antisym = std::max(rep.antisym,
                                       std::abs(rep.D[(c * p + A) * p + B] +
                                                rep.D[(c * p + B) * p + A]));
                rep.vs_oracle =
                    std::max(rep.vs_oracle, std::abs(rep.D[(c * p + A) * p + B] -
                                                     sd.dcoef_at(c, A, B)));
            }
    return rep;
}

RicciReport ricci_bracket(const BracketContext& cx, const MetricData& md,
                          const ShapeData& sd, const BracketTensors& bt) {
    const PointFrame& fr = cx.frame();
    const int n = fr.n, m = fr.m, p = sd.p;
    const double ig4 = 1.0 / (cx.gamma2 * cx.gamma2);

    RicciReport rep;
    rep.bracket_side = Mat(m, n);
    rep.oracle_side = Mat(m, n);

    // Ambient curvature part, as in the Gauss relation.
    Mat amb(n, n);
    if (!fr.ambient_euclidean) {
        std::vector<Vec> e_low(n);
        for (int a = 0; a < n; ++a) e_low[a] = gbar_lower(fr, tangent_row(fr, a));
        for (int e = 0; e < n; ++e)
            for (int b = 0; b < n; ++b) {
                double v = 0.0;
                for (int a = 0; a < n; ++a)
                    for (int c = 0; c < n; ++c)
                        for (int d = 0; d < n; ++d) {
                            double t = 0.0;
                            for (int i = 0; i < m; ++i)
                                for (int j = 0; j < m; ++j)
                                    for (int k = 0; k < m; ++k)
                                        for (int l = 0; l < m; ++l)
                                            t += e_low[a][i] * fr.rbar(i, j, k, l) *
                                                 fr.tangent(b, j) * fr.tangent(c, k) *
                                                 fr.tangent(d, l);
                            v += md.g_inv(e, d) * md.g_inv(a, c) * t;
                        }
                amb(e, b) = v;
            }
    }

    for (int b = 0; b < n; ++b) {
        Vec X = tangent_row(fr, b);
        Vec lhs(m, 0.0);
        for (int e = 0; e < n; ++e)
            for (int i = 0; i < m; ++i) lhs[i] += amb(e, b) * fr.tangent(e, i);
        for (int A = 0; A < p; ++A) {
            Vec bx = mat_apply(bt.B[A], X);
            Vec bbx = mat_apply(bt.B[A], bx);
            for (int i = 0; i < m; ++i) lhs[i] += ig4 * (bt.trB[A] * bx[i] - bbx[i]);
        }
        Vec rhs(m, 0.0);
        for (int e = 0; e < n; ++e)
            for (int i = 0; i < m; ++i) rhs[i] += sd.ricci_gauss(e, b) * fr.tangent(e, i);
        for (int i = 0; i < m; ++i) {
            rep.bracket_side(i, b) = lhs[i];
            rep.oracle_side(i, b) = rhs[i];
            rep.residual = std::max(rep.residual, std::abs(lhs[i] - rhs[i]));
        }
    }
    return rep;
}

// ---------------------------------------------------------------------

ZFamily z_normals(const BracketContext& cx) {
    const PointFrame& fr = cx.frame();
    const int n = fr.n, m = fr.m, p = fr.m - fr.n;
    Tuples ta(m, p - 1);

    ZFamily zf;
    zf.n_alpha = ta.count;

    std::vector<double> brn = coord_bracket_values(cx);
    const double sdet = std::sqrt(determinant(fr.gbar));
    const double pref = 1.0 / (cx.gamma * factorial(n) * std::sqrt(factorial(p - 1)));

    // Zlow[j][alpha] = eps_{j kvec alpha} {x^{k_1},...,x^{k_n}}
    std::vector<double> zlow((std::size_t)m * ta.count, 0.0);
    Tuples tn(m, n);
    for (const Perm& pr : perms(m)) {
        int kd[6], ad[6];
        for (int t = 0; t < n; ++t) kd[t] = pr.idx[1 + t];
        for (int t = 0; t < p - 1; ++t) ad[t] = pr.idx[1 + n + t];
        zlow[pr.idx[0] * ta.count + ta.encode(ad)] += pr.sign * sdet * brn[tn.encode(kd)];
    }

    zf.Z.assign(ta.count, Vec(m, 0.0));
    for (int al = 0; al < ta.count; ++al)
        for (int i = 0; i < m; ++i) {
            double v = 0.0;
            for (int j = 0; j < m; ++j) v += fr.gbar_inv(i, j) * zlow[j * ta.count + al];
            zf.Z[al][i] = pref * v;
        }

    zf.Zsym = Mat(ta.count, ta.count);
    for (int a = 0; a < ta.count; ++a)
        for (int b = 0; b < ta.count; ++b) zf.Zsym(a, b) = fr.inner(zf.Z[a], zf.Z[b]);
    zf.G = tuple_metric(fr, ta);

    Mat gmh = sym_sqrt_inverse(zf.G);
    Mat s = gmh * zf.Zsym * gmh;
    for (int a = 0; a < ta.count; ++a)
        for (int b = a + 1; b < ta.count; ++b) {
            double v = 0.5 * (s(a, b) + s(b, a));
            s(a, b) = v;
            s(b, a) = v;
        }
    EigenResult eg = jacobi_eigen(s);
    zf.mu = eg.values;
    for (int r = 0; r < ta.count; ++r) {
        if (eg.values[r] <= 0.5) continue;
        Vec y(ta.count), c(ta.count, 0.0);
        for (int a = 0; a < ta.count; ++a) y[a] = eg.vectors(a, r);
        for (int a = 0; a < ta.count; ++a)
            for (int b = 0; b < ta.count; ++b) c[a] += gmh(a, b) * y[b];
        Vec nh(m, 0.0);
        for (int al = 0; al < ta.count; ++al)
            for (int i = 0; i < m; ++i) nh[i] += c[al] * zf.Z[al][i];
        zf.normals.push_back(nh);
        zf.normal_mu.push_back(eg.values[r]);
    }
    zf.trace = (zf.Zsym * inverse(zf.G)).trace();
    return zf;
}

ZReport check_z(const BracketContext& cx, const NormalFrame& nf, const ZFamily& zf) {
    const PointFrame& fr = cx.frame();
    const int n = fr.n, m = fr.m, p = nf.p;

    ZReport rep;
    for (std::size_t r = 0; r < zf.normals.size(); ++r)
        rep.unit = std::max(rep.unit,
                            std::abs(fr.inner(zf.normals[r], zf.normals[r]) - 1.0));
    for (const Vec& z : zf.Z)
        for (int a = 0; a < n; ++a)
            rep.perp = std::max(rep.perp, std::abs(fr.inner(z, tangent_row(fr, a))));

    Mat pb(m, m), pg(m, m);
    for (const Vec& nh : zf.normals) {
        Vec low = gbar_lower(fr, nh);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) pb(i, j) += nh[i] * low[j];
    }
    for (int A = 0; A < p; ++A) {
        Vec nA(m);
        for (int i = 0; i < m; ++i) nA[i] = nf.normals(A, i);
        Vec low = gbar_lower(fr, nA);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) pg(i, j) += nA[i] * low[j];
    }
    rep.span = (pb - pg).max_abs();
    rep.count = std::abs(static_cast<double>(zf.normals.size()) - p);
    rep.trace = std::abs(zf.trace - p);

    Mat gmh = sym_sqrt_inverse(zf.G);
    Mat s = gmh * zf.Zsym * gmh;
    rep.idem = (s * s - s).max_abs();
    for (double mu : zf.mu)
        rep.eigs = std::max(rep.eigs, std::min(std::abs(mu), std::abs(mu - 1.0)));
    return rep;
}

// ---------------------------------------------------------------------

NormalFreeSums normal_free_sums(const BracketContext& cx, const NormalFrame& nf,
                                const BracketTensors& bt, const Vec& X) {
    const PointFrame& fr = cx.frame();
    if (!fr.ambient_euclidean)
        throw std::invalid_argument("normal_free_sums: requires a flat ambient space");
    const int n = fr.n, m = fr.m, p = nf.p;
    Tuples tn(m, n), ti(m, n - 1), ta(m, p - 1);

    std::vector<double> brn = coord_bracket_values(cx);
    std::vector<Jet> wj = coord_bracket_jets(cx);

    // V[I][c] = {vec{x}^I, w_c}, U[i][c] = sum_I {x^i, vec{x}^I} V[I][c]
    std::vector<double> V((std::size_t)ti.count * tn.count);
    {
        std::vector<int> I(std::max(n - 1, 1));
        std::vector<const Jet*> args(n);
        for (int Ii = 0; Ii < ti.count; ++Ii) {
            ti.decode(Ii, I.data());
            for (int t = 0; t < n - 1; ++t) args[t] = &fr.x_jets[I[t]];
            for (int c = 0; c < tn.count; ++c) {
                args[n - 1] = &wj[c];
                V[Ii * tn.count + c] = cx.engine.value(args);
            }
        }
    }
    std::vector<double> U((std::size_t)m * tn.count, 0.0);
    {
        std::vector<int> full(n);
        for (int i = 0; i < m; ++i)
            for (int Ii = 0; Ii < ti.count; ++Ii) {
                ti.decode(Ii, full.data() + 1);
                full[0] = i;
                const double pb = brn[tn.encode(full.data())];
                if (pb == 0.0) continue;
                for (int c = 0; c < tn.count; ++c)
                    U[i * tn.count + c] += pb * V[Ii * tn.count + c];
            }
    }

    // One pass over ambient permutations, bucketing by the alpha part.
    std::vector<double> FU((std::size_t)ta.count * m * m, 0.0);
    std::vector<double> XU((std::size_t)ta.count * m, 0.0);
    std::vector<double> C3((std::size_t)ta.count * m, 0.0);
    for (const Perm& pr : perms(m)) {
        int cd[6], ad[6];
        const int j = pr.idx[0];
        for (int t = 0; t < n; ++t) cd[t] = pr.idx[1 + t];
        for (int t = 0; t < p - 1; ++t) ad[t] = pr.idx[1 + n + t];
        const int c = tn.encode(cd);
        const int al = ta.encode(ad);
        for (int i = 0; i < m; ++i) {
            FU[(al * m + j) * m + i] += pr.sign * U[i * tn.count + c];
            XU[al * m + i] += pr.sign * X[j] * U[i * tn.count + c];
        }
        C3[al * m + j] += pr.sign * brn[c];
    }

    const double c2 = factorial(n) * factorial(n) * factorial(n - 1) * factorial(n - 1) *
                      factorial(p - 1);
    const double pref = 1.0 / (cx.gamma2 * c2);
    const double sgn_n = (n % 2 == 0) ? 1.0 : -1.0;

    NormalFreeSums rep;
    rep.sum1.assign(m, 0.0);
    rep.sum2.assign(m, 0.0);
    rep.sum3.assign(m, 0.0);
    for (int al = 0; al < ta.count; ++al) {
        double ftr = 0.0;
        for (int j = 0; j < m; ++j) ftr += FU[(al * m + j) * m + j];
        for (int i = 0; i < m; ++i) {
            rep.sum1[i] += pref * ftr * XU[al * m + i];
            rep.sum3[i] += sgn_n * factorial(n - 1) * pref * ftr * C3[al * m + i];
            for (int j = 0; j < m; ++j)
                rep.sum2[i] += pref * FU[(al * m + j) * m + i] * XU[al * m + j];
        }
    }

    rep.ref1.assign(m, 0.0);
    rep.ref2.assign(m, 0.0);
    rep.ref3.assign(m, 0.0);
    for (int A = 0; A < p; ++A) {
        Vec bx = mat_apply(bt.B[A], X);
        Vec bbx = mat_apply(bt.B[A], bx);
        for (int i = 0; i < m; ++i) {
            rep.ref1[i] += bt.trB[A] * bx[i];
            rep.ref2[i] += bbx[i];
            rep.ref3[i] += bt.trB[A] * nf.normals(A, i);
        }
    }
    rep.r1 = max_abs_diff(rep.sum1, rep.ref1);
    rep.r2 = max_abs_diff(rep.sum2, rep.ref2);
    rep.r3 = max_abs_diff(rep.sum3, rep.ref3);
    return rep;
}

// ---------------------------------------------------------------------

DetWReport detw_bracket(const BracketContext& cx, const MetricData& md,
                        const NormalFrame& nf, const ShapeData& sd) {
    const PointFrame& fr = cx.frame();
    if (fr.m - fr.n != 1)
        throw std::invalid_argument("detw_bracket: requires a hypersurface (p = 1)");
    if (!fr.ambient_euclidean)
        throw std::invalid_argument("detw_bracket: requires a flat ambient space");
    const int n = fr.n, m = fr.m;
    Tuples tn(m, n), ti(m, n - 1);

    std::vector<double> brn = coord_bracket_values(cx);
    std::vector<Jet> wj = coord_bracket_jets(cx);

    // F[i][c...] = {x^i, w_{c_1}, ..., w_{c_{n-1}}}; G[J][c] = {vec{x}^J, w_c}.
    const int wcount = tn.count;
    std::vector<double> F;
    if (n == 2) {
        F.assign((std::size_t)m * wcount, 0.0);
        for (int i = 0; i < m; ++i)
            for (int c = 0; c < wcount; ++c)
                F[i * wcount + c] = brv(cx.engine, {&fr.x_jets[i], &wj[c]});
    } else {
        F.assign((std::size_t)m * wcount * wcount, 0.0);
        for (int i = 0; i < m; ++i)
            for (int c1 = 0; c1 < wcount; ++c1)
                for (int c2 = 0; c2 < wcount; ++c2)
                    F[(i * wcount + c1) * wcount + c2] =
                        brv(cx.engine, {&fr.x_jets[i], &wj[c1], &wj[c2]});
    }
    std::vector<double> G((std::size_t)ti.count * wcount);
    {
        std::vector<int> J(std::max(n - 1, 1));
        std::vector<const Jet*> args(n);
        for (int Ji = 0; Ji < ti.count; ++Ji) {
            ti.decode(Ji, J.data());
            for (int t = 0; t < n - 1; ++t) args[t] = &fr.x_jets[J[t]];
            for (int c = 0; c < wcount; ++c) {
                args[n - 1] = &wj[c];
                G[Ji * wcount + c] = cx.engine.value(args);
            }
        }
    }

    double total = 0.0;
    const auto& pm = perms(m);
    if (n == 2) {
        for (const Perm& s : pm) {
            int cl[2] = {s.idx[1], s.idx[2]};
            const int cL = tn.encode(cl);
            for (const Perm& t1 : pm) {
                int c1[2] = {t1.idx[1], t1.idx[2]};
                int J[1] = {t1.idx[0]};
                total += s.sign * t1.sign * F[s.idx[0] * wcount + tn.encode(c1)] *
                         G[ti.encode(J) * wcount + cL];
            }
        }
    } else {
        for (const Perm& s : pm) {
            int cl[3] = {s.idx[1], s.idx[2], s.idx[3]};
            const int cL = tn.encode(cl);
            for (const Perm& t1 : pm) {
                int c1[3] = {t1.idx[1], t1.idx[2], t1.idx[3]};
                const int c1i = tn.encode(c1);
                for (const Perm& t2 : pm) {
                    int c2[3] = {t2.idx[1], t2.idx[2], t2.idx[3]};
                    int J[2] = {t1.idx[0], t2.idx[0]};
                    total += s.sign * t1.sign * t2.sign *
                             F[(s.idx[0] * wcount + c1i) * wcount + tn.encode(c2)] *
                             G[ti.encode(J) * wcount + cL];
                }
            }
        }
    }

    DetWReport rep;
    const double gn = cx.gamma * factorial(n);
    rep.bracket_value = -total / (cx.gamma * std::pow(gn, n + 1));

    // Oracle det W with respect to the bracket-side unit normal
    // z_j = (1/(gamma n!)) eps_{j kvec} {x^{k_1},...,x^{k_n}}.
    Vec z(m, 0.0);
    for (const Perm& s : pm) {
        int kd[6];
        for (int t = 0; t < n; ++t) kd[t] = s.idx[1 + t];
        z[s.idx[0]] += s.sign * brn[tn.encode(kd)];
    }
    for (int i = 0; i < m; ++i) z[i] /= gn;
    Vec nA(m);
    for (int i = 0; i < m; ++i) nA[i] = nf.normals(0, i);
    const double rel = dot(z, nA);
    const double sgn = rel >= 0.0 ? 1.0 : -1.0;
    (void)md;
    rep.oracle_value = std::pow(sgn, n) * determinant(sd.W[0]);
    rep.residual = std::abs(rep.bracket_value - rep.oracle_value);
    return rep;
}

SymFnReport symmetric_functions(const BracketContext& cx, const ShapeData& sd,
                                const BracketTensors& bt) {
    if (sd.p != 1)
        throw std::invalid_argument("symmetric_functions: requires a hypersurface (p = 1)");
    const int n = sd.n, m = sd.m;

    // Power sums of gamma^{-2} B, then Newton's identities. The extra zero
    // eigenvalue on the normal direction does not disturb e_1..e_n.
    Mat A = bt.B[0];
    A *= 1.0 / cx.gamma2;
    SymFnReport rep;
    Vec pow_tr(n + 1, 0.0);
    Mat acc = Mat::identity(m);
    for (int j = 1; j <= n; ++j) {
        acc = acc * A;
        pow_tr[j] = acc.trace();
    }
    Vec e(n + 1, 0.0);
    e[0] = 1.0;
    for (int k = 1; k <= n; ++k) {
        double s = 0.0;
        for (int i = 1; i <= k; ++i)
            s += ((i % 2 == 1) ? 1.0 : -1.0) * e[k - i] * pow_tr[i];
        e[k] = s / k;
    }
    rep.sigma.assign(e.begin() + 1, e.end());

    const Mat& W = sd.W[0];
    rep.oracle.assign(n, 0.0);
    rep.oracle[0] = W.trace();
    if (n == 2) {
        rep.oracle[1] = determinant(W);
    } else {
        rep.oracle[1] = 0.5 * (W.trace() * W.trace() - (W * W).trace());
        rep.oracle[2] = determinant(W);
    }
    for (int k = 0; k < n; ++k)
        rep.residual = std::max(rep.residual, std::abs(rep.sigma[k] - rep.oracle[k]));
    return rep;
}

// ---------------------------------------------------------------------
// Codazzi-Mainardi machinery.

namespace {

// Jets of P^{iI} (raw, without normalization) and of the bracket form of
// T^{Ij}, order 1, plus the mixed B_A^i_k jets.
struct CmJets {
    int n, m, p, nI;
    std::vector<Jet> bj;      // [i*nI + I] = jet of {x^i, vec{x}^I}, order 2
    std::vector<Jet> bj_rev;  // [I*m + k] = jet of {vec{x}^I, x^k}, order 2
    std::vector<Jet> bjn;     // [(A*nI + I)*m + j] = jet of {vec{x}^I, n_A^j}, order 1
    std::vector<Jet> B;       // [(A*m + i)*m + k] = jet of (B_A)^i_k, order 1
    std::vector<Jet> P2;      // [i*m + k] = jet of (P^2)^{ik}, order 1
    Jet inv_gamma2;           // order 2
};

CmJets build_cm_jets(const BracketContext& cx, const NormalFrame& nf) {
    const PointFrame& fr = cx.frame();
    const int n = fr.n, m = fr.m, p = nf.p;
    Tuples ti(m, n - 1);

    CmJets cj;
    cj.n = n;
    cj.m = m;
    cj.p = p;
    cj.nI = ti.count;
    cj.inv_gamma2 = Jet::constant(1.0, n, cx.gamma2_jet.order()) / cx.gamma2_jet;

    std::vector<int> I(std::max(n - 1, 1));
    std::vector<const Jet*> args(n);

    cj.bj.resize((std::size_t)m * ti.count);
    cj.bj_rev.resize((std::size_t)ti.count * m);
    for (int Ii = 0; Ii < ti.count; ++Ii) {
        ti.decode(Ii, I.data());
        for (int i = 0; i < m; ++i) {
            args[0] = &fr.x_jets[i];
            for (int t = 0; t < n - 1; ++t) args[t + 1] = &fr.x_jets[I[t]];
            cj.bj[i * ti.count + Ii] = cx.engine.jet(args);
            for (int t = 0; t < n - 1; ++t) args[t] = &fr.x_jets[I[t]];
            args[n - 1] = &fr.x_jets[i];
            cj.bj_rev[Ii * m + i] = cx.engine.jet(args);
        }
    }

    cj.bjn.resize((std::size_t)p * ti.count * m);
    for (int A = 0; A < p; ++A)
        for (int Ii = 0; Ii < ti.count; ++Ii) {
            ti.decode(Ii, I.data());
            for (int t = 0; t < n - 1; ++t) args[t] = &fr.x_jets[I[t]];
            for (int j = 0; j < m; ++j) {
                args[n - 1] = &nf.n_jet(A, j);
                cj.bjn[(A * ti.count + Ii) * m + j] = cx.engine.jet(args);
            }
        }

    // T-jet in the bracket form (with Christoffel correction when curved),
    // then (B_A)^i_k = ((-1)^n/(n-1)!) sum_{I,J} {x^i,vec{x}^I} gbar_IJ
    // ({vec{x}^J,n_A^j} + ...) gbar_{jk}.
    const double inv_fact = 1.0 / factorial(n - 1);
    const double sgn_n = (n % 2 == 0) ? 1.0 : -1.0;
    const bool euclid = fr.ambient_euclidean;

    std::vector<Jet> tj((std::size_t)p * ti.count * m);  // bracket T with gbar_{jk} lowering
    for (int A = 0; A < p; ++A)
        for (int Ii = 0; Ii < ti.count; ++Ii)
            for (int k = 0; k < m; ++k) {
                Jet s = Jet::constant(0.0, n, 1);
                if (euclid) {
                    s = cj.bjn[(A * ti.count + Ii) * m + k].truncated(1);
                } else {
                    for (int j = 0; j < m; ++j) {
                        Jet t = cj.bjn[(A * ti.count + Ii) * m + j].truncated(1);
                        for (int kk = 0; kk < m; ++kk)
                            for (int l = 0; l < m; ++l)
                                t += cj.bj_rev[Ii * m + kk].truncated(1) *
                                     fr.gammabar_jet(j, kk, l).truncated(1) *
                                     nf.n_jet(A, l).truncated(1);
                        s += t * fr.gbar_jets[j * m + k].truncated(1);
                    }
                }
                tj[(A * ti.count + Ii) * m + k] = s;
            }

    cj.B.resize((std::size_t)p * m * m);
    cj.P2.resize((std::size_t)m * m);
    Tuples tig(m, n - 1);
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < m; ++k) {
            Jet s2 = Jet::constant(0.0, n, 1);
            for (int A = 0; A < p; ++A) {
                Jet s = Jet::constant(0.0, n, 1);
                if (euclid) {
                    for (int Ii = 0; Ii < ti.count; ++Ii)
                        s += cj.bj[i * ti.count + Ii].truncated(1) *
                             tj[(A * ti.count + Ii) * m + k];
                } else {
                    std::vector<int> Ia(std::max(n - 1, 1)), Ja(std::max(n - 1, 1));
                    for (int Ii = 0; Ii < ti.count; ++Ii) {
                        tig.decode(Ii, Ia.data());
                        for (int Jj = 0; Jj < ti.count; ++Jj) {
                            tig.decode(Jj, Ja.data());
                            Jet gij = Jet::constant(1.0, n, 1);
                            for (int t = 0; t < n - 1; ++t)
                                gij = gij * fr.gbar_jets[Ia[t] * m + Ja[t]].truncated(1);
                            s += cj.bj[i * ti.count + Ii].truncated(1) * gij *
                                 tj[(A * ti.count + Jj) * m + k];
                        }
                    }
                }
                cj.B[(A * m + i) * m + k] = (sgn_n * inv_fact) * s;
            }
            if (euclid) {
                for (int Ii = 0; Ii < ti.count; ++Ii)
                    s2 += cj.bj[i * ti.count + Ii].truncated(1) *
                          cj.bj[k * ti.count + Ii].truncated(1);
            } else {
                std::vector<int> Ia(std::max(n - 1, 1)), Ja(std::max(n - 1, 1));
                for (int Ii = 0; Ii < ti.count; ++Ii) {
                    tig.decode(Ii, Ia.data());
                    for (int Jj = 0; Jj < ti.count; ++Jj) {
                        tig.decode(Jj, Ja.data());
                        Jet gij = Jet::constant(1.0, n, 1);
                        for (int t = 0; t < n - 1; ++t)
                            gij = gij * fr.gbar_jets[Ia[t] * m + Ja[t]].truncated(1);
                        s2 += cj.bj[i * ti.count + Ii].truncated(1) * gij *
                              cj.bj[k * ti.count + Jj].truncated(1);
                    }
                }
            }
            cj.P2[i * m + k] = inv_fact * s2;
        }
    return cj;
}

// W_A(e_a, e_b) chart components, the covariant-assembly side.
std::vector<double> codazzi_tensor(const PointFrame& fr, const ConnectionCurvature& cc,
                                   const ShapeData& sd) {
    const int n = fr.n, p = sd.p;
    std::vector<double> wc((std::size_t)p * n * n * n, 0.0);  // [A][a][b][c]
    for (int A = 0; A < p; ++A)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) {
                    auto covd = [&](int x, int y) {
                        double v = sd.w_jet(A, c, y).partial(unit_index(x, n));
                        for (int d = 0; d < n; ++d)
                            v += cc.gamma_at(c, x, d) * sd.w_at(A, d, y) -
                                 cc.gamma_at(d, x, y) * sd.w_at(A, c, d);
                        return v;
                    };
                    double v = covd(a, b) - covd(b, a);
                    for (int B = 0; B < p; ++B)
                        v += sd.dcoef_at(a, B, A) * sd.w_at(B, c, b) -
                             sd.dcoef_at(b, B, A) * sd.w_at(B, c, a);
                    wc[((A * n + a) * n + b) * n + c] = v;
                }
    return wc;
}

// Multiplies the n-2 test-function partials into an epsilon slot product.
double fs_factor(const std::vector<Jet>& fs, const Perm& pr, int first_slot, int n) {
    double v = 1.0;
    for (std::size_t t = 0; t < fs.size(); ++t)
        v *= fs[t].partial(unit_index(pr.idx[first_slot + t], n));
    return v;
}

}  // namespace

CmReport cm_residual(const BracketContext& cx, const MetricData& md,
                     const ConnectionCurvature& cc, const NormalFrame& nf,
                     const ShapeData& sd, const std::vector<Jet>& fs) {
    const PointFrame& fr = cx.frame();
    const int n = fr.n, m = fr.m, p = nf.p;
    if (static_cast<int>(fs.size()) != n - 2)
        throw std::invalid_argument("cm_residual: needs n-2 test functions");

    CmJets cj = build_cm_jets(cx, nf);
    const bool euclid = fr.ambient_euclidean;
    const double g2 = cx.gamma2;

    // Bracket arguments: {g1, g2}_f = {g1, g2, f_1, ..., f_{n-2}}.
    auto bra = [&](const Jet& a, const Jet& b) {
        std::vector<const Jet*> args{&a, &b};
        for (const Jet& f : fs) args.push_back(&f);
        return cx.engine.value(args);
    };

    // Side 1: C_A from the bracket display.
    std::vector<Vec> c_bracket(p, Vec(m, 0.0));
    for (int A = 0; A < p; ++A)
        for (int i = 0; i < m; ++i) {
            double v = 0.0;
            for (int k = 0; k < m; ++k)
                v += bra(cj.inv_gamma2.truncated(1) * cj.B[(A * m + i) * m + k],
                         fr.x_jets[k]);
            if (!euclid) {
                for (int j = 0; j < m; ++j)
                    for (int l = 0; l < m; ++l) {
                        const double bxx = bra(fr.x_jets[j], fr.x_jets[l]);
                        if (bxx == 0.0) continue;
                        double inner = 0.0;
                        for (int k = 0; k < m; ++k)
                            inner += fr.gammabar_at(i, j, k) *
                                         cj.B[(A * m + k) * m + l].value() -
                                     cj.B[(A * m + i) * m + k].value() *
                                         fr.gammabar_at(k, j, l);
                        v += bxx * inner / g2;
                    }
                for (int B = 0; B < p; ++B) {
                    Vec nB(m);
                    for (int j2 = 0; j2 < m; ++j2) nB[j2] = nf.normals(B, j2);
                    Vec nB_low = gbar_lower(fr, nB);
                    for (int k = 0; k < m; ++k) {
                        double t = 0.0;
                        for (int l = 0; l < m; ++l)
                            t += bra(nf.n_jet(A, k), fr.x_jets[l]) *
                                 cj.B[(B * m + i) * m + l].value();
                        for (int l = 0; l < m; ++l)
                            for (int mm = 0; mm < m; ++mm)
                                for (int j2 = 0; j2 < m; ++j2)
                                    t += fr.gammabar_at(k, l, j2) *
                                         bra(fr.x_jets[l], fr.x_jets[mm]) *
                                         nf.normals(A, j2) *
                                         cj.B[(B * m + i) * m + mm].value();
                        v -= t * nB_low[k] / g2;
                    }
                }
            }
            c_bracket[A][i] = v;
        }

    // The map takes values in the tangent space, but the displayed bracket
    // expression picks up a normal component when the ambient is curved.
    // Keep the tangential part, using the bracket-side projector P^2/gamma^2.
    if (!euclid)
        for (int A = 0; A < p; ++A) {
            Vec low = gbar_lower(fr, c_bracket[A]);
            for (int i = 0; i < m; ++i) {
                double v = 0.0;
                for (int k = 0; k < m; ++k) v += cj.P2[i * m + k].value() * low[k];
                c_bracket[A][i] = v / g2;
            }
        }

    // Side 2: covariant assembly (1/2rho) eps^{ab avec} W_A(e_a,e_b) df...
    std::vector<double> wc = codazzi_tensor(fr, cc, sd);
    std::vector<Vec> c_def(p, Vec(m, 0.0));
    for (int A = 0; A < p; ++A) {
        Vec chart(n, 0.0);
        for (const Perm& pr : perms(n)) {
            const double ff = fs_factor(fs, pr, 2, n);
            for (int c = 0; c < n; ++c)
                chart[c] += 0.5 * pr.sign *
                            wc[((A * n + pr.idx[0]) * n + pr.idx[1]) * n + c] * ff /
                            fr.rho;
        }
        for (int c = 0; c < n; ++c)
            for (int i = 0; i < m; ++i) c_def[A][i] += chart[c] * fr.tangent(c, i);
    }

    CmReport rep;
    rep.CA = c_bracket;
    for (int A = 0; A < p; ++A)
        rep.ca_vs_def = std::max(rep.ca_vs_def, max_abs_diff(c_bracket[A], c_def[A]));
    for (int A = 0; A < p; ++A) {
        Vec low = gbar_lower(fr, c_bracket[A]);
        for (int B = 0; B < p; ++B) {
            double dot = 0.0;
            for (int i = 0; i < m; ++i) dot += low[i] * nf.normals(B, i);
            rep.tangency = std::max(rep.tangency, std::abs(dot));
        }
    }

    // Prop: gamma^2 W_A(X,Y) = -P^2(Rbar(X,Y) N_A) on chart pairs.
    for (int A = 0; A < p; ++A)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                Vec lhs(m, 0.0);
                for (int c = 0; c < n; ++c)
                    for (int i = 0; i < m; ++i)
                        lhs[i] += g2 * wc[((A * n + a) * n + b) * n + c] * fr.tangent(c, i);
                Vec rn(m, 0.0);
                if (!euclid)
                    for (int i = 0; i < m; ++i)
                        for (int j = 0; j < m; ++j)
                            for (int k = 0; k < m; ++k)
                                for (int l = 0; l < m; ++l)
                                    rn[i] += fr.rbar(i, j, k, l) * nf.normals(A, j) *
                                             fr.tangent(a, k) * fr.tangent(b, l);
                Vec rn_low = gbar_lower(fr, rn);
                Vec p2rn(m, 0.0);
                for (int i = 0; i < m; ++i) {
                    double v = 0.0;
                    for (int k = 0; k < m; ++k)
                        v += cj.P2[i * m + k].value() * rn_low[k];
                    p2rn[i] = v;
                }
                for (int i = 0; i < m; ++i)
                    rep.wpi = std::max(rep.wpi, std::abs(lhs[i] + p2rn[i]));
            }

    // Theorem: gamma^2 C_A = P^2-applied Christoffel-curvature form.
    for (int A = 0; A < p; ++A) {
        Vec rhs(m, 0.0);
        if (!euclid) {
            Vec inner(m, 0.0);
            for (int j = 0; j < m; ++j) {
                double v = 0.0;
                for (int jp = 0; jp < m; ++jp) {
                    double t = 0.0;
                    for (int k = 0; k < m; ++k)
                        t += bra(fr.x_jets[k], fr.gammabar_jet(j, k, jp));
                    for (int k = 0; k < m; ++k)
                        for (int l = 0; l < m; ++l) {
                            double gg = 0.0;
                            for (int mm = 0; mm < m; ++mm)
                                gg += fr.gammabar_at(mm, l, jp) * fr.gammabar_at(j, k, mm);
                            t -= bra(fr.x_jets[k], fr.x_jets[l]) * gg;
                        }
                    v += t * nf.normals(A, jp);
                }
                inner[j] = v;
            }
            Vec low = gbar_lower(fr, inner);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) rhs[i] += cj.P2[i * m + j].value() * low[j];
        }
        for (int i = 0; i < m; ++i)
            rep.thm = std::max(rep.thm, std::abs(g2 * c_bracket[A][i] - rhs[i]));
    }

    // Flat-ambient display.
    if (euclid) {
        for (int A = 0; A < p; ++A)
            for (int i = 0; i < m; ++i) {
                double v = 0.0;
                for (int k = 0; k < m; ++k)
                    v += g2 * bra(cj.inv_gamma2.truncated(1) * cj.B[(A * m + i) * m + k],
                                  fr.x_jets[k]);
                for (int B = 0; B < p; ++B) {
                    double t = 0.0;
                    for (int k = 0; k < m; ++k) {
                        double s = 0.0;
                        for (int l = 0; l < m; ++l)
                            s += bra(nf.n_jet(A, k), fr.x_jets[l]) *
                                 cj.B[(B * m + i) * m + l].value();
                        t += s * nf.normals(B, k);
                    }
                    v -= t;
                }
                rep.flat = std::max(rep.flat, std::abs(v));
            }
    }
    (void)md;
    return rep;
}

// ---------------------------------------------------------------------
// Surface (n = 2) forms.

SurfaceCmReport cm_surface(const BracketContext& cx, const MetricData& md,
                           const ConnectionCurvature& cc, const NormalFrame& nf,
                           const ShapeData& sd, const BracketTensors& bt) {
    const PointFrame& fr = cx.frame();
    if (fr.n != 2) throw std::invalid_argument("cm_surface: requires n = 2");
    if (!fr.ambient_euclidean)
        throw std::invalid_argument("cm_surface: requires a flat ambient space");
    const int n = 2, m = fr.m, p = nf.p;
    const double g2 = cx.gamma2;

    Jet inv_g2 = Jet::constant(1.0, n, cx.gamma2_jet.order()) / cx.gamma2_jet;

    // PB[i][j] = jet {x^i, x^j}; PBn[A][j][k] = jet {x^j, n_A^k}.
    std::vector<Jet> pb((std::size_t)m * m), pbn((std::size_t)p * m * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) pb[i * m + j] = brj(cx.engine, {&fr.x_jets[i], &fr.x_jets[j]});
    for (int A = 0; A < p; ++A)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k)
                pbn[(A * m + j) * m + k] = brj(cx.engine, {&fr.x_jets[j], &nf.n_jet(A, k)});

    // S_A endomorphism and its action on the normals.
    std::vector<Mat> s_endo(p, Mat(m, m));
    for (int A = 0; A < p; ++A)
        for (int i = 0; i < m; ++i)
            for (int k = 0; k < m; ++k) s_endo[A](i, k) = bt.s_at(A, i, k);

    SurfaceCmReport rep;
    for (int A = 0; A < p; ++A) {
        Vec bs(m, 0.0);  // sum_B B_B(S_A(N_B))
        for (int B = 0; B < p; ++B) {
            Vec nB(m);
            for (int i = 0; i < m; ++i) nB[i] = nf.normals(B, i);
            Vec sn = mat_apply(s_endo[A], nB);
            Vec bsn = mat_apply(bt.B[B], sn);
            for (int i = 0; i < m; ++i) bs[i] += bsn[i];
        }
        for (int i = 0; i < m; ++i) {
            double v = 0.0;
            for (int j = 0; j < m; ++j)
                for (int k = 0; k < m; ++k)
                    v += cx.engine.value({inv_g2.truncated(1) * pb[i * m + j].truncated(1) *
                                              pbn[(A * m + j) * m + k],
                                          fr.x_jets[k]});
            rep.compact = std::max(rep.compact, std::abs(v + bs[i] / g2));
            if (m == 3) rep.r3 = std::max(rep.r3, std::abs(v));
        }
    }

    // Swap statement with a factor inside the first slot. Checked with
    // f = 1/gamma^2 and with a second, unrelated choice of f.
    Jet u1 = Jet::variable(0, fr.u[0], n, 3);
    Jet u2 = Jet::variable(1, fr.u[1], n, 3);
    std::vector<Jet> factors{inv_g2, apply_univariate(u1, UnivariateFn::sin) + u1 * u2};
    for (const Jet& f : factors)
        for (int A = 0; A < p; ++A)
            for (int i = 0; i < m; ++i) {
                double lhs = 0.0, rhs = 0.0;
                for (int j = 0; j < m; ++j)
                    for (int k = 0; k < m; ++k) {
                        lhs += cx.engine.value({f.truncated(1) * pb[i * m + j].truncated(1) *
                                                    pbn[(A * m + j) * m + k],
                                                fr.x_jets[k]});
                        rhs += cx.engine.value({f.truncated(1) * pb[i * m + j].truncated(1) *
                                                    pb[j * m + k].truncated(1),
                                                nf.n_jet(A, k)});
                    }
                rep.swap_f = std::max(rep.swap_f, std::abs(lhs - rhs));
            }

    if (m == 3) {
        // Single normal: contracted projector form and its classical sibling.
        std::vector<double> lhs_amb(m, 0.0);
        for (int i = 0; i < m; ++i) {
            double v = 0.0;
            for (int k = 0; k < m; ++k) {
                Jet p2ik = Jet::constant(0.0, n, 1);
                for (int j = 0; j < m; ++j)
                    p2ik += pb[i * m + j].truncated(1) * pb[k * m + j].truncated(1);
                v += cx.engine.value({inv_g2.truncated(1) * p2ik, nf.n_jet(0, k)});
            }
            lhs_amb[i] = v;
            rep.p2_form = std::max(rep.p2_form, std::abs(v));
        }
        for (int c = 0; c < n; ++c) {
            double lhs = 0.0;
            for (int i = 0; i < m; ++i) lhs += fr.tangent(c, i) * lhs_amb[i];
            double rhs = 0.0;
            for (const Perm& pr : perms(n)) {
                const int a = pr.idx[0], b = pr.idx[1];
                double dh = sd.h_jet(0, b, c).partial(unit_index(a, n));
                for (int d = 0; d < n; ++d)
                    dh -= cc.gamma_at(d, a, b) * sd.h_at(0, d, c) +
                          cc.gamma_at(d, a, c) * sd.h_at(0, b, d);
                rhs += pr.sign * dh / fr.rho;
            }
            rep.classical = std::max(rep.classical, std::abs(lhs - rhs));
        }
    }
    (void)md;
    return rep;
}

HypersurfaceCmReport cm_hypersurface_identities(const BracketContext& cx,
                                                const MetricData& md,
                                                const ConnectionCurvature& cc,
                                                const NormalFrame& nf, const ShapeData& sd,
                                                const std::vector<Jet>& fs) {
    const PointFrame& fr = cx.frame();
    const int n = fr.n, m = fr.m;
    if (m - n != 1)
        throw std::invalid_argument("cm_hypersurface_identities: requires p = 1");
    if (!fr.ambient_euclidean)
        throw std::invalid_argument(
            "cm_hypersurface_identities: requires a flat ambient space");
    if (static_cast<int>(fs.size()) != n - 2)
        throw std::invalid_argument("cm_hypersurface_identities: needs n-2 test functions");
    Tuples ti(m, n - 1);

    Jet inv_g2 = Jet::constant(1.0, n, cx.gamma2_jet.order()) / cx.gamma2_jet;

    std::vector<Jet> bj((std::size_t)m * ti.count);       // {x^i, vec{x}^J}
    std::vector<Jet> bj_rev((std::size_t)ti.count * m);   // {vec{x}^J, x^k}
    std::vector<Jet> bjn((std::size_t)ti.count * m);      // {vec{x}^J, n^k}
    {
        std::vector<int> J(std::max(n - 1, 1));
        std::vector<const Jet*> args(n);
        for (int Ji = 0; Ji < ti.count; ++Ji) {
            ti.decode(Ji, J.data());
            for (int i = 0; i < m; ++i) {
                args[0] = &fr.x_jets[i];
                for (int t = 0; t < n - 1; ++t) args[t + 1] = &fr.x_jets[J[t]];
                bj[i * ti.count + Ji] = cx.engine.jet(args);
            }
            for (int t = 0; t < n - 1; ++t) args[t] = &fr.x_jets[J[t]];
            for (int k = 0; k < m; ++k) {
                args[n - 1] = &fr.x_jets[k];
                bj_rev[Ji * m + k] = cx.engine.jet(args);
                args[n - 1] = &nf.n_jet(0, k);
                bjn[Ji * m + k] = cx.engine.jet(args);
            }
        }
    }

    auto bra = [&](const Jet& a, const Jet& b) {
        std::vector<const Jet*> args{&a, &b};
        for (const Jet& f : fs) args.push_back(&f);
        return cx.engine.value(args);
    };

    HypersurfaceCmReport rep;
    for (int i = 0; i < m; ++i) {
        double lhs = 0.0, rhs = 0.0;
        for (int Ji = 0; Ji < ti.count; ++Ji)
            for (int k = 0; k < m; ++k) {
                lhs += bra(inv_g2.truncated(1) * bj[i * ti.count + Ji].truncated(1) *
                               bjn[Ji * m + k],
                           fr.x_jets[k]);
                rhs += bra(inv_g2.truncated(1) * bj[i * ti.count + Ji].truncated(1) *
                               bj_rev[Ji * m + k].truncated(1),
                           nf.n_jet(0, k));
            }
        rep.swap_f = std::max(rep.swap_f, std::abs(lhs - rhs));
    }

    // Projector form against the covariant derivative of the second fundamental
    // form, both sides vanishing for a flat ambient space.
    const double inv_fact = 1.0 / factorial(n - 1);
    std::vector<double> lhs_amb(m, 0.0);
    for (int i = 0; i < m; ++i) {
        double v = 0.0;
        for (int k = 0; k < m; ++k) {
            Jet p2ik = Jet::constant(0.0, n, 1);
            for (int Ji = 0; Ji < ti.count; ++Ji)
                p2ik += bj[i * ti.count + Ji].truncated(1) *
                        bj[k * ti.count + Ji].truncated(1);
            v += bra(inv_g2.truncated(1) * (inv_fact * p2ik), nf.n_jet(0, k));
        }
        lhs_amb[i] = v;
    }
    for (int c = 0; c < n; ++c) {
        double lhs = 0.0;
        for (int i = 0; i < m; ++i) lhs += fr.tangent(c, i) * lhs_amb[i];
        double rhs = 0.0;
        for (const Perm& pr : perms(n)) {
            const int a = pr.idx[0], b = pr.idx[1];
            double dh = sd.h_jet(0, b, c).partial(unit_index(a, n));
            for (int d = 0; d < n; ++d)
                dh -= cc.gamma_at(d, a, b) * sd.h_at(0, d, c) +
                      cc.gamma_at(d, a, c) * sd.h_at(0, b, d);
            rhs -= pr.sign * dh * fs_factor(fs, pr, 2, n) / fr.rho;
        }
        rep.grad_h = std::max(rep.grad_h, std::abs(lhs - rhs));
    }

    rep.closure = epsilon_closure(cx.engine, fr.x_jets, fs);
    (void)md;
    return rep;
}

double epsilon_closure(const BracketEngine& eng, const std::vector<Jet>& xs,
                       const std::vector<Jet>& fs) {
    const int n = eng.n;
    const int m = static_cast<int>(xs.size());
    if (m != n + 1) throw std::invalid_argument("epsilon_closure: needs n+1 functions");
    Tuples ti(m, n - 1);

    std::vector<Jet> bj((std::size_t)m * ti.count), bj2((std::size_t)ti.count * m);
    {
        std::vector<int> I(std::max(n - 1, 1));
        std::vector<const Jet*> args(n);
        for (int Ii = 0; Ii < ti.count; ++Ii) {
            ti.decode(Ii, I.data());
            for (int i = 0; i < m; ++i) {
                args[0] = &xs[i];
                for (int t = 0; t < n - 1; ++t) args[t + 1] = &xs[I[t]];
                bj[i * ti.count + Ii] = eng.jet(args);
            }
            for (int t = 0; t < n - 1; ++t) args[t] = &xs[I[t]];
            for (int k = 0; k < m; ++k) {
                args[n - 1] = &xs[k];
                bj2[Ii * m + k] = eng.jet(args);
            }
        }
    }

    const int nv = bj[0].n_vars();
    const int ord = bj[0].order();
    Jet g2 = Jet::constant(0.0, nv, ord);
    for (int i = 0; i < m; ++i)
        for (int Ii = 0; Ii < ti.count; ++Ii)
            g2 += bj[i * ti.count + Ii] * bj[i * ti.count + Ii];
    g2 = (1.0 / factorial(n)) * g2;
    if (g2.value() <= 1e-10)
        throw DegeneratePointError("epsilon closure: bracket volume factor vanishes");
    Jet inv_g2 = Jet::constant(1.0, nv, ord) / g2;
    Jet inv_g1 = apply_pow(g2, -0.5);

    std::vector<Jet> F((std::size_t)m * m), G((std::size_t)m * ti.count);
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < m; ++k) {
            Jet s = Jet::constant(0.0, nv, ord);
            for (int Ji = 0; Ji < ti.count; ++Ji)
                s += bj[i * ti.count + Ji] * bj2[Ji * m + k];
            F[i * m + k] = inv_g2 * s;
        }
    for (int l = 0; l < m; ++l)
        for (int Li = 0; Li < ti.count; ++Li)
            G[l * ti.count + Li] = inv_g1 * bj[l * ti.count + Li];

    double worst = 0.0;
    for (int i = 0; i < m; ++i) {
        double total = 0.0;
        for (const Perm& pr : perms(m)) {
            int L[6];
            for (int t = 0; t < n - 1; ++t) L[t] = pr.idx[2 + t];
            std::vector<const Jet*> args{&F[i * m + pr.idx[0]],
                                         &G[pr.idx[1] * ti.count + ti.encode(L)]};
            for (const Jet& f : fs) args.push_back(&f);
            total += pr.sign * eng.value(args);
        }
        worst = std::max(worst, std::abs(total));
    }
    return worst;
}

PoissonReport poisson_identity(const BracketEngine& eng, const std::vector<Jet>& xs) {
    if (eng.n != 2 || xs.size() != 3)
        throw std::invalid_argument("poisson_identity: needs three functions and n = 2");
    const int m = 3;
    const int nv = xs[0].n_vars();

    std::vector<Jet> B((std::size_t)m * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) B[i * m + j] = brj(eng, {&xs[i], &xs[j]});
    const int ord = B[0].order();

    Jet g2 = B[0 * m + 1] * B[0 * m + 1] + B[1 * m + 2] * B[1 * m + 2] +
             B[2 * m + 0] * B[2 * m + 0];
    PoissonReport rep;
    rep.gamma2 = g2.value();
    if (rep.gamma2 <= 1e-10)
        throw DegeneratePointError("poisson identity: bracket volume factor vanishes");
    Jet inv_g2 = Jet::constant(1.0, nv, ord) / g2;
    Jet inv_g1 = apply_pow(g2, -0.5);

    rep.components.assign(m, 0.0);
    for (int i = 0; i < m; ++i) {
        double total = 0.0;
        for (const Perm& pr : perms(m)) {
            const int k = pr.idx[0], l = pr.idx[1], nn = pr.idx[2];
            Jet F = Jet::constant(0.0, nv, ord);
            for (int j = 0; j < m; ++j) F += B[i * m + j] * B[j * m + k];
            F = inv_g2 * F;
            Jet G = inv_g1 * B[l * m + nn];
            total += 0.5 * pr.sign * brv(eng, {&F, &G});
        }
        rep.components[i] = total;
        rep.residual = std::max(rep.residual, std::abs(total));
    }
    return rep;
}

SurfaceKReport surface_K(const BracketContext& cx, const MetricData& md,
                         const ConnectionCurvature& cc, const NormalFrame& nf,
                         const BracketTensors& bt) {
    const PointFrame& fr = cx.frame();
    if (fr.n != 2) throw std::invalid_argument("surface_K: requires n = 2");
    const int m = fr.m, p = nf.p;
    const double g2 = cx.gamma2;

    SurfaceKReport rep;
    rep.K_oracle = cc.scalar / 2.0;

    // Ambient sectional part gbar(Rbar(e1,e2)e2, e1)/det g.
    double amb = 0.0;
    if (!fr.ambient_euclidean) {
        Vec w(m, 0.0);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                for (int k = 0; k < m; ++k)
                    for (int l = 0; l < m; ++l)
                        w[i] += fr.rbar(i, j, k, l) * fr.tangent(1, j) *
                                fr.tangent(0, k) * fr.tangent(1, l);
        amb = fr.inner(w, tangent_row(fr, 0)) / md.det_g;
    }

    double tr_s2 = 0.0;
    for (int A = 0; A < p; ++A) {
        Mat se(m, m);
        for (int i = 0; i < m; ++i)
            for (int k = 0; k < m; ++k) {
                double v = 0.0;
                for (int J = 0; J < m; ++J) v += bt.s_at(A, i, J) * fr.gbar(J, k);
                se(i, k) = v;
            }
        tr_s2 += (se * se).trace();
    }
    rep.K_S = amb - tr_s2 / (2.0 * g2);
    rep.r_S = std::abs(rep.K_S - rep.K_oracle);

    if (fr.ambient_euclidean) {
        double s = 0.0;
        for (int A = 0; A < p; ++A)
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    s += brv(cx.engine, {&fr.x_jets[i], &nf.n_jet(A, j)}) *
                         brv(cx.engine, {&fr.x_jets[j], &nf.n_jet(A, i)});
        rep.K_direct = -s / (2.0 * g2);
        rep.r_direct = std::abs(rep.K_direct - rep.K_oracle);

        // Fully normal-free double-epsilon form with the pairs bucketed by
        // their shared trailing indices.
        Tuples t2(m, 2), tb(m, std::max(m - 3, 0));
        std::vector<Jet> wj((std::size_t)t2.count);
        {
            std::vector<int> c(2);
            for (int ci = 0; ci < t2.count; ++ci) {
                t2.decode(ci, c.data());
                wj[ci] = brj(cx.engine, {&fr.x_jets[c[0]], &fr.x_jets[c[1]]});
            }
        }
        std::vector<double> V2((std::size_t)m * t2.count);
        for (int a = 0; a < m; ++a)
            for (int ci = 0; ci < t2.count; ++ci)
                V2[a * t2.count + ci] = brv(cx.engine, {&fr.x_jets[a], &wj[ci]});

        struct Entry {
            int sign, j0, cpair;
        };
        std::vector<std::vector<Entry>> buckets(tb.count);
        for (const Perm& pr : perms(m)) {
            int cd[2] = {pr.idx[1], pr.idx[2]};
            int bd[3];
            for (int t = 0; t < m - 3; ++t) bd[t] = pr.idx[3 + t];
            buckets[tb.encode(bd)].push_back({pr.sign, pr.idx[0], t2.encode(cd)});
        }
        double total = 0.0;
        for (const auto& bucket : buckets)
            for (const Entry& e1 : bucket)
                for (const Entry& e2 : bucket)
                    total += e1.sign * e2.sign * V2[e2.j0 * t2.count + e1.cpair] *
                             V2[e1.j0 * t2.count + e2.cpair];
        rep.K_Z = -total / (8.0 * g2 * g2 * factorial(p - 1));
        rep.r_Z = std::abs(rep.K_Z - rep.K_oracle);
    }
    return rep;
}

ComplexStructureReport complex_structure(const BracketContext& cx, const MetricData& md,
                                         const BracketTensors& bt) {
    const PointFrame& fr = cx.frame();
    if (fr.n != 2) throw std::invalid_argument("complex_structure: requires n = 2");
    const int m = fr.m;

    // J_M = (1/gamma) P with the second index lowered; the scale makes it
    // square to -1 on tangent vectors.
    Mat jm(m, m);
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < m; ++k) {
            double v = 0.0;
            for (int j = 0; j < m; ++j) v += bt.p_at(i, j) * fr.gbar(j, k);
            jm(i, k) = v / cx.gamma;
        }

    ComplexStructureReport rep;
    const double sq = std::sqrt(md.det_g);
    for (int b = 0; b < 2; ++b) {
        Vec eb = tangent_row(fr, b);
        Vec jb = mat_apply(jm, eb);
        Vec jcl(m, 0.0);
        for (int a = 0; a < 2; ++a)
            for (int c = 0; c < 2; ++c) {
                const double eps = (a == 0 && c == 1) ? 1.0 : (a == 1 && c == 0) ? -1.0 : 0.0;
                for (int i = 0; i < m; ++i)
                    jcl[i] += eps * md.g(c, b) * fr.tangent(a, i) / sq;
            }
        rep.match = std::max(rep.match, max_abs_diff(jb, jcl));
        Vec jjb = mat_apply(jm, jb);
        for (int i = 0; i < m; ++i)
            rep.squared = std::max(rep.squared, std::abs(jjb[i] + eb[i]));
    }
    return rep;
}

}  // namespace nambugeo
