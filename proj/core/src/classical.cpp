#include "nambugeo/classical.hpp"

#include <cmath>
#include <stdexcept>

namespace nambugeo {

namespace {

// Jet-valued ambient vectors, one jet per component.
using JVec = std::vector<Jet>;

Jet gbar_inner(const PointFrame& fr, const JVec& a, const JVec& b) {
    const int m = fr.m;
    Jet s = Jet::constant(0.0, a[0].n_vars(), a[0].order());
    if (fr.ambient_euclidean) {
        for (int i = 0; i < m; ++i) s += a[i] * b[i];
    } else {
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) s += fr.gbar_jets[i * m + j] * a[i] * b[j];
    }
    return s;
}

JVec axpy(JVec v, const Jet& c, const JVec& w) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * w[i];
    return v;
}

DerivIndex unit_index(int var, int n) {
    DerivIndex d;
    d.exponents.assign(n, 0);
    d.exponents[var] = 1;
    return d;
}

}  // namespace

MetricData induced_metric(const PointFrame& fr) {
    MetricData md;
    md.n = fr.n;
    md.g = Mat(fr.n, fr.n);
    for (int a = 0; a < fr.n; ++a)
        for (int b = 0; b < fr.n; ++b) md.g(a, b) = fr.g_jets[a * fr.n + b].value();
    md.g_inv = inverse(md.g);
    md.det_g = fr.det_g_jet.value();
    md.sqrt_g = fr.sqrt_g;

    std::vector<Jet> g_lo(fr.n * fr.n);
    for (int t = 0; t < fr.n * fr.n; ++t) g_lo[t] = fr.g_jets[t].truncated(1);
    md.g_inv_jets = jet_mat_inverse(g_lo, fr.n);
    return md;
}

ConnectionCurvature sigma_connection_curvature(const PointFrame& fr,
                                               const MetricData& md) {
    const int n = fr.n;
    ConnectionCurvature cc;
    cc.n = n;

    // Gamma^a_{bc} = (1/2) g^{ad} (d_b g_dc + d_c g_db - d_d g_bc), order-1 jets.
    cc.gamma_jets.assign((std::size_t)n * n * n, Jet());
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = b; c < n; ++c) {
                Jet s = Jet::constant(0.0, n, 1);
                for (int d = 0; d < n; ++d) {
                    Jet t = fr.g_jets[d * n + c].derivative(b) +
                            fr.g_jets[d * n + b].derivative(c) -
                            fr.g_jets[b * n + c].derivative(d);
                    s += md.g_inv_jets[a * n + d] * t;
                }
                s = 0.5 * s;
                cc.gamma_jets[(a * n + b) * n + c] = s;
                cc.gamma_jets[(a * n + c) * n + b] = s;
            }

    cc.riemann.assign((std::size_t)n * n * n * n, 0.0);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    double v = cc.gamma_jets[(a * n + d) * n + b].partial(unit_index(c, n)) -
                               cc.gamma_jets[(a * n + c) * n + b].partial(unit_index(d, n));
                    for (int e = 0; e < n; ++e)
                        v += cc.gamma_at(a, c, e) * cc.gamma_at(e, d, b) -
                             cc.gamma_at(a, d, e) * cc.gamma_at(e, c, b);
                    cc.riemann[((a * n + b) * n + c) * n + d] = v;
                }

    cc.ricci = Mat(n, n);
    for (int b = 0; b < n; ++b)
        for (int d = 0; d < n; ++d) {
            double v = 0.0;
            for (int a = 0; a < n; ++a) v += cc.riemann_at(a, b, a, d);
            cc.ricci(b, d) = v;
        }
    cc.ricci_mixed = md.g_inv * cc.ricci;
    cc.scalar = cc.ricci_mixed.trace();
    return cc;
}

NormalFrame gram_schmidt_normals(const PointFrame& fr) {
    const int n = fr.n, m = fr.m, p = fr.m - fr.n;
    const int ord = fr.order - 1;

    std::vector<JVec> tangents;  // gbar-orthonormalized e_a, as jets
    for (int a = 0; a < n; ++a) {
        JVec v(m);
        for (int i = 0; i < m; ++i) v[i] = fr.x_jets[i].derivative(a);
        for (const JVec& t : tangents) v = axpy(std::move(v), gbar_inner(fr, v, t), t);
        Jet norm = apply_univariate(gbar_inner(fr, v, v), UnivariateFn::sqrt);
        for (int i = 0; i < m; ++i) v[i] = v[i] / norm;
        tangents.push_back(std::move(v));
    }

    std::vector<JVec> normals;
    std::vector<bool> used(m, false);
    for (int A = 0; A < p; ++A) {
        JVec best;
        double best_norm2 = -1.0;
        int best_i = -1;
        for (int i = 0; i < m; ++i) {
            if (used[i]) continue;
            JVec v(m, Jet::constant(0.0, n, ord));
            v[i] = Jet::constant(1.0, n, ord);
            for (const JVec& t : tangents) v = axpy(std::move(v), gbar_inner(fr, v, t), t);
            for (const JVec& q : normals) v = axpy(std::move(v), gbar_inner(fr, v, q), q);
            const double n2 = gbar_inner(fr, v, v).value();
            if (n2 > best_norm2) {
                best_norm2 = n2;
                best = std::move(v);
                best_i = i;
            }
        }
        if (best_norm2 < 1e-20)
            throw std::domain_error("gram_schmidt_normals: rank deficiency at normal " +
                                    std::to_string(A));
        used[best_i] = true;
        Jet norm = apply_univariate(gbar_inner(fr, best, best), UnivariateFn::sqrt);
        for (int i = 0; i < m; ++i) best[i] = best[i] / norm;
        normals.push_back(std::move(best));
    }

    // Fix the orientation of (e_1..e_n, N_1..N_p) by flipping the last normal.
    Mat omat(m, m);
    for (int a = 0; a < n; ++a)
        for (int i = 0; i < m; ++i) omat(a, i) = fr.tangent(a, i);
    for (int A = 0; A < p; ++A)
        for (int i = 0; i < m; ++i) omat(n + A, i) = normals[A][i].value();
    if (determinant(omat) < 0.0)
        for (int i = 0; i < m; ++i) normals[p - 1][i] = -normals[p - 1][i];

    NormalFrame nf;
    nf.p = p;
    nf.m = m;
    nf.n = n;
    nf.normals = Mat(p, m);
    for (int A = 0; A < p; ++A)
        for (int i = 0; i < m; ++i) {
            nf.normals(A, i) = normals[A][i].value();
            nf.n_jets.push_back(normals[A][i]);
        }

    // (D_a N_A)^i = d_a N^i + Gammabar^i_{jk} (d_a x^j) N^k at the point.
    nf.derivs.assign((std::size_t)n * p * m, 0.0);
    for (int a = 0; a < n; ++a)
        for (int A = 0; A < p; ++A)
            for (int i = 0; i < m; ++i) {
                double v = nf.n_jet(A, i).partial(unit_index(a, n));
                if (!fr.ambient_euclidean)
                    for (int j = 0; j < m; ++j)
                        for (int k = 0; k < m; ++k)
                            v += fr.gammabar_at(i, j, k) * fr.tangent(a, j) *
                                 nf.normals(A, k);
                nf.derivs[(a * p + A) * m + i] = v;
            }
    return nf;
}

ShapeData shape_data(const PointFrame& fr, const MetricData& md, const NormalFrame& nf) {
    const int n = fr.n, m = fr.m, p = nf.p;
    ShapeData sd;
    sd.n = n;
    sd.p = p;
    sd.m = m;

    // Covariant derivative of each normal as order-1 jets, for h and W jets.
    std::vector<Jet> dN((std::size_t)n * p * m);
    for (int a = 0; a < n; ++a)
        for (int A = 0; A < p; ++A)
            for (int i = 0; i < m; ++i) {
                Jet v = nf.n_jet(A, i).derivative(a);
                if (!fr.ambient_euclidean)
                    for (int j = 0; j < m; ++j)
                        for (int k = 0; k < m; ++k)
                            v += fr.gammabar_jet(i, j, k).truncated(1) *
                                 fr.x_jets[j].derivative(a).truncated(1) *
                                 nf.n_jet(A, k).truncated(1);
                dN[(a * p + A) * m + i] = v;
            }

    std::vector<Jet> dx(n * m);  // order-1 jets of d_a x^i
    for (int a = 0; a < n; ++a)
        for (int i = 0; i < m; ++i) dx[a * m + i] = fr.x_jets[i].derivative(a).truncated(1);

    sd.h_jets.assign((std::size_t)p * n * n, Jet());
    for (int A = 0; A < p; ++A)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                Jet s = Jet::constant(0.0, n, 1);
                if (fr.ambient_euclidean) {
                    for (int i = 0; i < m; ++i)
                        s += dx[a * m + i] * dN[(b * p + A) * m + i];
                } else {
                    for (int i = 0; i < m; ++i)
                        for (int j = 0; j < m; ++j)
                            s += fr.gbar_jets[i * m + j].truncated(1) * dx[a * m + i] *
                                 dN[(b * p + A) * m + j];
                }
                sd.h_jets[(A * n + a) * n + b] = -s;
            }

    sd.W_jets.assign((std::size_t)p * n * n, Jet());
    for (int A = 0; A < p; ++A)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                Jet s = Jet::constant(0.0, n, 1);
                for (int c = 0; c < n; ++c)
                    s += md.g_inv_jets[a * n + c] * sd.h_jets[(A * n + c) * n + b];
                sd.W_jets[(A * n + a) * n + b] = s;
            }

    sd.h.assign(p, Mat(n, n));
    sd.W.assign(p, Mat(n, n));
    for (int A = 0; A < p; ++A)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                sd.h[A](a, b) = sd.h_jet(A, a, b).value();
                sd.W[A](a, b) = sd.w_jet(A, a, b).value();
            }

    sd.H.assign(m, 0.0);
    for (int A = 0; A < p; ++A) {
        const double t = sd.W[A].trace() / n;
        for (int i = 0; i < m; ++i) sd.H[i] += t * nf.normals(A, i);
    }
    sd.H_norm = std::sqrt(std::max(0.0, fr.inner(sd.H, sd.H)));

    sd.Dcoef.assign((std::size_t)n * p * p, 0.0);
    for (int a = 0; a < n; ++a)
        for (int A = 0; A < p; ++A)
            for (int B = 0; B < p; ++B) {
                double v = 0.0;
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < m; ++j)
                        v += nf.deriv_at(a, A, i) * fr.gbar(i, j) * nf.normals(B, j);
                sd.Dcoef[(a * p + A) * p + B] = v;
            }

    // Gauss-equation Ricci endomorphism:
    // R^e_b = g^{ed} g^{ac} gbar(Rbar(e_c,e_d) e_b, e_a)
    //         + sum_A [ (tr W_A) W_A - W_A^2 ]^e_b.
    sd.ricci_gauss = Mat(n, n);
    if (!fr.ambient_euclidean) {
        // Rt[i][b][c][d] = Rbar^i_{jkl} e_b^j e_c^k e_d^l
        std::vector<double> Rt((std::size_t)m * n * n * n, 0.0);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                for (int k = 0; k < m; ++k)
                    for (int l = 0; l < m; ++l) {
                        const double r = fr.rbar(i, j, k, l);
                        if (r == 0.0) continue;
                        for (int b = 0; b < n; ++b)
                            for (int c = 0; c < n; ++c)
                                for (int d = 0; d < n; ++d)
                                    Rt[((i * n + b) * n + c) * n + d] +=
                                        r * fr.tangent(b, j) * fr.tangent(c, k) *
                                        fr.tangent(d, l);
                    }
        Mat lower(n, m);  // e_a with the ambient index lowered by gbar
        for (int a = 0; a < n; ++a)
            for (int i = 0; i < m; ++i) {
                double v = 0.0;
                for (int j = 0; j < m; ++j) v += fr.gbar(i, j) * fr.tangent(a, j);
                lower(a, i) = v;
            }
        // T_abcd = gbar(Rbar(e_c,e_d) e_b, e_a); amb^e_b = g^{ed} g^{ac} T_abcd.
        for (int e = 0; e < n; ++e)
            for (int b = 0; b < n; ++b) {
                double v = 0.0;
                for (int a = 0; a < n; ++a)
                    for (int c = 0; c < n; ++c)
                        for (int d = 0; d < n; ++d) {
                            double t = 0.0;
                            for (int i = 0; i < m; ++i)
                                t += lower(a, i) * Rt[((i * n + b) * n + c) * n + d];
                            v += md.g_inv(e, d) * md.g_inv(a, c) * t;
                        }
                sd.ricci_gauss(e, b) = v;
            }
    }
    for (int A = 0; A < p; ++A) {
        Mat t = sd.W[A];
        t *= sd.W[A].trace();
        sd.ricci_gauss += t - sd.W[A] * sd.W[A];
    }
    sd.scalar_gauss = sd.ricci_gauss.trace();
    return sd;
}

}  // namespace nambugeo
