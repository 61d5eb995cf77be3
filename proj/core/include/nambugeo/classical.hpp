#pragma once

#include <vector>

#include "nambugeo/embedding.hpp"
#include "nambugeo/jet.hpp"
#include "nambugeo/smallmat.hpp"

// Classical differential-geometry oracle: induced metric, Christoffel
// symbols and curvature of the chart, Gram-Schmidt normal frame, second
// fundamental forms and Weingarten maps. Everything here is textbook
// tensor calculus, independent of the bracket formulation it is used to
// validate.
//
// Conventions: h_A(a,b) = -gbar(e_a, D_b N_A) so a round sphere with the
// outward normal has W = -(1/r) Id; R^a_bcd = d_c G^a_db - d_d G^a_cb
// + G^a_ce G^e_db - G^a_de G^e_cb, Ric_bd = R^a_bad (spheres positive).

namespace nambugeo {

struct MetricData {
    int n = 0;
    Mat g, g_inv;
    double det_g = 0.0, sqrt_g = 0.0;
    std::vector<Jet> g_inv_jets;  // n*n jets of g^{ab}, order 1
};

MetricData induced_metric(const PointFrame& fr);

struct ConnectionCurvature {
    int n = 0;
    std::vector<Jet> gamma_jets;  // n^3 jets of Gamma^a_{bc}, order 1
    std::vector<double> riemann;  // n^4 values of R^a_{bcd}
    Mat ricci;                    // R_{bd}
    Mat ricci_mixed;              // R^a_b = g^{ac} R_{cb}
    double scalar = 0.0;

    double gamma_at(int a, int b, int c) const {
        return gamma_jets[(a * n + b) * n + c].value();
    }
    double riemann_at(int a, int b, int c, int d) const {
        return riemann[((a * n + b) * n + c) * n + d];
    }
};

ConnectionCurvature sigma_connection_curvature(const PointFrame& fr,
                                               const MetricData& md);

struct NormalFrame {
    int p = 0, m = 0, n = 0;
    Mat normals;                 // p x m component values
    std::vector<Jet> n_jets;     // p*m jets, order 2
    std::vector<double> derivs;  // n*p*m values of (D_a N_A)^i (ambient covariant)

    const Jet& n_jet(int A, int i) const { return n_jets[A * m + i]; }
    double deriv_at(int a, int A, int i) const { return derivs[(a * p + A) * m + i]; }
};

// Orthonormal normal frame by pivoted Gram-Schmidt over the ambient basis,
// carried out in jet arithmetic so the normals can be differentiated.
// Orientation: det(e_1..e_n, N_1..N_p) > 0, enforced by flipping the last
// normal. Throws std::domain_error on rank deficiency.
NormalFrame gram_schmidt_normals(const PointFrame& fr);

struct ShapeData {
    int n = 0, p = 0, m = 0;
    std::vector<Mat> h;          // second fundamental forms, one n x n per normal
    std::vector<Mat> W;          // Weingarten maps g^{-1} h_A
    std::vector<Jet> h_jets;     // p*n*n jets of h_A(a,b), order 1
    std::vector<Jet> W_jets;     // p*n*n jets of (W_A)^a_b, order 1
    Vec H;                       // mean curvature vector, ambient components
    double H_norm = 0.0;
    std::vector<double> Dcoef;   // n*p*p values of gbar(D_a N_A, N_B)
    Mat ricci_gauss;             // Ricci endomorphism assembled from W and Rbar
    double scalar_gauss = 0.0;

    double h_at(int A, int a, int b) const { return h[A](a, b); }
    double w_at(int A, int a, int b) const { return W[A](a, b); }
    const Jet& h_jet(int A, int a, int b) const { return h_jets[(A * n + a) * n + b]; }
    const Jet& w_jet(int A, int a, int b) const { return W_jets[(A * n + a) * n + b]; }
    double dcoef_at(int a, int A, int B) const { return Dcoef[(a * p + A) * p + B]; }
};

ShapeData shape_data(const PointFrame& fr, const MetricData& md, const NormalFrame& nf);

}  // namespace nambugeo
