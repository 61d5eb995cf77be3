#pragma once

#include <vector>

#include "nambugeo/classical.hpp"
#include "nambugeo/embedding.hpp"
#include "nambugeo/jet.hpp"
#include "nambugeo/smallmat.hpp"

// The multi-linear bracket formulation of embedded geometry. The engine
// evaluates {f_1,...,f_n} = det(d_a f_k)/rho; on top of it sit the P, S, T
// tensors, projection and mean curvature, Ricci, the normal-free sums, the
// Z normal family, det W and symmetric functions for hypersurfaces, and
// the Codazzi-Mainardi residuals. Each op returns residuals against the
// classical oracle or against an internal identity; nothing here reuses
// the oracle's tensor calculus except where a stated identity demands it.

namespace nambugeo {

struct BracketEngine {
    int n = 0;    // arity = number of chart parameters
    Jet inv_rho;  // 1/rho, order >= 1

    // Value of {f1,...,fn} from first partials of the argument jets.
    double value(const std::vector<const Jet*>& args) const;
    // Jet of {f1,...,fn}; order = min(argument orders) - 1.
    Jet jet(const std::vector<const Jet*>& args) const;

    double value(const std::vector<Jet>& args) const;
    Jet jet(const std::vector<Jet>& args) const;
};

BracketEngine make_engine(int n, const Jet& rho_jet);

struct BracketContext {
    const PointFrame* fr = nullptr;
    BracketEngine engine;
    double gamma = 0.0, gamma2 = 0.0;
    Jet gamma2_jet;  // det(g)/rho^2 as a jet

    const PointFrame& frame() const { return *fr; }
};

// Throws DegeneratePointError when gamma < 1e-6.
BracketContext make_context(const PointFrame& fr);

// ---------------------------------------------------------------------
// Tensors. Multi-indices I run over all (n-1)-tuples of ambient indices,
// stored densely (base-m digits); the 1/sqrt((n-1)!) normalization keeps
// contractions over ordered tuples equal to sums over index sets.

struct BracketTensors {
    int n = 0, m = 0, p = 0, nI = 1;  // nI = m^(n-1)
    std::vector<double> P;            // [i*nI + I]
    std::vector<double> S;            // [(A*m + i)*nI + I]
    std::vector<double> T;            // [(A*nI + I)*m + j], epsilon form
    std::vector<double> T_bracket;    // same layout, bracket + Christoffel form

    Mat P2;               // endomorphisms of TM: second index lowered by gbar
    std::vector<Mat> B;   // B_A = P g T_A
    std::vector<Mat> ST;  // S_A T_A
    double trP2 = 0.0;
    Vec trB, trST;        // per normal

    double p_at(int i, int I) const { return P[i * nI + I]; }
    double s_at(int A, int i, int I) const { return S[(A * m + i) * nI + I]; }
    double t_at(int A, int I, int j) const { return T[(A * nI + I) * m + j]; }
};

BracketTensors build_tensors(const BracketContext& cx, const NormalFrame& nf);

// ---------------------------------------------------------------------
// Pointwise identity checks. Every residual is a max-abs difference.

struct PbstReport {
    double full_P2 = 0, full_B = 0, full_ST = 0;  // action on ambient basis vectors
    double restr_P2 = 0, restr_B = 0, restr_ST = 0;  // action on tangent vectors
    double trace_P2 = 0, trace_B = 0, trace_ST = 0;  // trace identities
    double t_forms = 0;  // epsilon form of T vs bracket form
};

PbstReport check_pbst(const BracketContext& cx, const MetricData& md,
                      const NormalFrame& nf, const ShapeData& sd,
                      const BracketTensors& bt);

struct ProjectionReport {
    Mat Pi;                    // n/Tr(P^2) * P^2
    double idempotent = 0;     // ||Pi Pi - Pi||
    double tangent_fix = 0;    // max ||Pi e_a - e_a||
    double normal_kill = 0;    // max ||Pi N_A||
    Vec H;                     // bracket-side mean curvature vector
    double H_vs_oracle = 0;
};

ProjectionReport projection_and_H(const BracketContext& cx, const NormalFrame& nf,
                                  const ShapeData& sd, const BracketTensors& bt);

struct NormalConnReport {
    std::vector<double> D;   // [(c*p + A)*p + B] = gbar(B_B(N_A), e_c)/gamma^2
    double antisym = 0;      // max |D_cAB + D_cBA|
    double vs_oracle = 0;    // max |D_cAB - gbar(D_c N_A, N_B)|
};

NormalConnReport normal_connection(const BracketContext& cx, const NormalFrame& nf,
                                   const ShapeData& sd, const BracketTensors& bt);

struct RicciReport {
    Mat bracket_side;  // column b = ambient components of R(e_b)
    Mat oracle_side;
    double residual = 0;
};

RicciReport ricci_bracket(const BracketContext& cx, const MetricData& md,
                          const ShapeData& sd, const BracketTensors& bt);

// ---------------------------------------------------------------------
// Normal vectors from brackets alone.

struct ZFamily {
    int n_alpha = 1;            // m^(p-1) multi-indices
    std::vector<Vec> Z;         // ambient components per multi-index
    Mat Zsym;                   // gbar(Z_a, Z_b)
    Mat G;                      // product metric on multi-indices
    Vec mu;                     // pencil eigenvalues, ascending
    std::vector<Vec> normals;   // candidates with mu > 0.5, not renormalized
    Vec normal_mu;              // their eigenvalues
    double trace = 0.0;         // Tr(Zsym G^{-1})
};

ZFamily z_normals(const BracketContext& cx);

struct ZReport {
    double unit = 0;      // max |gbar(Nhat,Nhat) - 1| over kept vectors
    double perp = 0;      // max |gbar(Z_alpha, e_a)| over all alpha
    double span = 0;      // normal-space projector vs Gram-Schmidt frame
    double count = 0;     // |#kept - p|
    double trace = 0;     // |Tr Z - p|
    double idem = 0;      // ||Zhat^2 - Zhat|| for the symmetrized pencil
    double eigs = 0;      // max distance of eigenvalues from {0,1}
};

ZReport check_z(const BracketContext& cx, const NormalFrame& nf, const ZFamily& zf);

// ---------------------------------------------------------------------
// Normal-free curvature sums (flat ambient only): bracket expressions for
// sum_A (Tr B_A) B_A(X), sum_A B_A^2(X) and sum_A (Tr B_A) N_A. X is given
// in ambient components and must lie in the tangent space.

struct NormalFreeSums {
    Vec sum1, sum2, sum3;  // bracket side, ambient components
    Vec ref1, ref2, ref3;  // assembled through the normal frame
    double r1 = 0, r2 = 0, r3 = 0;
};

NormalFreeSums normal_free_sums(const BracketContext& cx, const NormalFrame& nf,
                                const BracketTensors& bt, const Vec& X_tangent);

// ---------------------------------------------------------------------
// Hypersurface (p = 1, flat ambient) scalar invariants.

struct DetWReport {
    double bracket_value = 0;  // nested-bracket expression
    double oracle_value = 0;   // det W with respect to the Z normal
    double residual = 0;
};

DetWReport detw_bracket(const BracketContext& cx, const MetricData& md,
                        const NormalFrame& nf, const ShapeData& sd);

struct SymFnReport {
    Vec sigma;   // elementary symmetric functions sigma_1..sigma_n of W
    Vec oracle;  // from the oracle Weingarten map, same normal
    double residual = 0;
};

SymFnReport symmetric_functions(const BracketContext& cx, const ShapeData& sd,
                                const BracketTensors& bt);

// ---------------------------------------------------------------------
// Codazzi-Mainardi. fs holds the n-2 test functions as jets (empty for
// surfaces).

struct CmReport {
    std::vector<Vec> CA;   // bracket-form C_A, tangential part, ambient components
    double ca_vs_def = 0;  // bracket expression vs covariant assembly of C_A
    double wpi = 0;        // gamma^2 W_A(e_a,e_b) + P^2(Rbar(e_a,e_b) N_A)
    double thm = 0;        // gamma^2 C_A vs the P^2 Christoffel form
    double flat = 0;       // flat-ambient display (0 when ambient is curved)
    double tangency = 0;   // max |gbar(C_A, N_B)|
};

CmReport cm_residual(const BracketContext& cx, const MetricData& md,
                     const ConnectionCurvature& cc, const NormalFrame& nf,
                     const ShapeData& sd, const std::vector<Jet>& fs);

struct SurfaceCmReport {
    double compact = 0;    // sum {g^-2 {x,x}{x,n},x} d_i + g^-2 sum_B B_B S_A(N_B)
    double r3 = 0;         // m = 3 specialization, plain vanishing
    double swap_f = 0;     // {f{x,x}{x,n},x} = {f{x,x}{x,x},n}
    double p2_form = 0;    // sum {g^-2 (P2)^{ik}, n^k} = 0
    double classical = 0;  // (d_c x) {g^-2 (P2), n} vs (1/rho) eps grad h
};

// n = 2, flat ambient. m = 3 entries are 0 when m > 3 and vice versa.
SurfaceCmReport cm_surface(const BracketContext& cx, const MetricData& md,
                           const ConnectionCurvature& cc, const NormalFrame& nf,
                           const ShapeData& sd, const BracketTensors& bt);

struct HypersurfaceCmReport {
    double swap_f = 0;      // {g^-2{x,X}{X,n},x}_f = {g^-2{x,X}{X,x},n}_f
    double grad_h = 0;      // (d_c x){g^-2(P2),n}_f vs -(1/rho) eps grad h
    double closure = 0;     // eps_{klL} {g^-2{x,X}{X,x}, g^-1{x,X}}_f
};

// p = 1, flat ambient, any n.
HypersurfaceCmReport cm_hypersurface_identities(const BracketContext& cx,
                                                const MetricData& md,
                                                const ConnectionCurvature& cc,
                                                const NormalFrame& nf,
                                                const ShapeData& sd,
                                                const std::vector<Jet>& fs);

// The arbitrary-function closure identity on its own: xs are any n+1 jets
// on an n-parameter chart (order 3), not necessarily an embedding; the
// bracket gamma^2 = (1/n!) sum {x^i, vec{x}^I}^2 must exceed 1e-10.
double epsilon_closure(const BracketEngine& eng, const std::vector<Jet>& xs,
                       const std::vector<Jet>& fs);

struct PoissonReport {
    Vec components;  // the three CM components
    double residual = 0;
    double gamma2 = 0;
};

// Pure 2D Poisson identity for arbitrary x1,x2,x3.
PoissonReport poisson_identity(const BracketEngine& eng, const std::vector<Jet>& xs);

// ---------------------------------------------------------------------
// Surfaces (n = 2): Gaussian curvature and the complex structure.

struct SurfaceKReport {
    double K_S = 0;       // sectional part - Tr S_A^2/(2 gamma^2)
    double K_direct = 0;  // flat ambient: -(1/2g^2) sum {x,n}{x,n}
    double K_Z = 0;       // flat ambient: nested-bracket form over Z normals
    double K_oracle = 0;  // intrinsic scalar curvature / 2
    double r_S = 0, r_direct = 0, r_Z = 0;
};

SurfaceKReport surface_K(const BracketContext& cx, const MetricData& md,
                         const ConnectionCurvature& cc, const NormalFrame& nf,
                         const BracketTensors& bt);

struct ComplexStructureReport {
    double match = 0;    // gamma P vs (1/sqrt g) eps g on tangent vectors
    double squared = 0;  // max ||(gamma P)^2 Y + Y||
};

ComplexStructureReport complex_structure(const BracketContext& cx, const MetricData& md,
                                         const BracketTensors& bt);

}  // namespace nambugeo
