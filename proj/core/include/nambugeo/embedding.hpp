#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nambugeo/expr.hpp"
#include "nambugeo/jet.hpp"
#include "nambugeo/smallmat.hpp"

// Embedding specifications (user configs and the built-in catalog) and
// pointwise frame evaluation: coordinate jets, density, ambient metric
// data. One parametric chart with a rectangular domain.

namespace nambugeo {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& message) : std::runtime_error(message) {}
};

// Raised when a point fails a degeneracy gate (sqrt(g) or gamma too small).
class DegeneratePointError : public std::runtime_error {
public:
    explicit DegeneratePointError(const std::string& reason)
        : std::runtime_error(reason) {}
};

enum class DensityKind { sqrt_g, one, custom };

const char* density_kind_name(DensityKind k);

struct EmbeddingSpec {
    std::string name;
    int n = 0;  // parameter dimension, 2..3
    int m = 0;  // ambient dimension, n+1..6
    std::vector<Expr> coords;                   // m expressions in u1..un
    DensityKind density = DensityKind::sqrt_g;
    Expr density_expr;                          // set when density == custom
    bool ambient_euclidean = true;
    std::vector<Expr> ambient;                  // m*m expressions in x1..xm (row-major, symmetric)
    std::map<std::string, double> constants;    // includes "pi" unless overridden
    std::vector<std::array<double, 2>> domain;  // n closed intervals

    int p() const { return m - n; }

    // Copy with a different density mode (custom keeps the spec's expression,
    // which must exist).
    EmbeddingSpec with_density(DensityKind kind) const;
};

// Parses and validates a JSON config (schema in README). Unknown keys are
// rejected; dimensions must satisfy 2 <= n <= 3, n < m <= 6.
EmbeddingSpec load_spec(const std::string& config_text);

// Accepts either a file path or "catalog:name?key=value,...".
EmbeddingSpec load_embedding(const std::string& path_or_catalog);

struct CatalogEntry {
    std::string name;
    int n, m;
    std::string summary;
    std::vector<std::pair<std::string, std::string>> params;  // name -> default
};

const std::vector<CatalogEntry>& catalog_entries();

// Builds the spec for a catalog entry; params may override defaults
// ("r" -> "2", "f" -> "u1^2-u2^2").
EmbeddingSpec catalog_spec(const std::string& name,
                           const std::map<std::string, std::string>& params = {});

struct PointFrame {
    std::string spec_name;
    int n = 0, m = 0, order = 3;
    DensityKind density = DensityKind::sqrt_g;
    Vec u;

    std::vector<Jet> x_jets;   // m jets of the requested order
    std::vector<Jet> g_jets;   // n*n induced-metric jets, order-1 lower
    Jet det_g_jet;
    Jet rho_jet;               // same order as g_jets

    double sqrt_g = 0.0;
    double rho = 0.0;
    double gamma = 0.0;        // sqrt(g) / rho

    Mat tangent;               // n x m, row a = e_a components

    bool ambient_euclidean = true;
    Mat gbar, gbar_inv;           // ambient metric at x(u)
    std::vector<Jet> gbar_jets;   // m*m jets of gbar composed onto the chart
    std::vector<Jet> gammabar_jets;  // m*m*m jets of Christoffels, empty when euclidean
    std::vector<double> Rbar;        // m^4 curvature values, empty when euclidean

    double gbar_at(int i, int j) const { return gbar(i, j); }
    const Jet& gbar_jet(int i, int j) const { return gbar_jets[i * m + j]; }
    const Jet& gammabar_jet(int i, int j, int k) const {
        return gammabar_jets[(i * m + j) * m + k];
    }
    double rbar(int i, int j, int k, int l) const {
        return Rbar.empty() ? 0.0 : Rbar[((i * m + j) * m + k) * m + l];
    }
    // Christoffel value at the point.
    double gammabar_at(int i, int j, int k) const {
        return gammabar_jets.empty() ? 0.0 : gammabar_jet(i, j, k).value();
    }

    // gbar-inner product of two ambient vectors.
    double inner(const Vec& a, const Vec& b) const;
};

// Evaluates everything at u. The declared domain only scopes sampling;
// frame_at accepts any finite point. Throws DegeneratePointError when
// sqrt(g) <= 1e-8 or the density is not positive at the point, ConfigError
// when the ambient metric fails to be positive-definite there.
PointFrame frame_at(const EmbeddingSpec& spec, const Vec& u, int order = 3);

}  // namespace nambugeo
