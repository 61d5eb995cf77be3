#include "nambugeo/embedding.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <utility>

#include <json.hpp>

namespace nambugeo {

namespace {

using nlohmann::json;

std::string point_to_string(const Vec& u) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (i) os << ", ";
        os << u[i];
    }
    os << ")";
    return os.str();
}

DerivIndex unit_index(int var, int n) {
    DerivIndex d;
    d.exponents.assign(n, 0);
    d.exponents[var] = 1;
    return d;
}

Expr parse_field(const std::string& text, char prefix, const std::string& where,
                 int max_allowed) {
    Expr e;
    try {
        e = parse(text, prefix);
    } catch (const ParseError& pe) {
        throw ConfigError("config: " + where + ": " + std::string(pe.what()));
    }
    const int mp = max_param(e);
    if (mp > max_allowed)
        throw ConfigError("config: " + where + ": references " + std::string(1, prefix) +
                          std::to_string(mp) + " but only " + std::to_string(max_allowed) +
                          " variables are available");
    return e;
}

bool looks_like_param_name(const std::string& s) {
    if (s.size() < 2 || (s[0] != 'u' && s[0] != 'x')) return false;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

double parse_positive_real(const std::string& text, const std::string& where) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw ConfigError("catalog: " + where + " is not a number: \"" + text + "\"");
    if (!(v > 0.0) || !std::isfinite(v))
        throw ConfigError("catalog: " + where + " must be positive, got " + text);
    return v;
}

}  // namespace

const char* density_kind_name(DensityKind k) {
    switch (k) {
        case DensityKind::sqrt_g: return "sqrt_g";
        case DensityKind::one: return "one";
        case DensityKind::custom: return "custom";
    }
    return "?";
}

EmbeddingSpec EmbeddingSpec::with_density(DensityKind kind) const {
    if (kind == DensityKind::custom && density_expr.empty())
        throw ConfigError("config: no custom density expression in spec \"" + name + "\"");
    EmbeddingSpec s = *this;
    s.density = kind;
    return s;
}

EmbeddingSpec load_spec(const std::string& config_text) {
    json j;
    try {
        j = json::parse(config_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");

    static const char* allowed[] = {"name", "n",        "m",         "coords",
                                    "density", "ambient", "constants", "domain"};
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : allowed)
            if (item.key() == k) ok = true;
        if (!ok) throw ConfigError("config: unknown key \"" + item.key() + "\"");
    }
    for (const char* k : {"name", "n", "m", "coords", "domain"})
        if (!j.contains(k))
            throw ConfigError("config: missing required key \"" + std::string(k) + "\"");

    EmbeddingSpec spec;

    if (!j["name"].is_string() || j["name"].get<std::string>().empty())
        throw ConfigError("config: name must be a non-empty string");
    spec.name = j["name"].get<std::string>();

    if (!j["n"].is_number_integer()) throw ConfigError("config: n must be an integer");
    spec.n = j["n"].get<int>();
    if (spec.n < 2 || spec.n > 3) throw ConfigError("config: n must be 2 or 3");

    if (!j["m"].is_number_integer()) throw ConfigError("config: m must be an integer");
    spec.m = j["m"].get<int>();
    if (spec.m <= spec.n || spec.m > 6)
        throw ConfigError("config: m must satisfy n < m <= 6");

    if (!j["coords"].is_array() || static_cast<int>(j["coords"].size()) != spec.m)
        throw ConfigError("config: coords must be an array of m expressions");
    for (int i = 0; i < spec.m; ++i) {
        const json& c = j["coords"][i];
        const std::string where = "coords[" + std::to_string(i) + "]";
        if (!c.is_string()) throw ConfigError("config: " + where + " must be a string");
        spec.coords.push_back(parse_field(c.get<std::string>(), 'u', where, spec.n));
    }

    if (j.contains("density")) {
        if (!j["density"].is_string())
            throw ConfigError("config: density must be \"sqrt_g\" or an expression string");
        const std::string d = j["density"].get<std::string>();
        if (d == "sqrt_g") {
            spec.density = DensityKind::sqrt_g;
        } else {
            spec.density = DensityKind::custom;
            spec.density_expr = parse_field(d, 'u', "density", spec.n);
        }
    }

    if (j.contains("ambient") && !(j["ambient"].is_string() &&
                                   j["ambient"].get<std::string>() == "euclidean")) {
        const json& amb = j["ambient"];
        if (!amb.is_array() || static_cast<int>(amb.size()) != spec.m)
            throw ConfigError("config: ambient must be \"euclidean\" or an m x m matrix");
        spec.ambient_euclidean = false;
        spec.ambient.assign(spec.m * spec.m, Expr());
        for (int i = 0; i < spec.m; ++i) {
            const json& row = amb[i];
            if (!row.is_array() || static_cast<int>(row.size()) != spec.m)
                throw ConfigError("config: ambient row " + std::to_string(i) +
                                  " must have m entries");
            for (int k = 0; k < spec.m; ++k)
                if (!row[k].is_string())
                    throw ConfigError("config: ambient[" + std::to_string(i) + "][" +
                                      std::to_string(k) + "] must be a string");
        }
        // Symmetric by construction: only the upper triangle is read.
        for (int i = 0; i < spec.m; ++i)
            for (int k = i; k < spec.m; ++k) {
                const std::string where =
                    "ambient[" + std::to_string(i) + "][" + std::to_string(k) + "]";
                Expr e = parse_field(amb[i][k].get<std::string>(), 'x', where, spec.m);
                spec.ambient[i * spec.m + k] = e;
                spec.ambient[k * spec.m + i] = e;
            }
    }

    if (j.contains("constants")) {
        if (!j["constants"].is_object())
            throw ConfigError("config: constants must be an object");
        for (const auto& item : j["constants"].items()) {
            if (!item.value().is_number())
                throw ConfigError("config: constants." + item.key() + " must be a number");
            if (looks_like_param_name(item.key()))
                throw ConfigError("config: constant name \"" + item.key() +
                                  "\" collides with a parameter name");
            spec.constants[item.key()] = item.value().get<double>();
        }
    }

    if (!j["domain"].is_array() || static_cast<int>(j["domain"].size()) != spec.n)
        throw ConfigError("config: domain must be an array of n [lo, hi] pairs");
    for (int a = 0; a < spec.n; ++a) {
        const json& iv = j["domain"][a];
        if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number())
            throw ConfigError("config: domain[" + std::to_string(a) +
                              "] must be [lo, hi] with numbers");
        const double lo = iv[0].get<double>(), hi = iv[1].get<double>();
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
            throw ConfigError("config: domain[" + std::to_string(a) +
                              "] must satisfy lo < hi and be finite");
        spec.domain.push_back({lo, hi});
    }

    return spec;
}

const std::vector<CatalogEntry>& catalog_entries() {
    static const std::vector<CatalogEntry> entries = {
        {"plane", 2, 3, "flat plane x3 = 0", {}},
        {"sphere", 2, 3, "round sphere of radius r", {{"r", "1"}}},
        {"torus", 2, 3, "torus of revolution, radii R > r", {{"R", "2"}, {"r", "1"}}},
        {"graph2", 2, 3, "graph x3 = f(u1,u2)", {{"f", "u1^2-u2^2"}}},
        {"clifford", 2, 4, "Clifford torus in R^4, radius 1", {}},
        {"s3", 3, 4, "round 3-sphere of radius r", {{"r", "1"}}},
        {"graph3", 3, 4, "graph x4 = f(u1,u2,u3)", {{"f", "(u1^2+u2^2+u3^2)/2"}}},
    };
    return entries;
}

EmbeddingSpec catalog_spec(const std::string& name,
                           const std::map<std::string, std::string>& params) {
    const CatalogEntry* entry = nullptr;
    for (const CatalogEntry& e : catalog_entries())
        if (e.name == name) entry = &e;
    if (!entry) throw ConfigError("catalog: no entry named \"" + name + "\"");

    std::map<std::string, std::string> vals;
    for (const auto& [k, v] : entry->params) vals[k] = v;
    for (const auto& [k, v] : params) {
        if (!vals.count(k))
            throw ConfigError("catalog: entry \"" + name + "\" has no parameter \"" + k +
                              "\"");
        vals[k] = v;
    }

    const double pi = std::numbers::pi;
    json j;
    j["name"] = name;
    j["n"] = entry->n;
    j["m"] = entry->m;
    json consts = json::object();

    if (name == "plane") {
        j["coords"] = {"u1", "u2", "0"};
        j["domain"] = {{-2.0, 2.0}, {-2.0, 2.0}};
    } else if (name == "sphere") {
        consts["r"] = parse_positive_real(vals["r"], "sphere parameter r");
        j["coords"] = {"r*sin(u1)*cos(u2)", "r*sin(u1)*sin(u2)", "r*cos(u1)"};
        j["domain"] = {{0.2, pi - 0.2}, {0.0, 2.0 * pi}};
    } else if (name == "torus") {
        const double R = parse_positive_real(vals["R"], "torus parameter R");
        const double r = parse_positive_real(vals["r"], "torus parameter r");
        if (!(R > r))
            throw ConfigError("catalog: torus requires R > r, got R=" + vals.at("R") +
                              ", r=" + vals.at("r"));
        consts["R"] = R;
        consts["r"] = r;
        j["coords"] = {"(R+r*cos(u1))*cos(u2)", "(R+r*cos(u1))*sin(u2)", "r*sin(u1)"};
        j["domain"] = {{0.0, 2.0 * pi}, {0.0, 2.0 * pi}};
    } else if (name == "graph2") {
        j["coords"] = {"u1", "u2", vals["f"]};
        j["domain"] = {{-1.0, 1.0}, {-1.0, 1.0}};
    } else if (name == "clifford") {
        j["coords"] = {"cos(u1)/sqrt(2)", "sin(u1)/sqrt(2)", "cos(u2)/sqrt(2)",
                       "sin(u2)/sqrt(2)"};
        j["domain"] = {{0.0, 2.0 * pi}, {0.0, 2.0 * pi}};
    } else if (name == "s3") {
        consts["r"] = parse_positive_real(vals["r"], "s3 parameter r");
        j["coords"] = {"r*sin(u1)*sin(u2)*cos(u3)", "r*sin(u1)*sin(u2)*sin(u3)",
                       "r*sin(u1)*cos(u2)", "r*cos(u1)"};
        j["domain"] = {{0.2, pi - 0.2}, {0.2, pi - 0.2}, {0.0, 2.0 * pi}};
    } else if (name == "graph3") {
        j["coords"] = {"u1", "u2", "u3", vals["f"]};
        j["domain"] = {{-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}};
    }

    if (!consts.empty()) j["constants"] = consts;

    try {
        return load_spec(j.dump());
    } catch (const ConfigError& e) {
        throw ConfigError("catalog: entry \"" + name + "\": " + std::string(e.what()));
    }
}

EmbeddingSpec load_embedding(const std::string& path_or_catalog) {
    const std::string prefix = "catalog:";
    if (path_or_catalog.rfind(prefix, 0) == 0) {
        std::string rest = path_or_catalog.substr(prefix.size());
        std::string name = rest;
        std::map<std::string, std::string> params;
        const auto q = rest.find('?');
        if (q != std::string::npos) {
            name = rest.substr(0, q);
            std::string plist = rest.substr(q + 1);
            std::istringstream ss(plist);
            std::string kv;
            while (std::getline(ss, kv, ',')) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos || eq == 0 || eq + 1 == kv.size())
                    throw ConfigError("catalog: malformed parameter \"" + kv +
                                      "\" (expected key=value)");
                params[kv.substr(0, eq)] = kv.substr(eq + 1);
            }
        }
        return catalog_spec(name, params);
    }

    std::ifstream in(path_or_catalog);
    if (!in) throw ConfigError("config: cannot open file \"" + path_or_catalog + "\"");
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_spec(ss.str());
}

double PointFrame::inner(const Vec& a, const Vec& b) const {
    double s = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) s += gbar(i, j) * a[i] * b[j];
    return s;
}

PointFrame frame_at(const EmbeddingSpec& spec, const Vec& u, int order) {
    if (static_cast<int>(u.size()) != spec.n)
        throw ConfigError("point has " + std::to_string(u.size()) +
                          " coordinates, spec needs " + std::to_string(spec.n));
    for (double v : u)
        if (!std::isfinite(v)) throw ConfigError("point has a non-finite coordinate");
    if (order < 2 || order > 3) throw std::invalid_argument("frame_at: order must be 2 or 3");

    std::map<std::string, double> constants = spec.constants;
    constants.emplace("pi", std::numbers::pi);

    PointFrame fr;
    fr.spec_name = spec.name;
    fr.n = spec.n;
    fr.m = spec.m;
    fr.order = order;
    fr.density = spec.density;
    fr.u = u;

    EvalEnv env;
    env.constants = &constants;
    for (int a = 0; a < spec.n; ++a)
        env.params.push_back(Jet::variable(a, u[a], spec.n, order));

    for (int i = 0; i < spec.m; ++i) fr.x_jets.push_back(evaluate(spec.coords[i], env));

    const int n = spec.n, m = spec.m;
    const int gord = order - 1;

    fr.tangent = Mat(n, m);
    std::vector<Jet> dx(n * m);  // dx[a*m+i] = jet of d_a x^i, order-1 lower
    for (int a = 0; a < n; ++a)
        for (int i = 0; i < m; ++i) {
            dx[a * m + i] = fr.x_jets[i].derivative(a);
            fr.tangent(a, i) = dx[a * m + i].value();
        }

    fr.ambient_euclidean = spec.ambient_euclidean;
    fr.gbar = Mat::identity(m);
    fr.gbar_inv = Mat::identity(m);
    fr.gbar_jets.assign(m * m, Jet::constant(0.0, n, gord));
    if (spec.ambient_euclidean) {
        for (int i = 0; i < m; ++i) fr.gbar_jets[i * m + i] = Jet::constant(1.0, n, gord);
    } else {
        // Jets of the ambient metric in ambient variables, expanded at x(u).
        EvalEnv amb_env;
        amb_env.constants = &constants;
        for (int i = 0; i < m; ++i)
            amb_env.params.push_back(Jet::variable(i, fr.x_jets[i].value(), m, order));
        std::vector<Jet> gbar_amb(m * m, Jet());
        for (int i = 0; i < m; ++i)
            for (int k = i; k < m; ++k) {
                Jet e = evaluate(spec.ambient[i * m + k], amb_env);
                gbar_amb[i * m + k] = e;
                gbar_amb[k * m + i] = e;
            }

        fr.gbar = Mat(m, m);
        for (int i = 0; i < m; ++i)
            for (int k = 0; k < m; ++k) fr.gbar(i, k) = gbar_amb[i * m + k].value();
        EigenResult eg = jacobi_eigen(fr.gbar);
        if (eg.values.front() <= 0.0)
            throw ConfigError("config: ambient metric not positive-definite at x" +
                              point_to_string(u));
        fr.gbar_inv = inverse(fr.gbar);

        // Christoffels need one derivative of gbar, so work at order-1 lower.
        std::vector<Jet> gbar_amb_lo(m * m);
        for (int i = 0; i < m * m; ++i) gbar_amb_lo[i] = gbar_amb[i].truncated(gord);
        std::vector<Jet> ginv_amb = jet_mat_inverse(gbar_amb_lo, m);

        std::vector<Jet> gamma_amb((std::size_t)m * m * m, Jet::constant(0.0, m, gord));
        for (int i = 0; i < m; ++i)
            for (int jj = 0; jj < m; ++jj)
                for (int k = jj; k < m; ++k) {
                    Jet s = Jet::constant(0.0, m, gord);
                    for (int l = 0; l < m; ++l) {
                        Jet t = gbar_amb[l * m + k].derivative(jj) +
                                gbar_amb[l * m + jj].derivative(k) -
                                gbar_amb[jj * m + k].derivative(l);
                        s += ginv_amb[i * m + l] * t;
                    }
                    s = 0.5 * s;
                    gamma_amb[(i * m + jj) * m + k] = s;
                    gamma_amb[(i * m + k) * m + jj] = s;
                }

        // R^i_jkl = d_k G^i_lj - d_l G^i_kj + G^i_km G^m_lj - G^i_lm G^m_kj
        fr.Rbar.assign((std::size_t)m * m * m * m, 0.0);
        for (int i = 0; i < m; ++i)
            for (int jj = 0; jj < m; ++jj)
                for (int k = 0; k < m; ++k)
                    for (int l = 0; l < m; ++l) {
                        double v = gamma_amb[(i * m + l) * m + jj].partial(unit_index(k, m)) -
                                   gamma_amb[(i * m + k) * m + jj].partial(unit_index(l, m));
                        for (int mm = 0; mm < m; ++mm)
                            v += gamma_amb[(i * m + k) * m + mm].value() *
                                     gamma_amb[(mm * m + l) * m + jj].value() -
                                 gamma_amb[(i * m + l) * m + mm].value() *
                                     gamma_amb[(mm * m + k) * m + jj].value();
                        fr.Rbar[(((std::size_t)i * m + jj) * m + k) * m + l] = v;
                    }

        // Pull everything back to the chart by composing with x(u).
        std::vector<Jet> x_lo;
        for (int i = 0; i < m; ++i) x_lo.push_back(fr.x_jets[i].truncated(gord));
        for (int i = 0; i < m; ++i)
            for (int k = 0; k < m; ++k)
                fr.gbar_jets[i * m + k] = compose(gbar_amb_lo[i * m + k], x_lo);
        fr.gammabar_jets.assign((std::size_t)m * m * m, Jet());
        for (std::size_t t = 0; t < gamma_amb.size(); ++t)
            fr.gammabar_jets[t] = compose(gamma_amb[t], x_lo);
    }

    // Induced metric jets g_ab = gbar_ij dx^i_a dx^j_b.
    fr.g_jets.assign(n * n, Jet());
    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) {
            Jet s = Jet::constant(0.0, n, gord);
            if (spec.ambient_euclidean) {
                for (int i = 0; i < m; ++i) s += dx[a * m + i] * dx[b * m + i];
            } else {
                for (int i = 0; i < m; ++i)
                    for (int jj = 0; jj < m; ++jj)
                        s += fr.gbar_jets[i * m + jj] * dx[a * m + i] * dx[b * m + jj];
            }
            fr.g_jets[a * n + b] = s;
            fr.g_jets[b * n + a] = s;
        }

    fr.det_g_jet = jet_det(fr.g_jets, n);
    const double detg = fr.det_g_jet.value();
    fr.sqrt_g = detg > 0.0 ? std::sqrt(detg) : 0.0;
    if (fr.sqrt_g <= 1e-8)
        throw DegeneratePointError("sqrt(g) = " + std::to_string(fr.sqrt_g) +
                                   " <= 1e-8 at " + point_to_string(u));

    switch (spec.density) {
        case DensityKind::sqrt_g:
            fr.rho_jet = apply_univariate(fr.det_g_jet, UnivariateFn::sqrt);
            break;
        case DensityKind::one:
            fr.rho_jet = Jet::constant(1.0, n, gord);
            break;
        case DensityKind::custom: {
            if (spec.density_expr.empty())
                throw ConfigError("config: density mode is custom but no expression given");
            Jet d = evaluate(spec.density_expr, env).truncated(gord);
            if (!(d.value() > 0.0))
                throw DegeneratePointError("density = " + std::to_string(d.value()) +
                                           " not positive at " + point_to_string(u));
            fr.rho_jet = d;
            break;
        }
    }
    fr.rho = fr.rho_jet.value();
    fr.gamma = fr.sqrt_g / fr.rho;
    return fr;
}

}  // namespace nambugeo
