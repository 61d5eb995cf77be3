#include "nambugeo/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "nambugeo/brackets.hpp"
#include "nambugeo/classical.hpp"
#include "nambugeo/embedding.hpp"
#include "nambugeo/verify.hpp"

namespace nambugeo {
namespace {

using ojson = nlohmann::ordered_json;

// Shortest round-trip decimal, shared with the JSON reports so CSV and
// JSON outputs are byte-stable.
std::string fmt(double x) { return nlohmann::json(x).dump(); }

Vec parse_point(const std::string& text, int n) {
    Vec u;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = std::stod(item, &used);
        while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used])))
            ++used;
        if (used != item.size())
            throw ConfigError("bad coordinate '" + item + "' in point '" + text + "'");
        u.push_back(v);
    }
    if (static_cast<int>(u.size()) != n)
        throw ConfigError("point '" + text + "' has " + std::to_string(u.size()) +
                          " coordinates, expected " + std::to_string(n));
    return u;
}

DensityKind parse_density(const std::string& name) {
    if (name == "sqrt_g") return DensityKind::sqrt_g;
    if (name == "one") return DensityKind::one;
    if (name == "custom") return DensityKind::custom;
    throw ConfigError("unknown density mode '" + name + "' (sqrt_g | one | custom)");
}

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + "\"";
}

// Writes to the path when given, otherwise to the fallback stream.
void emit(const std::string& text, const std::string& path, std::ostream& fallback) {
    if (path.empty()) {
        fallback << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file: " + path);
    f << text;
}

std::vector<std::vector<Jet>> cm_test_functions(const PointFrame& fr) {
    if (fr.n == 2) return {{}};
    Jet u1 = Jet::variable(0, fr.u[0], fr.n, 3);
    Jet u2 = Jet::variable(1, fr.u[1], fr.n, 3);
    return {{u1}, {u2}, {apply_univariate(u1, UnivariateFn::sin)}};
}

ojson mat_json(const Mat& a) {
    ojson rows = ojson::array();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        ojson row = ojson::array();
        for (std::size_t j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------
// eval

int cmd_eval(const std::string& embedding, const std::string& point_text,
             const std::string& density, const std::string& out_path, std::ostream& out) {
    EmbeddingSpec spec = load_embedding(embedding);
    if (!density.empty()) spec = spec.with_density(parse_density(density));
    Vec u = parse_point(point_text, spec.n);

    PointFrame fr = frame_at(spec, u, 3);
    MetricData md = induced_metric(fr);
    ConnectionCurvature cc = sigma_connection_curvature(fr, md);
    NormalFrame nf = gram_schmidt_normals(fr);
    ShapeData sd = shape_data(fr, md, nf);
    BracketContext cx = make_context(fr);
    BracketTensors bt = build_tensors(cx, nf);
    const int n = fr.n, p = nf.p;
    const bool euclid = fr.ambient_euclidean;

    ojson doc;
    doc["schema_version"] = 1;
    doc["spec"] = {{"name", spec.name}, {"n", spec.n}, {"m", spec.m}, {"p", spec.p()}};
    doc["u"] = u;
    doc["density"] = density_kind_name(fr.density);
    doc["g"] = mat_json(md.g);
    doc["sqrt_g"] = fr.sqrt_g;
    doc["rho"] = fr.rho;
    doc["gamma"] = fr.gamma;

    ojson q = ojson::array();
    q.push_back({{"id", "trace-P2"},
                 {"trP2", bt.trP2},
                 {"gamma2", cx.gamma2},
                 {"residual", std::abs(bt.trP2 / n - cx.gamma2)}});

    ProjectionReport pj = projection_and_H(cx, nf, sd, bt);
    q.push_back({{"id", "mean-curvature"},
                 {"H", pj.H},
                 {"Hnorm", sd.H_norm},
                 {"residual", pj.H_vs_oracle}});

    RicciReport rc = ricci_bracket(cx, md, sd, bt);
    q.push_back({{"id", "ricci-bracket"},
                 {"ricci", mat_json(cc.ricci)},
                 {"scalar", cc.scalar},
                 {"residual", rc.residual}});

    if (n == 2) {
        SurfaceKReport kr = surface_K(cx, md, cc, nf, bt);
        q.push_back({{"id", "k-bracket"},
                     {"K", kr.K_S},
                     {"K_oracle", kr.K_oracle},
                     {"residual", kr.r_S}});
    }

    if (p == 1) {
        SymFnReport sf = symmetric_functions(cx, sd, bt);
        q.push_back(
            {{"id", "sym-functions"}, {"sigma", sf.sigma}, {"residual", sf.residual}});
        if (euclid) {
            DetWReport dw = detw_bracket(cx, md, nf, sd);
            q.push_back({{"id", "detw-bracket"},
                         {"detW", dw.bracket_value},
                         {"detW_oracle", dw.oracle_value},
                         {"residual", dw.residual}});
        }
    }

    ZFamily zf = z_normals(cx);
    ZReport zr = check_z(cx, nf, zf);
    int kept = static_cast<int>(zf.normals.size());
    q.push_back({{"id", "z-span"},
                 {"pencil_mu", zf.mu},
                 {"trace", zf.trace},
                 {"kept", kept},
                 {"residual", zr.span}});
    q.push_back({{"id", "z-unit"}, {"residual", zr.unit}});
    q.push_back({{"id", "z-perp"}, {"residual", zr.perp}});

    double vs_def = 0, wpi = 0, thm = 0, tang = 0;
    for (const std::vector<Jet>& fs : cm_test_functions(fr)) {
        CmReport cm = cm_residual(cx, md, cc, nf, sd, fs);
        vs_def = std::max(vs_def, cm.ca_vs_def);
        wpi = std::max(wpi, cm.wpi);
        thm = std::max(thm, cm.thm);
        tang = std::max(tang, cm.tangency);
    }
    q.push_back({{"id", "cm-bracket-vs-def"}, {"residual", vs_def}});
    q.push_back({{"id", "cm-wpi"}, {"residual", wpi}});
    q.push_back({{"id", "cm-thm"}, {"residual", thm}});
    q.push_back({{"id", "cm-tangency"}, {"residual", tang}});

    doc["quantities"] = std::move(q);
    emit(doc.dump(2) + "\n", out_path, out);
    return kExitOk;
}

// ---------------------------------------------------------------------
// verify

int cmd_verify(const std::string& embedding, int grid_k, int random_count,
               std::uint64_t seed, bool use_random, const std::string& ids_csv,
               double tol, bool tol_set, const std::string& out_path, std::ostream& out,
               std::ostream& err) {
    EmbeddingSpec spec = load_embedding(embedding);
    SamplePlan plan =
        use_random ? SamplePlan::random(random_count, seed) : SamplePlan::grid(grid_k);
    SuiteOptions opts;
    opts.ids = split_csv(ids_csv);
    if (tol_set) opts.tol_override = tol;

    IdentityReport rep = run_suite(spec, plan, opts);
    const std::string doc = report_json(rep);
    if (out_path.empty()) {
        out << doc;
        err << report_summary(rep) << "\n";
    } else {
        emit(doc, out_path, out);
        out << report_summary(rep) << "\n";
    }
    return rep.all_pass() ? kExitOk : kExitChecksFailed;
}

// ---------------------------------------------------------------------
// grid

struct GridRow {
    Vec u;
    bool ok = false;
    double K_bracket = 0, K_oracle = 0, gamma = 0, Hnorm = 0;
    std::string reason;
};

int cmd_grid(const std::string& embedding, int grid_k, const std::string& density,
             const std::string& format, const std::string& out_path, std::ostream& out) {
    EmbeddingSpec spec = load_embedding(embedding);
    if (!density.empty()) spec = spec.with_density(parse_density(density));
    const int n = spec.n;
    std::vector<Vec> pts = sample_points(spec, SamplePlan::grid(grid_k));

    std::vector<GridRow> rows;
    rows.reserve(pts.size());
    for (const Vec& u : pts) {
        GridRow row;
        row.u = u;
        try {
            PointFrame fr = frame_at(spec, u, 3);
            MetricData md = induced_metric(fr);
            NormalFrame nf = gram_schmidt_normals(fr);
            ShapeData sd = shape_data(fr, md, nf);
            row.gamma = fr.gamma;
            row.Hnorm = sd.H_norm;
            if (n == 2) {
                ConnectionCurvature cc = sigma_connection_curvature(fr, md);
                BracketContext cx = make_context(fr);
                BracketTensors bt = build_tensors(cx, nf);
                SurfaceKReport kr = surface_K(cx, md, cc, nf, bt);
                row.K_bracket = kr.K_S;
                row.K_oracle = kr.K_oracle;
            }
            row.ok = true;
        } catch (const DegeneratePointError& e) {
            row.reason = e.what();
        } catch (const ConfigError& e) {
            row.reason = e.what();
        } catch (const std::domain_error& e) {
            row.reason = e.what();
        }
        rows.push_back(std::move(row));
    }

    std::string text;
    if (format == "csv") {
        std::string header;
        for (int a = 0; a < n; ++a) header += "u" + std::to_string(a + 1) + ",";
        if (n == 2) header += "K_bracket,K_oracle,";
        header += "gamma,Hnorm,reason\n";
        text += header;
        for (const GridRow& row : rows) {
            std::string line;
            for (int a = 0; a < n; ++a) line += fmt(row.u[a]) + ",";
            if (row.ok) {
                if (n == 2) line += fmt(row.K_bracket) + "," + fmt(row.K_oracle) + ",";
                line += fmt(row.gamma) + "," + fmt(row.Hnorm) + ",";
            } else {
                line += std::string(n == 2 ? 4 : 2, ',');
            }
            line += csv_escape(row.reason);
            text += line + "\n";
        }
    } else {
        ojson doc;
        doc["schema_version"] = 1;
        doc["spec"] = {{"name", spec.name}, {"n", spec.n}, {"m", spec.m}, {"p", spec.p()}};
        doc["k"] = grid_k;
        doc["density"] = density_kind_name(spec.density);
        ojson arr = ojson::array();
        for (const GridRow& row : rows) {
            ojson rec;
            rec["u"] = row.u;
            if (row.ok) {
                if (n == 2) {
                    rec["K_bracket"] = row.K_bracket;
                    rec["K_oracle"] = row.K_oracle;
                }
                rec["gamma"] = row.gamma;
                rec["Hnorm"] = row.Hnorm;
            } else {
                rec["reason"] = row.reason;
            }
            arr.push_back(std::move(rec));
        }
        doc["rows"] = std::move(arr);
        text = doc.dump(2) + "\n";
    }
    emit(text, out_path, out);
    return kExitOk;
}

// ---------------------------------------------------------------------
// catalog

int cmd_catalog(const std::string& format, std::ostream& out) {
    if (format == "json") {
        ojson arr = ojson::array();
        for (const CatalogEntry& e : catalog_entries()) {
            ojson params = ojson::object();
            for (const auto& [key, value] : e.params) params[key] = value;
            arr.push_back({{"name", e.name},
                           {"n", e.n},
                           {"m", e.m},
                           {"params", std::move(params)},
                           {"summary", e.summary}});
        }
        out << arr.dump(2) << "\n";
        return kExitOk;
    }
    for (const CatalogEntry& e : catalog_entries()) {
        out << e.name << "  (n=" << e.n << ", m=" << e.m << ")";
        if (!e.params.empty()) {
            out << "  params:";
            for (const auto& [key, value] : e.params) out << " " << key << "=" << value;
        }
        out << "\n    " << e.summary << "\n";
    }
    return kExitOk;
}

}  // namespace

// =====================================================================

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Embedded-manifold geometry through multi-linear brackets"};
    app.name("nambugeo");
    app.require_subcommand(1);

    std::string embedding, point_text, density, ids_csv, out_path;
    std::string format_grid = "csv", format_catalog = "text";
    int grid_k = 4, random_count = 0;
    std::uint64_t seed = 42;
    double tol = 0;

    CLI::App* eval = app.add_subcommand("eval", "Evaluate quantities at one point");
    eval->add_option("embedding", embedding, "config path or catalog:name?k=v,...")
        ->required();
    eval->add_option("--point", point_text, "comma-separated chart coordinates")
        ->required();
    eval->add_option("--density", density, "density mode: sqrt_g | one | custom");
    eval->add_option("--out", out_path, "write JSON here instead of stdout");

    CLI::App* verify = app.add_subcommand("verify", "Run the identity-check suite");
    verify->add_option("embedding", embedding, "config path or catalog:name?k=v,...")
        ->required();
    CLI::Option* vgrid =
        verify->add_option("--grid", grid_k, "grid points per axis (default 4)");
    CLI::Option* vrandom =
        verify->add_option("--random", random_count, "number of random points");
    verify->add_option("--seed", seed, "seed for --random (default 42)");
    verify->add_option("--ids", ids_csv, "comma-separated check ids (default: all)");
    CLI::Option* vtol =
        verify->add_option("--tol", tol, "tolerance override applied to every check");
    verify->add_option("--out", out_path, "write the JSON report here");
    vgrid->excludes(vrandom);

    CLI::App* grid = app.add_subcommand("grid", "Export curvature columns over a grid");
    grid->add_option("embedding", embedding, "config path or catalog:name?k=v,...")
        ->required();
    grid->add_option("--grid", grid_k, "grid points per axis")
        ->required()
        ->check(CLI::Range(2, 1024));
    grid->add_option("--density", density, "density mode: sqrt_g | one | custom");
    grid->add_option("--format", format_grid, "csv | json (default csv)")
        ->check(CLI::IsMember({"csv", "json"}));
    grid->add_option("--out", out_path, "write here instead of stdout");

    CLI::App* cat = app.add_subcommand("catalog", "List built-in embeddings");
    cat->add_option("--format", format_catalog, "text | json (default text)")
        ->check(CLI::IsMember({"text", "json"}));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (eval->parsed())
            return cmd_eval(embedding, point_text, density, out_path, out);
        if (verify->parsed()) {
            if (vrandom->count() > 0 && random_count < 1)
                throw ConfigError("--random needs a positive count");
            return cmd_verify(embedding, grid_k, random_count, seed, vrandom->count() > 0,
                              ids_csv, tol, vtol->count() > 0, out_path, out, err);
        }
        if (grid->parsed())
            return cmd_grid(embedding, grid_k, density, format_grid, out_path, out);
        return cmd_catalog(format_catalog, out);
    } catch (const DegeneratePointError& e) {
        err << "degenerate point: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const std::domain_error& e) {
        err << "degenerate point: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace nambugeo
