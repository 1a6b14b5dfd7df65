#pragma once

// Command-line front end.  Subcommands:
//   verify     full verification report (text or JSON), exit 0 iff verified
//   classify   conic / spherical / proper / rectifying verdicts
//   construct  emit a rectifying immersion as re-parseable .imm source
//   sample     CSV of chart/ambient coordinates and residuals over the grid
//   frenet     curvature/torsion/position table for a space curve
// Exit codes: 0 ok/verified, 1 verification failure (or degenerate Frenet
// points), 2 invalid input or parameters, 3 numerical/regularity failure,
// 4 I/O failure.  Outputs are byte-deterministic for a given input and
// config, independent of --jobs.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rsm/errors.hpp"
#include "rsm/expr.hpp"
#include "rsm/geometry.hpp"
#include "rsm/grid.hpp"
#include "rsm/immersion.hpp"
#include "rsm/rectify.hpp"
#include "rsm/report.hpp"

namespace rsm::cli {

struct RunConfig {
    std::string command;          // verify | classify | construct | frenet | sample
    std::string input_path;       // .imm source file
    std::string builtin;          // NAME[:k=v,...]
    std::vector<int> grid_sizes;  // empty: 9 per dimension
    double tol_exact = 1e-8;
    double tol_third = 1e-7;
    std::string format = "text";  // text | json
    std::string out_path;         // empty: stdout
    int jobs = 1;
    // construct parameters
    double c = 1.0;
    std::string base = "circle";
    Interval t_range{0.2, 1.2};
};

namespace detail {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Split on `sep` at paren depth 0 only, so values like small_circle(0.5)
// survive inside comma-separated parameter lists.
inline std::vector<std::string> split_top_level(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    int depth = 0;
    for (char ch : s) {
        if (ch == '(' || ch == '[') ++depth;
        if (ch == ')' || ch == ']') --depth;
        if (ch == sep && depth == 0) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    parts.push_back(cur);
    return parts;
}

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    std::size_t e = s.find_last_not_of(" \t");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size())
        throw InvalidArgument(what + ": expected a number, got '" + text + "'");
    return v;
}

inline int parse_int(const std::string& text, const std::string& what) {
    const double v = parse_number(text, what);
    const int k = static_cast<int>(std::lround(v));
    if (static_cast<double>(k) != v)
        throw InvalidArgument(what + ": expected an integer, got '" + text + "'");
    return k;
}

// "name(a1,a2,...)" -> {name, numeric args}; bare "name" has no args.
inline std::pair<std::string, std::vector<double>> split_call(const std::string& text) {
    const std::string t = trim(text);
    const std::size_t open = t.find('(');
    if (open == std::string::npos) return {t, {}};
    if (t.back() != ')')
        throw InvalidArgument("malformed call '" + t + "': missing ')'");
    const std::string name = trim(t.substr(0, open));
    const std::string inner = t.substr(open + 1, t.size() - open - 2);
    std::vector<double> args;
    if (!trim(inner).empty())
        for (const std::string& part : split_top_level(inner, ','))
            args.push_back(parse_number(part, name + " argument"));
    return {name, args};
}

inline void need_args(const std::string& name, const std::vector<double>& args,
                      std::size_t count) {
    if (args.size() != count)
        throw InvalidArgument("base '" + name + "' takes " + std::to_string(count) +
                              " argument(s), got " + std::to_string(args.size()));
}

} // namespace detail

// Spherical base factors by name, for cone/rectifying builtins and construct.
inline SphericalFactor make_base(const std::string& text) {
    const auto [name, args] = detail::split_call(text);
    if (name == "circle") {
        detail::need_args(name, args, 0);
        return base_circle();
    }
    if (name == "ellipse") {
        detail::need_args(name, args, 2);
        return base_ellipse(args[0], args[1]);
    }
    if (name == "small_circle") {
        detail::need_args(name, args, 1);
        return base_small_circle(args[0]);
    }
    if (name == "sphere_ellipse") {
        detail::need_args(name, args, 3);
        return base_sphere_ellipse(args[0], args[1], args[2]);
    }
    if (name == "ellipse4") {
        detail::need_args(name, args, 4);
        return base_ellipse4(args[0], args[1], args[2], args[3]);
    }
    if (name == "torus_curve") {
        detail::need_args(name, args, 1);
        return base_torus_curve(detail::parse_int(dsl::format_double(args[0]), "torus_curve k"));
    }
    throw InvalidArgument("unknown base '" + name +
                          "'; available: circle, ellipse(a,b), small_circle(lat), "
                          "sphere_ellipse(a,b,h), ellipse4(a,b,h1,h2), torus_curve(k)");
}

// Unit-speed spherical curves for the curve constructor.
inline Immersion make_curve_base(const std::string& text) {
    const auto [name, args] = detail::split_call(text);
    if (name == "great_circle") {
        detail::need_args(name, args, 0);
        return curve_great_circle();
    }
    if (name == "small_circle") {
        detail::need_args(name, args, 1);
        return curve_small_circle(args[0]);
    }
    throw InvalidArgument("unknown curve base '" + name +
                          "'; available: great_circle, small_circle(lat)");
}

// Catalog immersions: NAME[:k=v,...].
inline Immersion make_builtin(const std::string& text) {
    const std::size_t colon = text.find(':');
    const std::string name = detail::trim(text.substr(0, colon));
    std::vector<std::pair<std::string, std::string>> kv;
    if (colon != std::string::npos)
        for (const std::string& part : detail::split_top_level(text.substr(colon + 1), ',')) {
            const std::size_t eq = part.find('=');
            if (eq == std::string::npos)
                throw InvalidArgument("builtin parameter '" + part + "' is not of the form k=v");
            kv.emplace_back(detail::trim(part.substr(0, eq)), detail::trim(part.substr(eq + 1)));
        }
    auto reject = [&](const std::string& key) {
        throw InvalidArgument("unknown parameter '" + key + "' for builtin '" + name + "'");
    };

    if (name == "helix") {
        double a = 3.0, b = 4.0;
        for (const auto& [k, v] : kv)
            k == "a"   ? void(a = detail::parse_number(v, "helix a"))
            : k == "b" ? void(b = detail::parse_number(v, "helix b"))
                       : reject(k);
        return helix(a, b);
    }
    if (name == "unit_sphere") {
        int n = 2, m = 3;
        for (const auto& [k, v] : kv)
            k == "n"   ? void(n = detail::parse_int(v, "unit_sphere n"))
            : k == "m" ? void(m = detail::parse_int(v, "unit_sphere m"))
                       : reject(k);
        return unit_sphere(n, m);
    }
    if (name == "clifford_torus") {
        if (!kv.empty()) reject(kv.front().first);
        return clifford_torus();
    }
    if (name == "graph") {
        std::string f = "s^2 - u2^2";
        for (const auto& [k, v] : kv) k == "f" ? void(f = v) : void(reject(k));
        return graph_surface(f);
    }
    if (name == "cone") {
        std::string base = "circle";
        Interval s_range{0.2, 2.2};
        for (const auto& [k, v] : kv)
            k == "base"   ? void(base = v)
            : k == "s_lo" ? void(s_range.lo = detail::parse_number(v, "cone s_lo"))
            : k == "s_hi" ? void(s_range.hi = detail::parse_number(v, "cone s_hi"))
                          : void(reject(k));
        return cone_over(make_base(base), s_range);
    }
    if (name == "rectifying") {
        double c = 1.0;
        std::string base = "circle";
        Interval t_range{0.2, 1.2};
        for (const auto& [k, v] : kv)
            k == "c"      ? void(c = detail::parse_number(v, "rectifying c"))
            : k == "base" ? void(base = v)
            : k == "t_lo" ? void(t_range.lo = detail::parse_number(v, "rectifying t_lo"))
            : k == "t_hi" ? void(t_range.hi = detail::parse_number(v, "rectifying t_hi"))
                          : void(reject(k));
        return construct_rectifying(c, make_base(base), t_range).total;
    }
    if (name == "rectifying_curve") {
        double c = 1.0;
        std::string base = "great_circle";
        Interval t_range{0.2, 1.2};
        for (const auto& [k, v] : kv)
            k == "c"      ? void(c = detail::parse_number(v, "rectifying_curve c"))
            : k == "base" ? void(base = v)
            : k == "t_lo" ? void(t_range.lo = detail::parse_number(v, "rectifying_curve t_lo"))
            : k == "t_hi" ? void(t_range.hi = detail::parse_number(v, "rectifying_curve t_hi"))
                          : void(reject(k));
        return construct_rectifying_curve(c, make_curve_base(base), t_range).total;
    }
    throw InvalidArgument("unknown builtin '" + name +
                          "'; available: helix, unit_sphere, clifford_torus, graph, cone, "
                          "rectifying, rectifying_curve");
}

namespace detail {

inline std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    if (!f && !f.eof()) throw IoError("failed while reading '" + path + "'");
    return ss.str();
}

inline std::string path_stem(const std::string& path) {
    const std::size_t slash = path.find_last_of("/\\");
    std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
    const std::size_t dot = name.find_last_of('.');
    if (dot != std::string::npos && dot > 0) name = name.substr(0, dot);
    return name;
}

inline Immersion resolve_input(const RunConfig& cfg) {
    if (!cfg.builtin.empty() && !cfg.input_path.empty())
        throw InvalidArgument("provide either a .imm file or --builtin, not both");
    if (!cfg.builtin.empty()) return make_builtin(cfg.builtin);
    if (!cfg.input_path.empty())
        return from_spec(dsl::parse_immersion(read_text_file(cfg.input_path)),
                         path_stem(cfg.input_path));
    throw InvalidArgument("no input: provide a .imm file or --builtin NAME");
}

inline void write_text_file(const std::string& path, const std::string& doc) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << doc;
    f.flush();
    if (!f) throw IoError("failed while writing '" + path + "'");
}

inline void deliver(const RunConfig& cfg, const std::string& doc, std::ostream& out) {
    if (cfg.out_path.empty())
        out << doc;
    else
        write_text_file(cfg.out_path, doc);
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    q += '"';
    return q;
}

inline ReportOptions report_options(const RunConfig& cfg) {
    ReportOptions opt;
    opt.grid_sizes = cfg.grid_sizes;
    opt.tol_exact = cfg.tol_exact;
    opt.tol_third = cfg.tol_third;
    opt.jobs = cfg.jobs;
    return opt;
}

} // namespace detail

inline int cmd_verify(const RunConfig& cfg, std::ostream& out) {
    const Immersion imm = detail::resolve_input(cfg);
    const VerificationReport rep = rectifying_property_report(imm, detail::report_options(cfg));
    detail::deliver(cfg, cfg.format == "json" ? rep.to_json() : rep.to_text(), out);
    return rep.verified() ? 0 : 1;
}

inline int cmd_classify(const RunConfig& cfg, std::ostream& out) {
    const Immersion imm = detail::resolve_input(cfg);
    const Classification c = classify(imm, detail::report_options(cfg));
    std::string doc;
    if (cfg.format == "json") {
        using rsm::detail::num17;
        doc += "{\n";
        doc += "  \"label\": \"" + rsm::detail::json_escape(imm.label()) + "\",\n";
        doc += "  \"classification\": \"" + rsm::detail::json_escape(c.label) + "\",\n";
        doc += std::string("  \"conic\": ") + (c.conic ? "true" : "false") + ",\n";
        doc += std::string("  \"spherical\": ") + (c.spherical ? "true" : "false") + ",\n";
        doc += std::string("  \"proper\": ") + (c.proper ? "true" : "false") + ",\n";
        doc += std::string("  \"rectifying\": ") + (c.rectifying ? "true" : "false") + ",\n";
        doc += "  \"conic_deviation\": " + num17(c.conic_deviation) + ",\n";
        doc += "  \"spherical_deviation\": " + num17(c.spherical_deviation) + ",\n";
        doc += "  \"properness_margin\": " + num17(c.properness_margin) + ",\n";
        doc += "  \"max_rectifying_residual\": " + num17(c.max_rectifying_residual) + "\n";
        doc += "}\n";
    } else {
        using rsm::detail::num3;
        doc += "immersion: " + imm.label() + "\n";
        doc += "classification: " + c.label + "\n";
        doc += std::string("conic: ") + (c.conic ? "yes" : "no") + " (deviation " +
               num3(c.conic_deviation) + ")\n";
        doc += std::string("spherical: ") + (c.spherical ? "yes" : "no") + " (deviation " +
               num3(c.spherical_deviation) + ")\n";
        doc += std::string("proper: ") + (c.proper ? "yes" : "no") + " (margin " +
               num3(c.properness_margin) + ")\n";
        doc += std::string("rectifying: ") + (c.rectifying ? "yes" : "no") +
               " (max residual " + num3(c.max_rectifying_residual) + ")\n";
    }
    detail::deliver(cfg, doc, out);
    return 0;
}

namespace detail {

// Textual components of the named base, in the chart variable u2, matching
// the numeric factories term for term.
inline std::vector<std::string> base_component_text(const std::string& text) {
    const auto [name, args] = split_call(text);
    const auto fd = [](double v) { return dsl::format_double(v); };
    if (name == "circle") return {"cos(u2)", "sin(u2)"};
    if (name == "ellipse") {
        const std::string q =
            "sqrt((" + fd(args[0]) + "*cos(u2))^2 + (" + fd(args[1]) + "*sin(u2))^2)";
        return {fd(args[0]) + "*cos(u2) / " + q, fd(args[1]) + "*sin(u2) / " + q};
    }
    if (name == "small_circle") {
        const double r = std::cos(args[0]), h = std::sin(args[0]);
        return {fd(r) + "*cos(u2)", fd(r) + "*sin(u2)", fd(h)};
    }
    if (name == "sphere_ellipse") {
        const std::string q = "sqrt((" + fd(args[0]) + "*cos(u2))^2 + (" + fd(args[1]) +
                              "*sin(u2))^2 + " + fd(args[2] * args[2]) + ")";
        return {fd(args[0]) + "*cos(u2) / " + q, fd(args[1]) + "*sin(u2) / " + q,
                fd(args[2]) + " / " + q};
    }
    if (name == "ellipse4") {
        const std::string q = "sqrt((" + fd(args[0]) + "*cos(u2))^2 + (" + fd(args[1]) +
                              "*sin(u2))^2 + (" + fd(args[2]) + "*cos(2*u2))^2 + " +
                              fd(args[3] * args[3]) + ")";
        return {fd(args[0]) + "*cos(u2) / " + q, fd(args[1]) + "*sin(u2) / " + q,
                fd(args[2]) + "*cos(2*u2) / " + q, fd(args[3]) + " / " + q};
    }
    if (name == "torus_curve") {
        const std::string r = fd(1.0 / std::sqrt(2.0));
        const std::string k = fd(args[0]);
        return {r + "*cos(u2)", r + "*sin(u2)", r + "*cos(" + k + "*u2)",
                r + "*sin(" + k + "*u2)"};
    }
    throw InvalidArgument("unknown base '" + name + "'");
}

} // namespace detail

// Emit .imm source for x(s, u2) = sqrt(s^2 + c^2) * (cos t, sin t * Z(u2)),
// t = atan(s/c).  The text re-parses to the same immersion the numeric
// constructor builds.
inline std::string construct_imm_text(double c, const std::string& base, Interval t_range) {
    rsm::detail::check_construction_params(c, t_range);
    const SphericalFactor factor = make_base(base);  // validates the base choice
    const std::vector<std::string> z = detail::base_component_text(base);
    const Interval u_range = factor.immersion().domain().front();
    const Interval s_range{c * std::tan(t_range.lo), c * std::tan(t_range.hi)};
    const auto fd = [](double v) { return dsl::format_double(v); };

    const std::string radius = "sqrt(s^2 + " + fd(c * c) + ")";
    const std::string cos_t = "cos(atan(s / " + fd(c) + "))";
    const std::string sin_t = "sin(atan(s / " + fd(c) + "))";
    std::string doc = "# rectifying immersion over base '" + base + "', c = " + fd(c) + ":\n";
    doc += "#   x(s, u2) = sqrt(s^2 + c^2) * (cos(t), sin(t) * Z(u2)),  t = atan(s/c)\n";
    doc += "dim 2 -> " + std::to_string(1 + z.size()) + "\n";
    doc += "chart arclength\n";
    doc += "x = [" + radius + " * " + cos_t;
    for (const std::string& za : z) doc += ",\n     " + radius + " * " + sin_t + " * (" + za + ")";
    doc += "]\n";
    doc += "s in [" + fd(s_range.lo) + ", " + fd(s_range.hi) + "]\n";
    doc += "u2 in [" + fd(u_range.lo) + ", " + fd(u_range.hi) + "]\n";
    return doc;
}

inline int cmd_construct(const RunConfig& cfg, std::ostream& out) {
    const std::string doc = construct_imm_text(cfg.c, cfg.base, cfg.t_range);
    dsl::parse_immersion(doc);  // guarantee the emitted source is valid
    detail::deliver(cfg, doc, out);
    return 0;
}

inline int cmd_sample(const RunConfig& cfg, std::ostream& out) {
    const Immersion imm = detail::resolve_input(cfg);
    const Grid grid = Grid::regular(imm.domain(), cfg.grid_sizes);
    const int n = imm.chart_dim(), m = imm.ambient_dim();

    struct Row {
        std::vector<double> p;
        Eigen::VectorXd x;
        double rho, nu, rect, conc;
    };
    std::vector<Row> rows(static_cast<std::size_t>(grid.total()));
    parallel_for_index(grid.total(), cfg.jobs, [&](int i) {
        const std::vector<double> p = grid.point(i);
        require_regular(imm, p);
        const rsm::detail::FieldJets f = rsm::detail::field_jets(imm, p, 2);
        const GeometrySnapshot s = rsm::detail::build_snapshot(f, p);
        const PositionSplit sp = position_split(s);
        const double conc =
            rsm::detail::concurrency_residual_from(f, rsm::detail::radial_jets(f));
        rows[static_cast<std::size_t>(i)] = {p, s.x, sp.rho, sp.nu, rectifying_residual(s), conc};
    });

    std::string doc;
    for (int i = 0; i < n; ++i) doc += detail::csv_field(imm.var_names()[static_cast<std::size_t>(i)]) + ",";
    for (int a = 0; a < m; ++a) doc += "x" + std::to_string(a + 1) + ",";
    doc += "rho,nu,rectifying_residual,concurrency_residual\n";
    using rsm::detail::num17;
    for (const Row& r : rows) {
        for (double v : r.p) doc += num17(v) + ",";
        for (int a = 0; a < m; ++a) doc += num17(r.x(a)) + ",";
        doc += num17(r.rho) + "," + num17(r.nu) + "," + num17(r.rect) + "," + num17(r.conc) + "\n";
    }
    detail::deliver(cfg, doc, out);
    return 0;
}

inline int cmd_frenet(const RunConfig& cfg, std::ostream& out) {
    const Immersion imm = detail::resolve_input(cfg);
    if (imm.chart_dim() != 1 || imm.ambient_dim() != 3)
        throw InvalidArgument("frenet: needs a curve in 3-space (chart dim 1, ambient dim 3)");
    const Grid grid = Grid::regular(imm.domain(), cfg.grid_sizes);

    struct Row {
        double s, kappa, tau, lambda, mu, residual;
    };
    std::vector<Row> rows;
    std::vector<double> degenerate;
    bool all_rectifying = true;
    for (int i = 0; i < grid.total(); ++i) {
        const double s = grid.point(i)[0];
        try {
            const FrenetFrame f = frenet(imm, s);
            const CurvePositionData d = rectifying_curve_residual(imm, s);
            rows.push_back({s, f.kappa, f.tau, d.lambda, d.mu, d.residual});
            all_rectifying = all_rectifying && d.residual <= cfg.tol_exact;
        } catch (const FrenetUndefinedError&) {
            degenerate.push_back(s);
        }
    }
    const bool verdict = all_rectifying && degenerate.empty();

    std::string doc;
    if (cfg.format == "json") {
        using rsm::detail::num17;
        doc += "{\n  \"label\": \"" + rsm::detail::json_escape(imm.label()) + "\",\n";
        doc += "  \"rows\": [\n";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const Row& r = rows[i];
            doc += "    {\"s\": " + num17(r.s) + ", \"kappa\": " + num17(r.kappa) +
                   ", \"tau\": " + num17(r.tau) + ", \"lambda\": " + num17(r.lambda) +
                   ", \"mu\": " + num17(r.mu) + ", \"residual\": " + num17(r.residual) +
                   (i + 1 < rows.size() ? "},\n" : "}\n");
        }
        doc += "  ],\n";
        doc += "  \"degenerate_points\": [";
        for (std::size_t i = 0; i < degenerate.size(); ++i)
            doc += (i ? ", " : "") + num17(degenerate[i]);
        doc += "],\n";
        doc += std::string("  \"rectifying_curve\": ") + (verdict ? "true" : "false") + "\n}\n";
    } else {
        using rsm::detail::num3;
        const auto cell = [](const std::string& v) {
            std::string s = v;
            while (s.size() < 12) s.insert(s.begin(), ' ');
            return s;
        };
        doc += "curve: " + imm.label() + "\n";
        doc += cell("s") + cell("kappa") + cell("tau") + cell("lambda") + cell("mu") +
               cell("residual") + "\n";
        for (const Row& r : rows)
            doc += cell(num3(r.s)) + cell(num3(r.kappa)) + cell(num3(r.tau)) +
                   cell(num3(r.lambda)) + cell(num3(r.mu)) + cell(num3(r.residual)) + "\n";
        for (double s : degenerate)
            doc += "degenerate: s = " + num3(s) + " (Frenet frame undefined)\n";
        doc += std::string("rectifying curve: ") + (verdict ? "yes" : "no") +
               " on sampled grid\n";
    }
    detail::deliver(cfg, doc, out);
    return degenerate.empty() ? 0 : 1;
}

inline std::string usage() {
    return "usage: rsm <command> [options]\n"
           "\n"
           "commands:\n"
           "  verify    [input.imm | --builtin NAME]  full verification report; exit 0 iff verified\n"
           "  classify  [input.imm | --builtin NAME]  conic/spherical/proper/rectifying verdicts\n"
           "  construct --c C --base BASE [--t-range LO,HI] [--out FILE]  emit .imm source\n"
           "  sample    [input.imm | --builtin NAME]  CSV of positions and residuals on the grid\n"
           "  frenet    [input.imm | --builtin NAME]  curvature/torsion table for a space curve\n"
           "\n"
           "options:\n"
           "  --builtin NAME[:k=v,...]  catalog immersion: helix, unit_sphere, clifford_torus,\n"
           "                            graph, cone, rectifying, rectifying_curve\n"
           "  --grid N1[,N2,...]        grid sizes per chart dimension (default 9)\n"
           "  --tol-exact X             tolerance for exact identities (default 1e-8)\n"
           "  --tol-third X             tolerance for third-order identities (default 1e-7)\n"
           "  --format text|json        output format (default text)\n"
           "  --out PATH                write output to PATH instead of stdout\n"
           "  --jobs N                  worker threads for grid evaluation (default 1)\n"
           "\n"
           "bases: circle, ellipse(a,b), small_circle(lat), sphere_ellipse(a,b,h),\n"
           "       ellipse4(a,b,h1,h2), torus_curve(k); curve bases: great_circle,\n"
           "       small_circle(lat)\n"
           "\n"
           "exit codes: 0 ok/verified, 1 verification failure, 2 invalid input,\n"
           "            3 numerical failure, 4 I/O failure\n";
}

inline RunConfig parse_args(const std::vector<std::string>& args) {
    if (args.empty()) throw InvalidArgument("no command given");
    RunConfig cfg;
    cfg.command = args[0];
    if (cfg.command != "verify" && cfg.command != "classify" && cfg.command != "construct" &&
        cfg.command != "frenet" && cfg.command != "sample")
        throw InvalidArgument("unknown command '" + cfg.command + "'");

    const auto value = [&](std::size_t& i) -> const std::string& {
        if (i + 1 >= args.size())
            throw InvalidArgument("flag " + args[i] + " needs a value");
        return args[++i];
    };
    for (std::size_t i = 1; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a == "--builtin") {
            cfg.builtin = value(i);
        } else if (a == "--grid") {
            cfg.grid_sizes.clear();
            for (const std::string& part : detail::split_top_level(value(i), ','))
                cfg.grid_sizes.push_back(detail::parse_int(part, "--grid"));
            for (int g : cfg.grid_sizes)
                if (g < 2)
                    throw InvalidArgument("--grid: sizes must be at least 2, got " +
                                          std::to_string(g));
        } else if (a == "--tol-exact") {
            cfg.tol_exact = detail::parse_number(value(i), "--tol-exact");
            if (!(cfg.tol_exact > 0.0)) throw InvalidArgument("--tol-exact must be positive");
        } else if (a == "--tol-third") {
            cfg.tol_third = detail::parse_number(value(i), "--tol-third");
            if (!(cfg.tol_third > 0.0)) throw InvalidArgument("--tol-third must be positive");
        } else if (a == "--format") {
            cfg.format = value(i);
            if (cfg.format != "text" && cfg.format != "json")
                throw InvalidArgument("--format must be 'text' or 'json', got '" + cfg.format +
                                      "'");
        } else if (a == "--out") {
            cfg.out_path = value(i);
        } else if (a == "--jobs") {
            cfg.jobs = detail::parse_int(value(i), "--jobs");
            if (cfg.jobs < 1) throw InvalidArgument("--jobs must be at least 1");
        } else if (a == "--c") {
            cfg.c = detail::parse_number(value(i), "--c");
        } else if (a == "--base") {
            cfg.base = value(i);
        } else if (a == "--t-range") {
            const std::vector<std::string> parts = detail::split_top_level(value(i), ',');
            if (parts.size() != 2)
                throw InvalidArgument("--t-range expects LO,HI");
            cfg.t_range = {detail::parse_number(parts[0], "--t-range"),
                           detail::parse_number(parts[1], "--t-range")};
        } else if (a.rfind("--", 0) == 0) {
            throw InvalidArgument("unknown flag '" + a + "'");
        } else if (cfg.input_path.empty()) {
            cfg.input_path = a;
        } else {
            throw InvalidArgument("unexpected extra argument '" + a + "'");
        }
    }
    return cfg;
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = parse_args(args);
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << "\n\n" << usage();
        return 2;
    }
    try {
        if (cfg.command == "verify") return cmd_verify(cfg, out);
        if (cfg.command == "classify") return cmd_classify(cfg, out);
        if (cfg.command == "construct") return cmd_construct(cfg, out);
        if (cfg.command == "sample") return cmd_sample(cfg, out);
        return cmd_frenet(cfg, out);
    } catch (const dsl::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const detail::IoError& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {  // regularity and numerical failures
        err << "error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace rsm::cli
