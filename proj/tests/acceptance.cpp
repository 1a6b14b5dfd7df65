// Acceptance gate: end-to-end behavioral criteria for the engine and the CLI.
// Prints one [PASS]/[FAIL] line per criterion and exits nonzero if any fail.
// Tolerances are pinned here on purpose; a red line means the build does not
// meet the bar, not that the bar should move.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsm/cli.hpp"
#include "rsm/expr.hpp"
#include "rsm/geometry.hpp"
#include "rsm/grid.hpp"
#include "rsm/immersion.hpp"
#include "rsm/rectify.hpp"
#include "rsm/report.hpp"

namespace {

constexpr double kTolCurvature = 1e-7;   // two-route curvature agreement, nabla-h symmetry
constexpr double kTolExact = 1e-8;       // identities that hold exactly in the smooth model
constexpr double kTolThird = 1e-7;       // identities consuming third derivatives
constexpr double kTolSeparation = 1e-3;  // residual floor demanded of negative examples
constexpr double kSeparationFraction = 0.9;
constexpr double kTolClass = 1e-10;      // conic/spherical degeneracy threshold
constexpr double kTolFrenet = 1e-10;     // closed-form curvature/torsion agreement
constexpr double kFdStep = 1e-4;         // central finite-difference step
constexpr double kTolFd = 1e-5;          // |jet - fd| <= kTolFd * max(1, |jet|)

int g_failures = 0;

void report_line(int index, const std::string& name, bool ok, const std::string& detail) {
    std::printf("[%s] %d. %s%s%s\n", ok ? "PASS" : "FAIL", index, name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!ok) ++g_failures;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

rsm::Immersion parse_imm(const std::string& text, const std::string& label) {
    return rsm::from_spec(rsm::dsl::parse_immersion(text), label);
}

double spectral_norm(const Eigen::MatrixXd& A) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// 1. Curvature identities on a corpus of classical immersions.

bool criterion_curvature(std::string& detail) {
    struct Item {
        std::string name;
        rsm::Immersion imm;
    };
    const std::vector<Item> corpus = {
        {"plane", parse_imm("dim 2 -> 3\n"
                            "x = [s, u2, 0]\n"
                            "s in [-2, 2]\nu2 in [-2, 2]\n",
                            "plane")},
        {"sphere", rsm::unit_sphere()},
        {"cylinder", parse_imm("dim 2 -> 3\n"
                               "x = [cos(u2), sin(u2), s]\n"
                               "s in [-2, 2]\nu2 in [-3.1, 3.1]\n",
                               "cylinder")},
        {"torus", parse_imm("dim 2 -> 3\n"
                            "x = [(2 + cos(u2))*cos(s), (2 + cos(u2))*sin(s), sin(u2)]\n"
                            "s in [-3.1, 3.1]\nu2 in [-3.1, 3.1]\n",
                            "torus")},
        {"graph", rsm::graph_surface()},
        {"helix", rsm::helix()},
        {"cone", rsm::cone_over(rsm::base_small_circle(0.5))},
    };
    double worst_gauss = 0.0, worst_codazzi = 0.0;
    std::string worst_name = "-";
    for (const Item& item : corpus) {
        const rsm::Grid grid = rsm::Grid::regular(item.imm.domain(), {});
        for (int i = 0; i < grid.total(); ++i) {
            const std::vector<double> p = grid.point(i);
            const double gr = rsm::curvature(item.imm, p).gauss_residual();
            const double cr = rsm::codazzi_residual(item.imm, p);
            if (gr > worst_gauss) {
                worst_gauss = gr;
                worst_name = item.name;
            }
            worst_codazzi = std::max(worst_codazzi, cr);
        }
    }
    detail = "worst two-route curvature gap " + num(worst_gauss) + " (" + worst_name +
             "), worst symmetry defect " + num(worst_codazzi) + ", bound " + num(kTolCurvature);
    return worst_gauss <= kTolCurvature && worst_codazzi <= kTolCurvature;
}

// ---------------------------------------------------------------------------
// 2. Randomized constructions verify end to end and carry the warped metrics.

struct BuiltCase {
    std::string builtin;
    rsm::RectifyingConstruction con;
};

std::vector<BuiltCase> build_random_cases() {
    std::mt19937 rng(20260819u);
    auto unif = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    const auto fd = [](double v) { return rsm::dsl::format_double(v); };
    std::vector<BuiltCase> cases;
    for (int it = 0; it < 10; ++it) {
        const double c = unif(0.3, 3.0);
        const double t_lo = unif(0.15, 0.4);
        const double t_hi = unif(0.8, 1.25);
        std::string base;
        switch (it % 4) {
            case 0: base = "small_circle(" + fd(unif(-0.9, 0.9)) + ")"; break;
            case 1:
                base = "sphere_ellipse(" + fd(unif(0.8, 1.5)) + "," + fd(unif(0.8, 1.5)) + "," +
                       fd(unif(0.3, 1.0)) + ")";
                break;
            case 2:
                base = "ellipse4(" + fd(unif(0.8, 1.4)) + "," + fd(unif(0.8, 1.4)) + "," +
                       fd(unif(0.1, 0.5)) + "," + fd(unif(0.2, 0.8)) + ")";
                break;
            default: base = "torus_curve(" + std::to_string(1 + it % 3) + ")"; break;
        }
        const std::string builtin =
            "rectifying:c=" + fd(c) + ",base=" + base + ",t_lo=" + fd(t_lo) + ",t_hi=" + fd(t_hi);
        cases.push_back(
            {builtin, rsm::construct_rectifying(c, rsm::cli::make_base(base), {t_lo, t_hi})});
    }
    return cases;
}

bool criterion_constructions(const std::vector<BuiltCase>& cases, std::string& detail) {
    int verified = 0;
    double worst_rect = 0.0, worst_total_metric = 0.0, worst_factor_metric = 0.0;
    for (const BuiltCase& bc : cases) {
        std::ostringstream out, err;
        const int code = rsm::cli::run_cli({"verify", "--builtin", bc.builtin, "--grid", "5,5"},
                                           out, err);
        if (code == 0) ++verified;

        const double c = bc.con.c;
        const rsm::Grid grid = rsm::Grid::regular(bc.con.total.domain(), {5, 5});
        for (int i = 0; i < grid.total(); ++i) {
            const std::vector<double> p = grid.point(i);
            const double s = p[0];
            const rsm::GeometrySnapshot st = rsm::snapshot(bc.con.total, p, 2);
            worst_rect = std::max(worst_rect, rsm::rectifying_residual(st));

            const double u[] = {p[1]};
            const double gF = rsm::snapshot(bc.con.base.immersion(), u, 2).g(0, 0);

            // Induced metric of the total immersion: ds^2 + s^2 gF du^2.
            Eigen::Matrix2d target_total;
            target_total << 1.0, 0.0, 0.0, s * s * gF;
            worst_total_metric =
                std::max(worst_total_metric, (st.g - target_total).cwiseAbs().maxCoeff());

            // Pullback metric of the spherical factor in the (s, u) chart:
            // c^2/(s^2+c^2)^2 ds^2 + s^2/(s^2+c^2) gF du^2.
            const double q = s * s + c * c;
            const rsm::GeometrySnapshot sy = rsm::snapshot(bc.con.y_pullback, p, 2);
            Eigen::Matrix2d target_factor;
            target_factor << c * c / (q * q), 0.0, 0.0, s * s / q * gF;
            worst_factor_metric =
                std::max(worst_factor_metric, (sy.g - target_factor).cwiseAbs().maxCoeff());
        }
    }
    detail = std::to_string(verified) + "/10 verify with exit 0, worst residual " +
             num(worst_rect) + ", worst metric gaps " + num(worst_total_metric) + " / " +
             num(worst_factor_metric) + ", bound " + num(kTolExact);
    return verified == 10 && worst_rect <= kTolExact && worst_total_metric <= kTolExact &&
           worst_factor_metric <= kTolExact;
}

// ---------------------------------------------------------------------------
// 3. The two position residuals vanish together, and negatives separate.

bool criterion_equivalence(const std::vector<BuiltCase>& cases, std::string& detail) {
    double worst_conc = 0.0;
    int violations = 0;

    // The equivalence is a statement about whole immersions: the position
    // residual vanishes grid-wide exactly when the concurrency residual does.
    auto violates = [&](double max_rect, double max_conc) {
        return (max_rect <= kTolExact) != (max_conc <= kTolExact);
    };

    for (const BuiltCase& bc : cases) {
        const rsm::Grid grid = rsm::Grid::regular(bc.con.total.domain(), {5, 5});
        double max_rect = 0.0, max_conc = 0.0;
        for (int i = 0; i < grid.total(); ++i) {
            const std::vector<double> p = grid.point(i);
            max_conc = std::max(max_conc, rsm::concurrency_residual(bc.con.total, p));
            max_rect = std::max(max_rect, rsm::rectifying_residual(rsm::snapshot(bc.con.total, p, 2)));
        }
        worst_conc = std::max(worst_conc, max_conc);
        if (violates(max_rect, max_conc) || max_rect > kTolExact) ++violations;
    }

    // Negatives are sampled on generic boxes: both residuals vanish on thin
    // loci (the torus circle 1 + 2cos v = 0, the saddle diagonals u = +-s),
    // and a grid row sitting exactly on such a locus says nothing about the
    // immersion being rectifying.
    const std::vector<rsm::Immersion> negatives = {
        rsm::unit_sphere(),
        parse_imm("dim 2 -> 3\n"
                  "x = [(2 + cos(u2))*cos(s), (2 + cos(u2))*sin(s), sin(u2)]\n"
                  "s in [-3, 3]\nu2 in [-3, 3]\n",
                  "torus"),
        parse_imm("dim 2 -> 3\n"
                  "x = [s, u2, s^2 - u2^2]\n"
                  "s in [0.25, 1.45]\nu2 in [-0.85, 0.55]\n",
                  "graph"),
    };
    bool separated = true;
    double worst_fraction = 1.0;
    for (const rsm::Immersion& imm : negatives) {
        const rsm::Grid grid = rsm::Grid::regular(imm.domain(), {});
        int big = 0;
        double max_rect = 0.0, max_conc = 0.0;
        for (int i = 0; i < grid.total(); ++i) {
            const std::vector<double> p = grid.point(i);
            const double rect = rsm::rectifying_residual(rsm::snapshot(imm, p, 2));
            const double conc = rsm::concurrency_residual(imm, p);
            if (rect >= kTolSeparation && conc >= kTolSeparation) ++big;
            max_rect = std::max(max_rect, rect);
            max_conc = std::max(max_conc, conc);
        }
        if (violates(max_rect, max_conc)) ++violations;
        const double fraction = static_cast<double>(big) / grid.total();
        worst_fraction = std::min(worst_fraction, fraction);
        separated = separated && fraction >= kSeparationFraction;
    }
    detail = "worst positive concurrency residual " + num(worst_conc) + " (bound " +
             num(kTolExact) + "), worst negative separation fraction " + num(worst_fraction) +
             ", " + std::to_string(violations) + " equivalence violations";
    return worst_conc <= kTolExact && separated && violations == 0;
}

// ---------------------------------------------------------------------------
// 4. The full radial property battery passes on constructed examples.

bool criterion_property_battery(std::string& detail) {
    const std::vector<rsm::RectifyingConstruction> cons = {
        rsm::construct_rectifying(0.7, rsm::base_small_circle(0.4)),
        rsm::construct_rectifying(1.5, rsm::base_sphere_ellipse(1.2, 0.9, 0.6)),
        rsm::construct_rectifying(2.0, rsm::base_torus_curve(2)),
    };
    const std::vector<std::pair<std::string, double>> required = {
        {"normal_length_constancy", kTolExact},
        {"normal_position_shape_operator", kTolExact},
        {"radial_curvature_flatness", kTolThird},
        {"radial_sectional_curvature", kTolThird},
        {"tangential_length_derivative", kTolExact},
        {"radial_growth_identity", kTolExact},
        {"squared_norm_quadratic_fit", kTolExact},
        {"quadratic_fit_leading_coefficient", kTolExact},
        {"radial_frame_connection", kTolThird},
    };
    bool ok = true;
    double worst = 0.0;
    std::string worst_entry = "-";
    for (const rsm::RectifyingConstruction& con : cons) {
        rsm::ReportOptions opt;
        opt.grid_sizes = {7, 7};
        const rsm::VerificationReport rep = rsm::rectifying_property_report(con.total, opt);
        ok = ok && rep.verified();
        for (const auto& [name, tol] : required) {
            const rsm::CheckEntry* e = rep.find(name);
            if (e == nullptr || e->verdict != "pass" || e->value > tol) {
                ok = false;
                worst_entry = name + " on " + con.total.label();
            }
            if (e != nullptr && e->verdict == "pass" && e->value > worst) {
                worst = e->value;
                if (ok) worst_entry = name;
            }
        }
    }
    detail = "3 constructions, worst passing entry " + worst_entry + " = " + num(worst);
    return ok;
}

// ---------------------------------------------------------------------------
// 5. Space-curve invariants: closed forms, rectifying planes, degeneration.

bool criterion_curves(std::string& detail) {
    bool ok = true;
    double worst_frenet = 0.0;
    for (double s : {0.3, 1.1, 2.9, 5.2}) {
        const rsm::FrenetFrame f = rsm::frenet(rsm::helix(), s);
        worst_frenet = std::max({worst_frenet, std::abs(f.kappa - 0.12), std::abs(f.tau - 0.16)});
    }
    ok = ok && worst_frenet <= kTolFrenet;

    const rsm::Immersion curve =
        rsm::construct_rectifying_curve(1.0, rsm::curve_small_circle(0.9)).total;
    double worst_plane = 0.0;
    const rsm::Grid grid = rsm::Grid::regular(curve.domain(), {9});
    for (int i = 0; i < grid.total(); ++i) {
        const double s = grid.point(i)[0];
        const rsm::FrenetFrame f = rsm::frenet(curve, s);
        const Eigen::VectorXd x = curve.position(grid.point(i));
        worst_plane = std::max(worst_plane, std::abs(x.dot(f.normal)));
    }
    ok = ok && worst_plane <= kTolExact;

    // A great-circle base collapses the construction to a straight line:
    // curvature below threshold, Frenet frame undefined at every sample.
    const rsm::Immersion line =
        rsm::construct_rectifying_curve(1.0, rsm::curve_great_circle()).total;
    int undefined = 0;
    double worst_kappa = 0.0;
    for (double s : {0.25, 0.8, 1.3, 1.9, 2.5}) {
        const double p[] = {s};
        const auto jets = line.eval(p, 2);
        Eigen::Vector3d d1, d2;
        for (int a = 0; a < 3; ++a) {
            d1(a) = jets[static_cast<std::size_t>(a)].d1(0);
            d2(a) = jets[static_cast<std::size_t>(a)].d2(0, 0);
        }
        worst_kappa = std::max(worst_kappa, d1.cross(d2).norm() / std::pow(d1.norm(), 3));
        try {
            rsm::frenet(line, s);
        } catch (const rsm::FrenetUndefinedError&) {
            ++undefined;
        }
    }
    ok = ok && undefined == 5 && worst_kappa <= kTolFrenet;

    detail = "closed-form gap " + num(worst_frenet) + ", worst plane offset " + num(worst_plane) +
             ", degenerate line kappa " + num(worst_kappa) + " undefined at " +
             std::to_string(undefined) + "/5 samples";
    return ok;
}

// ---------------------------------------------------------------------------
// 6. Classification separates conic, spherical, and proper examples.

bool criterion_classification(std::string& detail) {
    bool ok = true;

    const rsm::Immersion cone = rsm::cone_over(rsm::base_small_circle(0.5));
    double worst_nu = 0.0;
    {
        const rsm::Grid grid = rsm::Grid::regular(cone.domain(), {7, 7});
        for (int i = 0; i < grid.total(); ++i) {
            const rsm::GeometrySnapshot s = rsm::snapshot(cone, grid.point(i), 2);
            const rsm::PositionSplit split = rsm::position_split(s);
            worst_nu = std::max(worst_nu, split.nu / (1.0 + s.x.norm()));
        }
        rsm::ReportOptions opt;
        opt.grid_sizes = {7, 7};
        const rsm::Classification c = rsm::classify(cone, opt);
        ok = ok && worst_nu <= kTolClass && c.conic && !c.proper;
    }

    const rsm::Immersion sphere = rsm::unit_sphere();
    double worst_rho = 0.0;
    {
        const rsm::Grid grid = rsm::Grid::regular(sphere.domain(), {7, 7});
        for (int i = 0; i < grid.total(); ++i) {
            const rsm::GeometrySnapshot s = rsm::snapshot(sphere, grid.point(i), 2);
            const rsm::PositionSplit split = rsm::position_split(s);
            worst_rho = std::max(worst_rho, split.rho / (1.0 + s.x.norm()));
        }
        rsm::ReportOptions opt;
        opt.grid_sizes = {7, 7};
        const rsm::Classification c = rsm::classify(sphere, opt);
        ok = ok && worst_rho <= kTolClass && c.spherical && !c.proper;
    }

    const rsm::Immersion built =
        rsm::construct_rectifying(1.0, rsm::base_small_circle(0.5)).total;
    bool codim_ok = true;
    {
        rsm::ReportOptions opt;
        opt.grid_sizes = {7, 7};
        const rsm::Classification c = rsm::classify(built, opt);
        ok = ok && c.proper && c.rectifying && !c.conic && !c.spherical;
        const rsm::Grid grid = rsm::Grid::regular(built.domain(), {7, 7});
        for (int i = 0; i < grid.total(); ++i) {
            const rsm::GeometrySnapshot s = rsm::snapshot(built, grid.point(i), 2);
            codim_ok = codim_ok && built.ambient_dim() > built.chart_dim() +
                                                             rsm::first_normal_space(s).dim;
        }
        ok = ok && codim_ok;
    }
    detail = "cone normal part " + num(worst_nu) + ", sphere tangential part " + num(worst_rho) +
             " (bound " + num(kTolClass) + "), ambient-dimension margin " +
             (codim_ok ? "holds" : "violated");
    return ok;
}

// ---------------------------------------------------------------------------
// 7. Jet derivatives of random expressions against central finite differences.

using LdPoint = std::array<long double, 2>;
using LdFn = std::function<long double(const LdPoint&)>;

long double eval_ld(const rsm::dsl::Expr& e, const LdPoint& p) {
    using rsm::dsl::BinaryOp;
    using rsm::dsl::Func;
    using rsm::dsl::NodeKind;
    switch (e.kind) {
        case NodeKind::Number: return static_cast<long double>(e.number);
        case NodeKind::Constant: return static_cast<long double>(e.const_value);
        case NodeKind::Variable: return p[static_cast<std::size_t>(e.var_index)];
        case NodeKind::Negate: return -eval_ld(*e.args[0], p);
        case NodeKind::Binary: {
            const long double a = eval_ld(*e.args[0], p);
            const long double b = eval_ld(*e.args[1], p);
            switch (e.op) {
                case BinaryOp::Add: return a + b;
                case BinaryOp::Sub: return a - b;
                case BinaryOp::Mul: return a * b;
                case BinaryOp::Div: return a / b;
            }
            break;
        }
        case NodeKind::Power:
            return std::pow(eval_ld(*e.args[0], p), static_cast<long double>(e.number));
        case NodeKind::Call: {
            const long double a = eval_ld(*e.args[0], p);
            switch (e.func) {
                case Func::Sin: return std::sin(a);
                case Func::Cos: return std::cos(a);
                case Func::Tan: return std::tan(a);
                case Func::Atan: return std::atan(a);
                case Func::Sqrt: return std::sqrt(a);
                case Func::Exp: return std::exp(a);
                case Func::Log: return std::log(a);
            }
            break;
        }
    }
    return 0.0L;
}

LdFn central_difference(const LdFn& f, int i, long double h) {
    return [f, i, h](const LdPoint& p) {
        LdPoint a = p, b = p;
        a[static_cast<std::size_t>(i)] += h;
        b[static_cast<std::size_t>(i)] -= h;
        return (f(a) - f(b)) / (2.0L * h);
    };
}

// Random expression text over {s, u2} with all function arguments kept inside
// safe domains, so every generated expression is smooth on the sample box.
struct ExprGen {
    std::mt19937 rng;
    explicit ExprGen(unsigned seed) : rng(seed) {}
    double unif(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    }
    int pick(int k) { return std::uniform_int_distribution<int>(0, k - 1)(rng); }
    std::string leaf() {
        switch (pick(3)) {
            case 0: return "s";
            case 1: return "u2";
            default: return rsm::dsl::format_double(0.001 * std::round(unif(0.3, 2.2) * 1000));
        }
    }
    std::string gen(int depth) {
        if (depth <= 0 || pick(100) < 20) return leaf();
        const std::string a = gen(depth - 1);
        switch (pick(12)) {
            case 0: return "sin(" + a + ")";
            case 1: return "cos(" + a + ")";
            case 2: return "atan(" + a + ")";
            case 3: return "exp(0.25*cos(" + a + "))";
            case 4: return "log(1.5 + 0.5*sin(" + a + "))";
            case 5: return "sqrt(1.5 + 0.5*cos(" + a + "))";
            case 6: return "tan(0.6*atan(" + a + "))";
            case 7: return "(" + a + ")^2";
            case 8: return "(" + a + ")^3";
            case 9: return "(" + a + " + " + gen(depth - 1) + ")";
            case 10: return "(" + a + " - " + gen(depth - 1) + ")";
            default: return "(" + a + " * " + gen(depth - 1) + ")";
        }
    }
};

bool criterion_jets_vs_fd(std::string& detail) {
    ExprGen gen(917u);
    const long double h = kFdStep;
    int passed = 0;
    double worst = 0.0;
    std::string worst_expr = "-";
    for (int it = 0; it < 200; ++it) {
        std::string text = gen.gen(3);
        if (it % 5 == 4) text = "(" + text + ") / (1.3 + (" + gen.gen(2) + ")^2)";
        const rsm::dsl::ExprPtr e = rsm::dsl::parse_expression(text, {"s", "u2"});

        const double p0 = gen.unif(0.35, 0.85), p1 = gen.unif(0.35, 0.85);
        const double pt[] = {p0, p1};
        const auto vars = rsm::jet_point(pt, 3);
        const rsm::Jet shape = rsm::Jet::constant(0.0, 2, 3);
        const rsm::Jet jet = rsm::dsl::eval_expr(*e, vars, shape);

        const LdFn f0 = [&e](const LdPoint& q) { return eval_ld(*e, q); };
        const LdPoint p{static_cast<long double>(p0), static_cast<long double>(p1)};

        double err = std::abs(jet.value() - static_cast<double>(f0(p))) /
                     std::max(1.0, std::abs(jet.value()));
        for (int i = 0; i < 2; ++i) {
            const double fd1 = static_cast<double>(central_difference(f0, i, h)(p));
            err = std::max(err, std::abs(jet.d1(i) - fd1) / std::max(1.0, std::abs(jet.d1(i))));
            for (int j = i; j < 2; ++j) {
                const double fd2 = static_cast<double>(
                    central_difference(central_difference(f0, i, h), j, h)(p));
                err = std::max(err,
                               std::abs(jet.d2(i, j) - fd2) / std::max(1.0, std::abs(jet.d2(i, j))));
                for (int k = j; k < 2; ++k) {
                    const double fd3 = static_cast<double>(central_difference(
                        central_difference(central_difference(f0, i, h), j, h), k, h)(p));
                    err = std::max(err, std::abs(jet.d3(i, j, k) - fd3) /
                                            std::max(1.0, std::abs(jet.d3(i, j, k))));
                }
            }
        }
        if (err <= kTolFd) {
            ++passed;
        } else if (err > worst) {
            worst_expr = text;
        }
        worst = std::max(worst, err);
    }
    detail = std::to_string(passed) + "/200 within " + num(kTolFd) + ", worst deviation " +
             num(worst) + (passed == 200 ? "" : " at " + worst_expr);
    return passed == 200;
}

// ---------------------------------------------------------------------------
// 8. CLI byte-determinism across thread counts; grammar print/parse fixpoint.

bool criterion_determinism(std::string& detail) {
    const std::vector<std::vector<std::string>> commands = {
        {"verify", "--builtin", "rectifying:c=0.9,base=sphere_ellipse(1.1,0.9,0.5)", "--grid",
         "5,5", "--format", "json"},
        {"classify", "--builtin", "cone:base=small_circle(0.4)", "--grid", "5,5"},
        {"construct", "--c", "1.25", "--base", "ellipse4(1.1,0.9,0.3,0.4)"},
        {"sample", "--builtin", "rectifying:c=1.1,base=torus_curve(2)", "--grid", "4,4"},
        {"frenet", "--builtin", "rectifying_curve:c=0.9,base=small_circle(0.5)", "--grid", "7",
         "--format", "json"},
    };
    auto run = [](std::vector<std::string> args, const std::string& jobs) {
        args.insert(args.end(), {"--jobs", jobs});
        std::ostringstream out, err;
        const int code = rsm::cli::run_cli(args, out, err);
        return std::pair<int, std::string>(code, out.str());
    };
    bool deterministic = true;
    for (const std::vector<std::string>& cmd : commands) {
        const auto a1 = run(cmd, "1");
        const auto a2 = run(cmd, "1");
        const auto b1 = run(cmd, "8");
        const auto b2 = run(cmd, "8");
        deterministic = deterministic && a1 == a2 && a1 == b1 && b1 == b2 && !a1.second.empty();
    }

    ExprGen gen(4242u);
    int fixpoints = 0;
    for (int it = 0; it < 100; ++it) {
        const int m = 2 + gen.pick(2);
        std::string text = "dim 2 -> " + std::to_string(m) + "\n";
        if (gen.pick(2) == 0) text += "chart arclength\n";
        if (gen.pick(3) == 0)
            text += "const K = " + rsm::dsl::format_double(0.001 * gen.pick(3000)) + "\n";
        text += "x = [";
        for (int c = 0; c < m; ++c) text += (c ? ", " : "") + gen.gen(3);
        text += "]\n";
        text += "s in [" + rsm::dsl::format_double(-gen.unif(0.5, 2.0)) + ", " +
                rsm::dsl::format_double(gen.unif(0.5, 2.0)) + "]\n";
        text += "u2 in [" + rsm::dsl::format_double(-gen.unif(0.5, 2.0)) + ", " +
                rsm::dsl::format_double(gen.unif(0.5, 2.0)) + "]\n";

        const rsm::dsl::ImmersionSpec s1 = rsm::dsl::parse_immersion(text);
        const std::string t1 = rsm::dsl::print_spec(s1);
        const rsm::dsl::ImmersionSpec s2 = rsm::dsl::parse_immersion(t1);
        const std::string t2 = rsm::dsl::print_spec(s2);
        bool same = t1 == t2 && s1.components.size() == s2.components.size();
        for (std::size_t c = 0; same && c < s1.components.size(); ++c)
            same = rsm::dsl::structural_equal(*s1.components[c], *s2.components[c]);
        if (same) ++fixpoints;
    }
    detail = std::string("outputs ") + (deterministic ? "identical" : "DIFFER") +
             " across --jobs 1/8 runs, " + std::to_string(fixpoints) +
             "/100 grammar round trips are fixpoints";
    return deterministic && fixpoints == 100;
}

} // namespace

int main() {
    struct Criterion {
        std::string name;
        std::function<bool(std::string&)> fn;
    };
    const std::vector<BuiltCase> cases = build_random_cases();
    const std::vector<Criterion> criteria = {
        {"curvature identities on the classical corpus", criterion_curvature},
        {"randomized constructions verify and carry the warped metrics",
         [&](std::string& d) { return criterion_constructions(cases, d); }},
        {"joint residual vanishing and negative separation",
         [&](std::string& d) { return criterion_equivalence(cases, d); }},
        {"radial property battery on constructed examples", criterion_property_battery},
        {"space-curve invariants and degeneration", criterion_curves},
        {"conic/spherical/proper classification", criterion_classification},
        {"jet derivatives against finite differences", criterion_jets_vs_fd},
        {"CLI determinism and grammar fixpoint", criterion_determinism},
    };
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        std::string detail;
        bool ok = false;
        try {
            ok = criteria[i].fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        report_line(static_cast<int>(i) + 1, criteria[i].name, ok, detail);
    }
    if (g_failures > 0) {
        std::printf("%d of %zu acceptance criteria failed\n", g_failures, criteria.size());
        return 1;
    }
    std::printf("all %zu acceptance criteria passed\n", criteria.size());
    return 0;
}
