#pragma once

// Radial analysis of an immersed submanifold: split the position field into
// tangential and normal parts, measure every identity that characterizes a
// rectifying submanifold (position orthogonal to the second fundamental form,
// concurrent tangential part, constant normal length, quadratic |x|^2, flat
// radial curvature, connection form of the radial frame), classify the result
// (conic / spherical / proper / rectifying), and bundle everything into a
// deterministic grid report.  Chart-dimension-1 immersions additionally get a
// Frenet apparatus with the centrode decomposition of the position.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rsm/errors.hpp"
#include "rsm/geometry.hpp"
#include "rsm/grid.hpp"
#include "rsm/immersion.hpp"
#include "rsm/jet.hpp"
#include "rsm/report.hpp"

namespace rsm {

// x = x^T + x^N with x^T = a^i x_i, a^i = g^ij <x, x_j>.
struct PositionSplit {
    Eigen::VectorXd tangential, normal;  // ambient components of x^T, x^N
    Eigen::VectorXd chart_components;    // a^i
    double rho = 0.0;                    // |x^T|
    double nu = 0.0;                     // |x^N|
};

inline PositionSplit position_split(const GeometrySnapshot& s) {
    PositionSplit out;
    out.chart_components = s.g_inv * (s.dx.transpose() * s.x);
    out.tangential = s.dx * out.chart_components;
    out.normal = s.x - out.tangential;
    out.rho = out.tangential.norm();
    out.nu = out.normal.norm();
    return out;
}

// max_{i<=j} |<x, h(e_i, e_j)>| over the orthonormal tangent frame, scaled by
// the sizes of x and h.  Zero exactly when the position stays inside the
// rectifying space (tangent plane + orthogonal complement of the image of h).
inline double rectifying_residual(const GeometrySnapshot& s) {
    double mx = 0.0;
    for (int i = 0; i < s.n; ++i)
        for (int j = i; j < s.n; ++j)
            mx = std::max(mx, std::abs(s.h_frame(i, j).dot(s.x)));
    return mx / ((1.0 + s.x.norm()) * (1.0 + s.max_h_norm()));
}

namespace detail {

// First-order jets of the radial decomposition, derived from FieldJets of
// order q: everything here has order q-1.
struct RadialJets {
    std::vector<Jet> a;       // chart components of x^T
    std::vector<Jet> xT, xN;  // ambient components
    Jet rho2;                 // |x^T|^2
    Jet norm2;                // |x|^2
};

inline RadialJets radial_jets(const FieldJets& f) {
    const int n = f.n, m = f.m;
    const int q1 = f.order - 1;
    const auto sz = [](int k) { return static_cast<std::size_t>(k); };
    RadialJets r;

    std::vector<Jet> x1;
    x1.reserve(sz(m));
    for (int a = 0; a < m; ++a) x1.push_back(truncate(f.x[sz(a)], q1));

    const Jet zero = x1[0] * 0.0;
    std::vector<Jet> xdot(sz(n), zero);  // <x, x_j>
    for (int j = 0; j < n; ++j) {
        Jet s = zero;
        for (int a = 0; a < m; ++a) s += x1[sz(a)] * f.dx[sz(j)][sz(a)];
        xdot[sz(j)] = s;
    }
    r.a.assign(sz(n), zero);
    for (int k = 0; k < n; ++k) {
        Jet s = zero;
        for (int j = 0; j < n; ++j) s += f.ginv[sz(k)][sz(j)] * xdot[sz(j)];
        r.a[sz(k)] = s;
    }
    r.xT.assign(sz(m), zero);
    r.xN.assign(sz(m), zero);
    for (int a = 0; a < m; ++a) {
        Jet s = zero;
        for (int k = 0; k < n; ++k) s += r.a[sz(k)] * f.dx[sz(k)][sz(a)];
        r.xT[sz(a)] = s;
        r.xN[sz(a)] = x1[sz(a)] - s;
    }
    r.rho2 = zero;
    r.norm2 = zero;
    for (int a = 0; a < m; ++a) {
        r.rho2 += r.xT[sz(a)] * r.xT[sz(a)];
        r.norm2 += x1[sz(a)] * x1[sz(a)];
    }
    return r;
}

// A concurrent tangential part satisfies nabla_i a^k = delta_i^k in every
// chart.  Residual: max_i |nabla_i a - d_i|_g / (1 + sqrt(g_ii)).
inline double concurrency_residual_from(const FieldJets& f, const RadialJets& r) {
    const int n = f.n;
    const auto sz = [](int k) { return static_cast<std::size_t>(k); };
    double mx = 0.0;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd v(n);
        for (int k = 0; k < n; ++k) {
            double t = r.a[sz(k)].d1(i) - (k == i ? 1.0 : 0.0);
            for (int j = 0; j < n; ++j)
                t += f.gamma[sz(k)][sz(i)][sz(j)].value() * r.a[sz(j)].value();
            v(k) = t;
        }
        double norm2_g = 0.0;
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) norm2_g += f.g[sz(k)][sz(l)].value() * v(k) * v(l);
        const double gii = f.g[sz(i)][sz(i)].value();
        mx = std::max(mx, std::sqrt(std::max(0.0, norm2_g)) / (1.0 + std::sqrt(gii)));
    }
    return mx;
}

} // namespace detail

inline double concurrency_residual(const Immersion& imm, std::span<const double> p) {
    require_regular(imm, p);
    const detail::FieldJets f = detail::field_jets(imm, p, 2);
    return detail::concurrency_residual_from(f, detail::radial_jets(f));
}

// ---------------------------------------------------------------------------
// Frenet apparatus for space curves (chart dim 1, ambient dim 3).

struct FrenetFrame {
    Eigen::Vector3d tangent, normal, binormal;
    double kappa = 0.0, tau = 0.0;
    double speed = 0.0;
};

inline FrenetFrame frenet(const Immersion& curve, double s) {
    if (curve.chart_dim() != 1 || curve.ambient_dim() != 3)
        throw InvalidArgument("frenet: needs a curve in 3-space (chart dim 1, ambient dim 3)");
    const double p[1] = {s};
    const std::vector<Jet> jets = curve.eval(p, 3);
    Eigen::Vector3d d1, d2, d3;
    for (int a = 0; a < 3; ++a) {
        d1(a) = jets[static_cast<std::size_t>(a)].d1(0);
        d2(a) = jets[static_cast<std::size_t>(a)].d2(0, 0);
        d3(a) = jets[static_cast<std::size_t>(a)].d3(0, 0, 0);
    }
    FrenetFrame f;
    f.speed = d1.norm();
    if (!(f.speed > 0.0))
        throw RegularityError("frenet: stationary point (zero speed)");
    const Eigen::Vector3d cr = d1.cross(d2);
    const double crn = cr.norm();
    const double sp3 = f.speed * f.speed * f.speed;
    if (crn <= 1e-10 * sp3)
        throw FrenetUndefinedError("Frenet frame undefined: curvature vanishes at s = " +
                                   std::to_string(s));
    f.kappa = crn / sp3;
    f.tangent = d1 / f.speed;
    const Eigen::Vector3d nr = d2 - d2.dot(f.tangent) * f.tangent;
    f.normal = nr / nr.norm();
    f.binormal = f.tangent.cross(f.normal);
    f.tau = cr.dot(d3) / (crn * crn);
    return f;
}

// Components of the position along the Frenet frame.  A curve is rectifying
// exactly when the principal-normal component vanishes: x = lambda t + mu b.
struct CurvePositionData {
    double residual = 0.0;  // |<x, n>| / (1 + |x|)
    double lambda = 0.0;    // <x, t>
    double mu = 0.0;        // <x, b>
};

inline CurvePositionData rectifying_curve_residual(const Immersion& curve, double s) {
    const FrenetFrame f = frenet(curve, s);
    const double p[1] = {s};
    const Eigen::Vector3d x = curve.position(p);
    CurvePositionData out;
    out.lambda = x.dot(f.tangent);
    out.mu = x.dot(f.binormal);
    out.residual = std::abs(x.dot(f.normal)) / (1.0 + x.norm());
    return out;
}

// ---------------------------------------------------------------------------
// Grid report.

struct ReportOptions {
    std::vector<int> grid_sizes;  // empty: 9 per dimension
    double tol_exact = 1e-8;      // identities that hold to machine precision
    double tol_third = 1e-7;      // identities involving third derivatives
    double tol_class = 1e-10;     // conic / spherical / proper thresholds
    int jobs = 1;
};

namespace detail {

// Everything measured at one grid point.
struct PointRecord {
    double rect_res = 0.0, conc_res = 0.0;
    double rho = 0.0, nu = 0.0, xnorm = 0.0;
    double shape_norm = 0.0;    // |A_{x^N}| (spectral)
    double balance_err = 0.0;   // |D_i x^N + a^j h_ij| / (1 + |x|)
    int n1_dim = 0;             // dim of the first normal space
    bool radial_ok = false;     // |x^T| large enough for unit radial direction
    double e1_rho_err = 0.0;    // e_1(rho) - 1 and e_j(rho), j >= 2
    double growth_err = 0.0;    // |e_1(|x|^2) - 2 rho| / (1 + 2 rho)
    double flat_max = 0.0;      // |R(e_1, E_J; E_K, E_L)|
    double sect_max = 0.0;      // |K(x^T, E_Z)|
    double omega_err = 0.0;     // |omega_1^j(e_i) - delta_ij / rho|
    double s0 = 0.0;            // first chart coordinate
    double norm2v = 0.0;        // |x|^2
};

inline PointRecord analyze_point(const Immersion& imm, std::span<const double> p) {
    require_regular(imm, p);
    const FieldJets f = field_jets(imm, p, 3);
    const GeometrySnapshot s = build_snapshot(f, p);
    const int n = s.n, m = s.m;
    const auto sz = [](int k) { return static_cast<std::size_t>(k); };

    PointRecord rec;
    const PositionSplit split = position_split(s);
    rec.rho = split.rho;
    rec.nu = split.nu;
    rec.xnorm = s.x.norm();
    rec.s0 = p[0];
    rec.norm2v = rec.xnorm * rec.xnorm;
    rec.rect_res = rectifying_residual(s);

    const RadialJets rj = radial_jets(f);
    rec.conc_res = concurrency_residual_from(f, rj);

    const Eigen::MatrixXd A = shape_operator(s, s.normal_project(split.normal));
    rec.shape_norm =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A, Eigen::EigenvaluesOnly)
            .eigenvalues()
            .cwiseAbs()
            .maxCoeff();

    // D_i x^N + a^j h_ij = 0 (normal part of d_i x = x_i, split along x^T).
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd di(m);
        for (int a = 0; a < m; ++a) di(a) = rj.xN[sz(a)].d1(i);
        Eigen::VectorXd t = s.normal_project(di);
        for (int j = 0; j < n; ++j) t += split.chart_components(j) * s.h[sz(i)][sz(j)];
        rec.balance_err = std::max(rec.balance_err, t.norm() / (1.0 + rec.xnorm));
    }

    rec.n1_dim = first_normal_space(s).dim;

    rec.radial_ok = split.rho > 1e-6 * (1.0 + rec.xnorm);
    if (!rec.radial_ok) return rec;

    // Orthonormal tangent frame adapted to the radial direction: E_1 = x^T/rho,
    // completed deterministically from the snapshot frame columns.
    Eigen::MatrixXd Ead(m, n);
    Ead.col(0) = split.tangential / split.rho;
    int taken = 1;
    for (int c = 0; c < n && taken < n; ++c) {
        Eigen::VectorXd v = s.frame.col(c);
        for (int t = 0; t < taken; ++t) v -= Ead.col(t).dot(v) * Ead.col(t);
        if (v.norm() > 1e-6) Ead.col(taken++) = v / v.norm();
    }
    if (taken < n)
        throw RegularityError("radial tangent frame degenerates at this point");
    // Chart components: E_i = Cad(l, i) x_l.
    const Eigen::MatrixXd Cad = s.g_inv * (s.dx.transpose() * Ead);

    const Jet rho_jet = sqrt(rj.rho2);
    for (int i = 0; i < n; ++i) {
        double ei_rho = 0.0;
        for (int l = 0; l < n; ++l) ei_rho += Cad(l, i) * rho_jet.d1(l);
        rec.e1_rho_err = std::max(rec.e1_rho_err, std::abs(ei_rho - (i == 0 ? 1.0 : 0.0)));
    }
    double e1_norm2 = 0.0;
    for (int l = 0; l < n; ++l) e1_norm2 += Cad(l, 0) * rj.norm2.d1(l);
    rec.growth_err = std::abs(e1_norm2 - 2.0 * split.rho) / (1.0 + 2.0 * split.rho);

    if (n >= 2) {
        const CurvatureData curv = curvature_from(f, s);
        const Eigen::VectorXd e1c = Cad.col(0);
        for (int J = 0; J < n; ++J)
            for (int K = 0; K < n; ++K)
                for (int L = 0; L < n; ++L) {
                    double v = 0.0;
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j)
                            for (int k = 0; k < n; ++k)
                                for (int l = 0; l < n; ++l)
                                    v += curv.R_int(i, j, k, l) * e1c(i) * Cad(j, J) *
                                         Cad(k, K) * Cad(l, L);
                    rec.flat_max = std::max(rec.flat_max, std::abs(v));
                }
        std::vector<double> avec(sz(n)), zvec(sz(n));
        for (int l = 0; l < n; ++l) avec[sz(l)] = split.chart_components(l);
        for (int Z = 1; Z < n; ++Z) {
            for (int l = 0; l < n; ++l) zvec[sz(l)] = Cad(l, Z);
            rec.sect_max = std::max(rec.sect_max, std::abs(curv.sectional(avec, zvec)));
        }

        // omega_1^j(e_i) = <d_{e_i} E_1, E_j> against delta_ij / rho, j >= 2.
        std::vector<Jet> e1_jets;
        e1_jets.reserve(sz(m));
        for (int a = 0; a < m; ++a) e1_jets.push_back(rj.xT[sz(a)] / rho_jet);
        for (int i = 0; i < n; ++i)
            for (int j = 1; j < n; ++j) {
                double w = 0.0;
                for (int l = 0; l < n; ++l) {
                    double dl = 0.0;
                    for (int a = 0; a < m; ++a) dl += e1_jets[sz(a)].d1(l) * Ead(a, j);
                    w += Cad(l, i) * dl;
                }
                const double target = (i == j) ? 1.0 / split.rho : 0.0;
                rec.omega_err = std::max(rec.omega_err, std::abs(w - target));
            }
    }
    return rec;
}

inline std::string classification_label(bool conic, bool spherical, bool proper,
                                        bool rectifying) {
    if (proper && rectifying) return "proper rectifying";
    if (conic) return "conic, not proper rectifying";
    if (spherical) return "spherical, not proper rectifying";
    if (!rectifying) return "not rectifying";
    return "rectifying, not proper";
}

} // namespace detail

struct Classification {
    bool conic = false, spherical = false, proper = false, rectifying = false;
    double conic_deviation = 0.0;     // max nu / (1 + |x|)
    double spherical_deviation = 0.0; // max rho / (1 + |x|)
    double properness_margin = 0.0;   // min of min(nu, rho) / (1 + |x|)
    double max_rectifying_residual = 0.0;
    std::string label;
};

inline Classification classify(const Immersion& imm, const ReportOptions& opt = {}) {
    const Grid grid = Grid::regular(imm.domain(), opt.grid_sizes);
    struct Light {
        double rect = 0.0, rho = 0.0, nu = 0.0, xnorm = 0.0;
    };
    std::vector<Light> recs(static_cast<std::size_t>(grid.total()));
    parallel_for_index(grid.total(), opt.jobs, [&](int i) {
        const std::vector<double> p = grid.point(i);
        require_regular(imm, p);
        const detail::FieldJets f = detail::field_jets(imm, p, 2);
        const GeometrySnapshot s = detail::build_snapshot(f, p);
        const PositionSplit sp = position_split(s);
        recs[static_cast<std::size_t>(i)] = {rectifying_residual(s), sp.rho, sp.nu, s.x.norm()};
    });
    Classification c;
    c.properness_margin = std::numeric_limits<double>::infinity();
    for (const Light& r : recs) {
        const double scale = 1.0 + r.xnorm;
        c.conic_deviation = std::max(c.conic_deviation, r.nu / scale);
        c.spherical_deviation = std::max(c.spherical_deviation, r.rho / scale);
        c.properness_margin = std::min(c.properness_margin, std::min(r.nu, r.rho) / scale);
        c.max_rectifying_residual = std::max(c.max_rectifying_residual, r.rect);
    }
    c.conic = c.conic_deviation < opt.tol_class;
    c.spherical = c.spherical_deviation < opt.tol_class;
    c.proper = c.properness_margin >= opt.tol_class;
    c.rectifying = c.max_rectifying_residual <= opt.tol_exact;
    c.label = detail::classification_label(c.conic, c.spherical, c.proper, c.rectifying);
    return c;
}

inline VerificationReport rectifying_property_report(const Immersion& imm,
                                                     const ReportOptions& opt = {}) {
    const Grid grid = Grid::regular(imm.domain(), opt.grid_sizes);
    const int n = imm.chart_dim(), m = imm.ambient_dim();
    const int N = grid.total();

    std::vector<detail::PointRecord> recs(static_cast<std::size_t>(N));
    parallel_for_index(N, opt.jobs, [&](int i) {
        recs[static_cast<std::size_t>(i)] = detail::analyze_point(imm, grid.point(i));
    });

    // Sequential reductions in grid order.
    double max_rect = 0.0, max_conc = 0.0, max_shape = 0.0, max_balance = 0.0;
    double conic_dev = 0.0, spher_dev = 0.0;
    double margin = std::numeric_limits<double>::infinity();
    int max_n1 = 0;
    bool radial_all = true;
    double e1_err = 0.0, growth = 0.0, flat = 0.0, sect = 0.0, omega = 0.0;
    double nu_sum = 0.0;
    for (const auto& r : recs) {
        max_rect = std::max(max_rect, r.rect_res);
        max_conc = std::max(max_conc, r.conc_res);
        max_shape = std::max(max_shape, r.shape_norm);
        max_balance = std::max(max_balance, r.balance_err);
        const double scale = 1.0 + r.xnorm;
        conic_dev = std::max(conic_dev, r.nu / scale);
        spher_dev = std::max(spher_dev, r.rho / scale);
        margin = std::min(margin, std::min(r.nu, r.rho) / scale);
        max_n1 = std::max(max_n1, r.n1_dim);
        radial_all = radial_all && r.radial_ok;
        e1_err = std::max(e1_err, r.e1_rho_err);
        growth = std::max(growth, r.growth_err);
        flat = std::max(flat, r.flat_max);
        sect = std::max(sect, r.sect_max);
        omega = std::max(omega, r.omega_err);
        nu_sum += r.nu;
    }
    const double nu_mean = nu_sum / static_cast<double>(N);
    double nu_var = 0.0;
    for (const auto& r : recs) nu_var += (r.nu - nu_mean) * (r.nu - nu_mean);
    const double nu_std = std::sqrt(nu_var / static_cast<double>(N));

    VerificationReport rep;
    rep.label = imm.label();
    rep.chart_dim = n;
    rep.ambient_dim = m;
    rep.grid_sizes = grid.sizes();
    rep.grid_points = N;
    rep.tol_exact = opt.tol_exact;
    rep.tol_third = opt.tol_third;
    rep.tol_class = opt.tol_class;
    rep.conic = conic_dev < opt.tol_class;
    rep.spherical = spher_dev < opt.tol_class;
    rep.proper = margin >= opt.tol_class;
    rep.rectifying = max_rect <= opt.tol_exact;
    rep.classification =
        detail::classification_label(rep.conic, rep.spherical, rep.proper, rep.rectifying);

    const bool arc = imm.arclength_chart();
    const std::string radial_note = "tangential position vanishes at a sampled point";
    const std::string dim_note = "requires chart dimension >= 2";
    const std::string arc_note = "first chart variable is not arclength";

    auto check = [&](const std::string& name, double value, double tol, bool applicable,
                     const std::string& note = "") {
        CheckEntry e;
        e.name = name;
        e.tolerance = tol;
        if (!applicable) {
            e.verdict = "not_applicable";
            e.note = note;
        } else {
            e.value = value;
            e.verdict = value <= tol ? "pass" : "fail";
        }
        rep.entries.push_back(std::move(e));
    };
    auto info = [&](const std::string& name, double value) {
        CheckEntry e;
        e.name = name;
        e.value = value;
        e.verdict = "info";
        rep.entries.push_back(std::move(e));
    };

    check("position_in_rectifying_space", max_rect, opt.tol_exact, true);
    check("tangent_position_concurrency", max_conc, opt.tol_exact, true);
    check("normal_position_shape_operator", max_shape, opt.tol_exact, true);
    check("normal_derivative_balance", max_balance, opt.tol_exact, true);
    check("tangential_length_derivative", e1_err, opt.tol_exact, radial_all, radial_note);
    check("radial_growth_identity", growth, opt.tol_exact, radial_all, radial_note);

    // |x|^2 against alpha s^2 + beta s + gamma over the whole grid.
    double fit_res = 0.0, lead_err = 0.0, c1 = 0.0, c2 = 0.0;
    if (arc) {
        Eigen::MatrixXd V(N, 3);
        Eigen::VectorXd y(N);
        for (int i = 0; i < N; ++i) {
            const auto& r = recs[static_cast<std::size_t>(i)];
            V(i, 0) = r.s0 * r.s0;
            V(i, 1) = r.s0;
            V(i, 2) = 1.0;
            y(i) = r.norm2v;
        }
        const Eigen::Vector3d coef = Eigen::HouseholderQR<Eigen::MatrixXd>(V).solve(y);
        fit_res = (V * coef - y).cwiseAbs().maxCoeff() / (1.0 + y.cwiseAbs().maxCoeff());
        lead_err = std::abs(coef(0) - 1.0);
        c1 = coef(1);
        c2 = coef(2);
    }
    check("squared_norm_quadratic_fit", fit_res, opt.tol_exact, arc, arc_note);
    check("quadratic_fit_leading_coefficient", lead_err, opt.tol_exact, arc, arc_note);
    check("normal_length_constancy", nu_std, opt.tol_exact, true);
    check("radial_curvature_flatness", flat, opt.tol_third, n >= 2 && radial_all,
          n < 2 ? dim_note : radial_note);
    check("radial_sectional_curvature", sect, opt.tol_third, n >= 2 && radial_all,
          n < 2 ? dim_note : radial_note);
    check("radial_frame_connection", omega, opt.tol_third, n >= 2 && radial_all,
          n < 2 ? dim_note : radial_note);

    info("conic_deviation", conic_dev);
    info("spherical_deviation", spher_dev);
    info("properness_margin", margin);
    info("first_normal_dimension", static_cast<double>(max_n1));

    // For a proper rectifying immersion the image of h misses the normal
    // direction x^N, so dim N_1 <= m - n - 1.
    const bool codim_applies = rep.proper && rep.rectifying;
    const double defect = std::max(0.0, static_cast<double>(max_n1 - (m - n - 1)));
    check("codimension_bound", defect, 0.5, codim_applies,
          codim_applies ? "" : "only meaningful for proper rectifying immersions");

    if (arc) {
        if (radial_all) {
            double b_sum = 0.0;
            for (const auto& r : recs) b_sum += r.rho - r.s0;
            rep.fitted.emplace_back("b", b_sum / static_cast<double>(N));
        }
        rep.fitted.emplace_back("c1", c1);
        rep.fitted.emplace_back("c2", c2);
    }
    rep.fitted.emplace_back("c", nu_mean);

    if (!radial_all)
        rep.notes.push_back("radial checks skipped: " + radial_note);
    return rep;
}

} // namespace rsm
