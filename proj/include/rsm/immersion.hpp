#pragma once

// Immersions x: chart box (n variables) -> E^m, evaluable to jets of order
// <= 3, plus a catalog of closed-form reference immersions and constructors
// for rectifying submanifolds:
//
//   x(s, u) = sqrt(s^2 + c^2) * Y(arctan(s/c), u),
//   Y(t, u) = cos(t) e0 + sin(t) Z(u),   <Z, Z> = 1,  c > 0,
//
// where Z is a regular immersion into the unit sphere of E^{m-1}.  The s-chart
// of the result is an arclength parameter and |x|^2 - s^2 = c^2 identically.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rsm/errors.hpp"
#include "rsm/expr.hpp"
#include "rsm/grid.hpp"
#include "rsm/jet.hpp"

namespace rsm {

class Immersion {
public:
    using Evaluator = std::function<std::vector<Jet>(std::span<const double>, int)>;

    Immersion() = default;
    Immersion(int chart_dim, int ambient_dim, std::vector<Interval> domain, Evaluator evaluator,
              std::string label, std::vector<std::string> var_names = {},
              bool arclength_chart = false)
        : n_(chart_dim), m_(ambient_dim), domain_(std::move(domain)),
          evaluator_(std::move(evaluator)), label_(std::move(label)),
          var_names_(std::move(var_names)), arclength_chart_(arclength_chart) {
        if (n_ < 1 || m_ < n_)
            throw InvalidArgument("immersion '" + label_ +
                                  "': need ambient dim >= chart dim >= 1, got " +
                                  std::to_string(n_) + " -> " + std::to_string(m_));
        if (static_cast<int>(domain_.size()) != n_)
            throw InvalidArgument("immersion '" + label_ + "': domain box has wrong dimension");
        for (const auto& iv : domain_)
            if (!(iv.length() > 0.0))
                throw InvalidArgument("immersion '" + label_ + "': empty domain interval");
        if (var_names_.empty())
            for (int i = 0; i < n_; ++i) var_names_.push_back(dsl::default_var_name(i));
    }

    int chart_dim() const { return n_; }
    int ambient_dim() const { return m_; }
    const std::vector<Interval>& domain() const { return domain_; }
    const std::string& label() const { return label_; }
    const std::vector<std::string>& var_names() const { return var_names_; }
    bool arclength_chart() const { return arclength_chart_; }

    std::vector<Jet> eval(std::span<const double> p, int order) const {
        if (static_cast<int>(p.size()) != n_)
            throw InvalidArgument("immersion '" + label_ + "': point has " +
                                  std::to_string(p.size()) + " coordinates, chart dim is " +
                                  std::to_string(n_));
        if (order < 0 || order > 3)
            throw InvalidArgument("immersion eval: order must be in [0, 3]");
        for (int i = 0; i < n_; ++i) {
            const auto& iv = domain_[static_cast<std::size_t>(i)];
            const double slack = 1e-9 * (1.0 + iv.length());
            if (p[static_cast<std::size_t>(i)] < iv.lo - slack ||
                p[static_cast<std::size_t>(i)] > iv.hi + slack)
                throw DomainError("immersion '" + label_ + "': " +
                                  var_names_[static_cast<std::size_t>(i)] + " = " +
                                  dsl::format_double(p[static_cast<std::size_t>(i)]) +
                                  " outside domain [" + dsl::format_double(iv.lo) + ", " +
                                  dsl::format_double(iv.hi) + "]");
        }
        std::vector<Jet> out = evaluator_(p, order);
        if (static_cast<int>(out.size()) != m_)
            throw InvalidArgument("immersion '" + label_ + "': evaluator returned " +
                                  std::to_string(out.size()) + " components, expected " +
                                  std::to_string(m_));
        for (const auto& j : out)
            if (j.num_vars() != n_ || j.order() != order || !j.finite())
                throw DomainError("immersion '" + label_ +
                                  "': evaluator returned a malformed or non-finite jet");
        return out;
    }

    // Ambient position and Jacobian at p, as plain matrices.
    Eigen::VectorXd position(std::span<const double> p) const {
        const auto jets = eval(p, 0);
        Eigen::VectorXd x(m_);
        for (int a = 0; a < m_; ++a) x(a) = jets[static_cast<std::size_t>(a)].value();
        return x;
    }
    Eigen::MatrixXd jacobian(std::span<const double> p) const {
        const auto jets = eval(p, 1);
        Eigen::MatrixXd J(m_, n_);
        for (int a = 0; a < m_; ++a)
            for (int i = 0; i < n_; ++i) J(a, i) = jets[static_cast<std::size_t>(a)].d1(i);
        return J;
    }

private:
    int n_ = 0;
    int m_ = 0;
    std::vector<Interval> domain_;
    Evaluator evaluator_;
    std::string label_;
    std::vector<std::string> var_names_;
    bool arclength_chart_ = false;
};

// Full-rank check on the differential: smallest singular value of the
// Jacobian must exceed 1e-10 times the largest.
inline void require_regular(const Immersion& imm, std::span<const double> p) {
    const Eigen::MatrixXd J = imm.jacobian(p);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
    const auto& sigma = svd.singularValues();
    const double smax = sigma(0);
    const double smin = sigma(sigma.size() - 1);
    if (!(smin > 1e-10 * smax)) {
        std::string at = "(";
        for (std::size_t i = 0; i < p.size(); ++i)
            at += (i ? ", " : "") + dsl::format_double(p[i]);
        throw RegularityError("immersion '" + imm.label() + "' fails regularity at " + at +
                              "): singular values " + dsl::format_double(smin) + " / " +
                              dsl::format_double(smax));
    }
}

// An immersion with the additional contract <Y, Y> = 1, validated on a sample
// grid at construction.  Serves both as the Y-factor contract and as the base
// factor Z (an (n-1)-manifold immersed in the unit sphere of E^{m-1}).
class SphericalFactor {
public:
    explicit SphericalFactor(Immersion imm) : imm_(std::move(imm)) {
        const Grid grid = Grid::regular(imm_.domain());
        for (int i = 0; i < grid.total(); ++i) {
            const auto p = grid.point(i);
            require_regular(imm_, p);
            const Eigen::VectorXd y = imm_.position(p);
            const double off = std::abs(y.squaredNorm() - 1.0);
            if (off >= 1e-10)
                throw InvalidArgument("spherical factor '" + imm_.label() +
                                      "': |Y|^2 deviates from 1 by " + dsl::format_double(off) +
                                      " on the sample grid");
        }
    }
    const Immersion& immersion() const { return imm_; }
    int chart_dim() const { return imm_.chart_dim(); }
    int ambient_dim() const { return imm_.ambient_dim(); }

private:
    Immersion imm_;
};

using BaseMetricFactor = SphericalFactor;

// Rescales an immersion onto the unit sphere: p -> x(p)/|x(p)|.
inline SphericalFactor normalize_to_sphere(const Immersion& raw) {
    Immersion unit(
        raw.chart_dim(), raw.ambient_dim(), raw.domain(),
        [raw](std::span<const double> p, int order) {
            std::vector<Jet> jets = raw.eval(p, order);
            Jet norm2 = jets[0] * jets[0];
            for (std::size_t a = 1; a < jets.size(); ++a) norm2 += jets[a] * jets[a];
            const Jet inv_norm = 1.0 / sqrt(norm2);
            for (auto& j : jets) j = j * inv_norm;
            return jets;
        },
        "unit(" + raw.label() + ")", raw.var_names(), false);
    return SphericalFactor(std::move(unit));
}

// --- reference immersions -------------------------------------------------------

inline Immersion helix(double a = 3.0, double b = 4.0) {
    if (!(a > 0.0)) throw InvalidArgument("helix: radius a must be positive");
    return Immersion(
        1, 3, {{0.0, 2.0 * M_PI}},
        [a, b](std::span<const double> p, int order) {
            const Jet s = Jet::variable(0, p[0], 1, order);
            return std::vector<Jet>{a * cos(s), a * sin(s), b * s};
        },
        "helix(a=" + dsl::format_double(a) + ",b=" + dsl::format_double(b) + ")");
}

// Round unit n-sphere in iterated polar coordinates, zero-padded into E^m.
// For n=2, m=3: (sin t cos u, sin t sin u, cos t) with chart (t, u).
inline Immersion unit_sphere(int n = 2, int m = 3) {
    if (n < 1 || m < n + 1)
        throw InvalidArgument("unit_sphere: need ambient dim >= chart dim + 1");
    std::vector<Interval> box;
    for (int i = 0; i + 1 < n; ++i) box.push_back({0.3, M_PI - 0.3});
    box.push_back({-M_PI, M_PI});
    return Immersion(
        n, m, std::move(box),
        [n, m](std::span<const double> p, int order) {
            const auto vars = jet_point(p, order);
            std::function<std::vector<Jet>(int)> sphere = [&](int k) -> std::vector<Jet> {
                if (k == n - 1) return {cos(vars[static_cast<std::size_t>(k)]),
                                        sin(vars[static_cast<std::size_t>(k)])};
                std::vector<Jet> inner = sphere(k + 1);
                const Jet sk = sin(vars[static_cast<std::size_t>(k)]);
                std::vector<Jet> out;
                out.reserve(inner.size() + 1);
                for (const auto& w : inner) out.push_back(sk * w);
                out.push_back(cos(vars[static_cast<std::size_t>(k)]));
                return out;
            };
            std::vector<Jet> out = sphere(0);
            while (static_cast<int>(out.size()) < m)
                out.push_back(Jet::constant(0.0, n, order));
            return out;
        },
        "unit_sphere(n=" + std::to_string(n) + ",m=" + std::to_string(m) + ")");
}

inline Immersion clifford_torus() {
    const double r = 1.0 / std::sqrt(2.0);
    return Immersion(
        2, 4, {{-M_PI, M_PI}, {-M_PI, M_PI}},
        [r](std::span<const double> p, int order) {
            const auto v = jet_point(p, order);
            return std::vector<Jet>{r * cos(v[0]), r * sin(v[0]), r * cos(v[1]), r * sin(v[1])};
        },
        "clifford_torus");
}

// Graph surface (s, u2, f(s, u2)) over the square [-1,1]^2.
inline Immersion graph_surface(const dsl::ExprPtr& f, const std::string& f_text) {
    return Immersion(
        2, 3, {{-1.0, 1.0}, {-1.0, 1.0}},
        [f](std::span<const double> p, int order) {
            const auto vars = jet_point(p, order);
            const Jet shape = Jet::constant(0.0, 2, order);
            return std::vector<Jet>{vars[0], vars[1], dsl::eval_expr(*f, vars, shape)};
        },
        "graph(" + f_text + ")");
}
inline Immersion graph_surface(const std::string& f_text = "s^2 - u2^2") {
    return graph_surface(dsl::parse_expression(f_text, {"s", "u2"}), f_text);
}

// Cone over a spherical factor: x(s, u) = s * Z(u), rulings through the origin.
inline Immersion cone_over(const SphericalFactor& base, Interval s_range = {0.2, 2.2}) {
    if (!(s_range.lo > 0.0) || !(s_range.hi > s_range.lo))
        throw InvalidArgument("cone_over: s-range must satisfy 0 < lo < hi");
    const Immersion z = base.immersion();
    const int n = z.chart_dim() + 1;
    std::vector<Interval> box{s_range};
    for (const auto& iv : z.domain()) box.push_back(iv);
    return Immersion(
        n, z.ambient_dim(), std::move(box),
        [z, n](std::span<const double> p, int order) {
            const Jet s = Jet::variable(0, p[0], n, order);
            std::vector<Jet> out = z.eval(p.subspan(1), order);
            for (auto& comp : out) comp = s * embed(comp, n, 1);
            return out;
        },
        "cone_over(" + z.label() + ")");
}

// --- spherical base catalog (the Z factors) ----------------------------------

inline SphericalFactor base_circle() {
    return SphericalFactor(Immersion(
        1, 2, {{-M_PI, M_PI}},
        [](std::span<const double> p, int order) {
            const Jet u = Jet::variable(0, p[0], 1, order);
            return std::vector<Jet>{cos(u), sin(u)};
        },
        "circle"));
}

inline SphericalFactor base_ellipse(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument("ellipse base: axes must be positive");
    return normalize_to_sphere(Immersion(
        1, 2, {{-M_PI, M_PI}},
        [a, b](std::span<const double> p, int order) {
            const Jet u = Jet::variable(0, p[0], 1, order);
            return std::vector<Jet>{a * cos(u), b * sin(u)};
        },
        "ellipse(a=" + dsl::format_double(a) + ",b=" + dsl::format_double(b) + ")"));
}

inline SphericalFactor base_small_circle(double latitude) {
    if (!(std::abs(latitude) < M_PI / 2 - 0.05))
        throw InvalidArgument("small_circle base: latitude too close to a pole");
    const double r = std::cos(latitude), h = std::sin(latitude);
    return SphericalFactor(Immersion(
        1, 3, {{-M_PI, M_PI}},
        [r, h](std::span<const double> p, int order) {
            const Jet u = Jet::variable(0, p[0], 1, order);
            return std::vector<Jet>{r * cos(u), r * sin(u), Jet::constant(h, 1, order)};
        },
        "small_circle(lat=" + dsl::format_double(latitude) + ")"));
}

// Planar ellipse lifted to height h, rescaled onto the unit sphere of E^3.
inline SphericalFactor base_sphere_ellipse(double a, double b, double h) {
    if (!(a > 0.0) || !(b > 0.0))
        throw InvalidArgument("sphere_ellipse base: axes must be positive");
    return normalize_to_sphere(Immersion(
        1, 3, {{-M_PI, M_PI}},
        [a, b, h](std::span<const double> p, int order) {
            const Jet u = Jet::variable(0, p[0], 1, order);
            return std::vector<Jet>{a * cos(u), b * sin(u), Jet::constant(h, 1, order)};
        },
        "sphere_ellipse(a=" + dsl::format_double(a) + ",b=" + dsl::format_double(b) +
            ",h=" + dsl::format_double(h) + ")"));
}

// Ellipse-derived curve on the unit sphere of E^4.
inline SphericalFactor base_ellipse4(double a, double b, double h1, double h2) {
    if (!(a > 0.0) || !(b > 0.0) || !(h2 > 0.0))
        throw InvalidArgument("ellipse4 base: a, b, h2 must be positive");
    return normalize_to_sphere(Immersion(
        1, 4, {{-M_PI, M_PI}},
        [a, b, h1, h2](std::span<const double> p, int order) {
            const Jet u = Jet::variable(0, p[0], 1, order);
            return std::vector<Jet>{a * cos(u), b * sin(u), h1 * cos(2.0 * u),
                                    Jet::constant(h2, 1, order)};
        },
        "ellipse4(a=" + dsl::format_double(a) + ",b=" + dsl::format_double(b) +
            ",h1=" + dsl::format_double(h1) + ",h2=" + dsl::format_double(h2) + ")"));
}

// (cos u, sin u, cos ku, sin ku)/sqrt(2): a closed curve on the unit sphere
// of E^4 (on the Clifford torus, in fact).
inline SphericalFactor base_torus_curve(int k = 2) {
    if (k < 1) throw InvalidArgument("torus_curve base: winding k must be >= 1");
    const double r = 1.0 / std::sqrt(2.0);
    return SphericalFactor(Immersion(
        1, 4, {{-M_PI, M_PI}},
        [r, k](std::span<const double> p, int order) {
            const Jet u = Jet::variable(0, p[0], 1, order);
            const double kd = k;
            return std::vector<Jet>{r * cos(u), r * sin(u), r * cos(kd * u), r * sin(kd * u)};
        },
        "torus_curve(k=" + std::to_string(k) + ")"));
}

// --- unit-speed spherical curves in E^3 (bases for the curve constructor) ----

inline Immersion curve_great_circle() {
    return Immersion(
        1, 3, {{-M_PI, M_PI}},
        [](std::span<const double> p, int order) {
            const Jet t = Jet::variable(0, p[0], 1, order);
            return std::vector<Jet>{cos(t), sin(t), Jet::constant(0.0, 1, order)};
        },
        "great_circle");
}

inline Immersion curve_small_circle(double latitude = M_PI / 4) {
    if (!(std::abs(latitude) < M_PI / 2 - 0.05))
        throw InvalidArgument("small_circle curve: latitude too close to a pole");
    const double r = std::cos(latitude), h = std::sin(latitude);
    return Immersion(
        1, 3, {{-M_PI, M_PI}},
        [r, h](std::span<const double> p, int order) {
            const Jet t = Jet::variable(0, p[0], 1, order);
            return std::vector<Jet>{r * cos(t / r), r * sin(t / r), Jet::constant(h, 1, order)};
        },
        "small_circle_curve(lat=" + dsl::format_double(latitude) + ")");
}

// --- rectifying constructions --------------------------------------------------

namespace detail {

inline void check_construction_params(double c, Interval t_range) {
    if (!(c > 0.0)) throw InvalidArgument("construct_rectifying: c must be positive");
    if (!(t_range.lo > 1e-6) || !(t_range.hi < M_PI / 2 - 1e-6) || !(t_range.hi > t_range.lo))
        throw InvalidArgument(
            "construct_rectifying: t-range must lie strictly inside (0, pi/2)");
}

} // namespace detail

struct RectifyingConstruction {
    Immersion total;         // x(s, u) = sqrt(s^2+c^2) Y(arctan(s/c), u)
    Immersion y_pullback;    // Y as a function of the (s, u) chart
    Immersion y_suspension;  // Y as a function of the (t, u) chart
    SphericalFactor base;    // Z
    double c = 1.0;
    Interval t_range;
    Interval s_range;
};

inline RectifyingConstruction construct_rectifying(double c, const SphericalFactor& base,
                                                   Interval t_range = {0.2, 1.2}) {
    detail::check_construction_params(c, t_range);
    const Immersion z = base.immersion();
    const int n = z.chart_dim() + 1;
    const int m = z.ambient_dim() + 1;
    const Interval s_range{c * std::tan(t_range.lo), c * std::tan(t_range.hi)};

    std::vector<Interval> box{s_range};
    for (const auto& iv : z.domain()) box.push_back(iv);
    const std::string label =
        "rectifying(c=" + dsl::format_double(c) + ",base=" + z.label() + ")";

    // Shared core: Y(t, u) components from a t-jet and embedded base jets.
    const auto suspension = [m](const Jet& t, std::vector<Jet> zjets) {
        const Jet ct = cos(t), st = sin(t);
        std::vector<Jet> y;
        y.reserve(static_cast<std::size_t>(m));
        y.push_back(ct);
        for (auto& za : zjets) y.push_back(st * za);
        return y;
    };
    const auto embedded_base = [z, n](std::span<const double> p, int order) {
        std::vector<Jet> zjets = z.eval(p.subspan(1), order);
        for (auto& za : zjets) za = embed(za, n, 1);
        return zjets;
    };

    Immersion total(
        n, m, box,
        [c, n, suspension, embedded_base](std::span<const double> p, int order) {
            const Jet s = Jet::variable(0, p[0], n, order);
            const Jet t = atan(s / c);
            const Jet r = sqrt(s * s + c * c);
            std::vector<Jet> y = suspension(t, embedded_base(p, order));
            for (auto& comp : y) comp = r * comp;
            return y;
        },
        label, {}, /*arclength_chart=*/true);

    Immersion y_pullback(
        n, m, box,
        [c, n, suspension, embedded_base](std::span<const double> p, int order) {
            const Jet s = Jet::variable(0, p[0], n, order);
            return suspension(atan(s / c), embedded_base(p, order));
        },
        "y_factor(" + label + ")");

    std::vector<Interval> tbox{t_range};
    for (const auto& iv : z.domain()) tbox.push_back(iv);
    Immersion y_suspension(
        n, m, std::move(tbox),
        [n, suspension, embedded_base](std::span<const double> p, int order) {
            const Jet t = Jet::variable(0, p[0], n, order);
            return suspension(t, embedded_base(p, order));
        },
        "y_suspension(" + label + ")");

    return RectifyingConstruction{std::move(total), std::move(y_pullback),
                                  std::move(y_suspension), base, c, t_range, s_range};
}

struct RectifyingCurveConstruction {
    Immersion total;  // x(s) = sqrt(s^2+c^2) y(arctan(s/c))
    Immersion y;      // the spherical unit-speed base curve
    double c = 1.0;
    Interval t_range;
    Interval s_range;
};

inline RectifyingCurveConstruction construct_rectifying_curve(double c, const Immersion& y,
                                                              Interval t_range = {0.2, 1.2}) {
    detail::check_construction_params(c, t_range);
    if (y.chart_dim() != 1 || y.ambient_dim() != 3)
        throw InvalidArgument("construct_rectifying_curve: base must be a curve in E^3");
    // The base must be unit-speed and spherical along the t-range.
    for (int i = 0; i <= 32; ++i) {
        const double t = t_range.lo + (t_range.hi - t_range.lo) * i / 32.0;
        const double pt[] = {t};
        const auto jets = y.eval(pt, 1);
        double norm2 = 0.0, speed2 = 0.0;
        for (const auto& j : jets) {
            norm2 += j.value() * j.value();
            speed2 += j.d1(0) * j.d1(0);
        }
        if (std::abs(norm2 - 1.0) > 1e-8 || std::abs(speed2 - 1.0) > 1e-8)
            throw InvalidArgument("construct_rectifying_curve: base '" + y.label() +
                                  "' is not a unit-speed curve on the unit sphere (|y|^2-1 = " +
                                  dsl::format_double(norm2 - 1.0) + ", |y'|^2-1 = " +
                                  dsl::format_double(speed2 - 1.0) + ")");
    }
    const Interval s_range{c * std::tan(t_range.lo), c * std::tan(t_range.hi)};
    Immersion total(
        1, 3, {s_range},
        [c, y](std::span<const double> p, int order) {
            const Jet s = Jet::variable(0, p[0], 1, order);
            const Jet t = atan(s / c);
            const Jet r = sqrt(s * s + c * c);
            // y evaluated at the jet t: compose through its Taylor coefficients.
            const double t0 = t.value();
            const double tp[] = {t0};
            const auto yjets = y.eval(tp, order);
            std::vector<Jet> out;
            out.reserve(yjets.size());
            const Jet that = t - Jet::constant(t0, 1, order);
            for (const auto& ya : yjets) {
                // Univariate Taylor composition y_a(t(s)).
                double coeff[4] = {ya.value(), 0.0, 0.0, 0.0};
                if (order >= 1) coeff[1] = ya.d1(0);
                if (order >= 2) coeff[2] = ya.d2(0, 0) / 2.0;
                if (order >= 3) coeff[3] = ya.d3(0, 0, 0) / 6.0;
                Jet acc = Jet::constant(coeff[order], 1, order);
                for (int k = order - 1; k >= 0; --k) acc = acc * that + coeff[k];
                out.push_back(r * acc);
            }
            return out;
        },
        "rectifying_curve(c=" + dsl::format_double(c) + ",base=" + y.label() + ")", {},
        /*arclength_chart=*/true);
    return RectifyingCurveConstruction{std::move(total), y, c, t_range, s_range};
}

// --- adapters -------------------------------------------------------------------

inline Immersion from_spec(const dsl::ImmersionSpec& spec, std::string label = "spec") {
    auto shared = std::make_shared<const dsl::ImmersionSpec>(spec);
    std::vector<Interval> box;
    for (const auto& [lo, hi] : spec.domain) box.push_back({lo, hi});
    return Immersion(
        spec.chart_dim, spec.ambient_dim, std::move(box),
        [shared](std::span<const double> p, int order) { return dsl::eval_spec(*shared, p, order); },
        std::move(label), spec.var_names, spec.arclength_chart);
}

// Homothety mu * x with the same chart.
inline Immersion homothety(const Immersion& imm, double mu) {
    if (!(mu > 0.0)) throw InvalidArgument("homothety: factor must be positive");
    return Immersion(
        imm.chart_dim(), imm.ambient_dim(), imm.domain(),
        [imm, mu](std::span<const double> p, int order) {
            std::vector<Jet> jets = imm.eval(p, order);
            for (auto& j : jets) j *= mu;
            return jets;
        },
        dsl::format_double(mu) + "*" + imm.label(), imm.var_names(), false);
}

} // namespace rsm
