#pragma once

// Pointwise geometry of an immersed submanifold x: M^n -> E^m.
//
// Everything is derived from one jet pipeline: seed the chart coordinates as
// jet variables, push them through the immersion, and read off
//
//   g_ij   = <x_i, x_j>                      (induced metric)
//   Gamma  = g^kl <x_ij, x_l>                (Levi-Civita connection)
//   h_ij   = x_ij - Gamma^k_ij x_k           (second fundamental form)
//   e_1..e_n                                 (orthonormal tangent frame)
//   omega_i^j(e_k) = <d_{e_k} E_i, e_j>      (frame connection forms)
//
// Because the intermediate fields are themselves jets, covariant derivatives
// of h and the curvature tensor come from exact differentiation, not from
// finite-differencing neighboring points.  Two independent curvature routes
// (intrinsic from Gamma-derivatives, extrinsic from the products of h) are
// kept side by side as a mutual cross-check.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "rsm/errors.hpp"
#include "rsm/immersion.hpp"
#include "rsm/jet.hpp"

namespace rsm {

namespace detail {

using JetMatrix = std::vector<std::vector<Jet>>;

// Gauss-Jordan inverse with value-part pivoting, exact in the jet algebra.
inline JetMatrix invert_jet_matrix(const JetMatrix& a_in) {
    const int n = static_cast<int>(a_in.size());
    JetMatrix a = a_in;
    const Jet zero = a[0][0] * 0.0;
    JetMatrix inv(static_cast<std::size_t>(n), std::vector<Jet>(static_cast<std::size_t>(n), zero));
    for (int i = 0; i < n; ++i) inv[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = zero + 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)].value()) >
                std::abs(a[static_cast<std::size_t>(piv)][static_cast<std::size_t>(col)].value()))
                piv = r;
        if (a[static_cast<std::size_t>(piv)][static_cast<std::size_t>(col)].value() == 0.0)
            throw RegularityError("induced metric is singular at this point");
        std::swap(a[static_cast<std::size_t>(col)], a[static_cast<std::size_t>(piv)]);
        std::swap(inv[static_cast<std::size_t>(col)], inv[static_cast<std::size_t>(piv)]);
        const Jet d = a[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)];
        for (int j = 0; j < n; ++j) {
            a[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)] =
                a[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)] / d;
            inv[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)] =
                inv[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)] / d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const Jet f = a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)];
            for (int j = 0; j < n; ++j) {
                a[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] -=
                    f * a[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)];
                inv[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] -=
                    f * inv[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)];
            }
        }
    }
    return inv;
}

// All core fields of the submanifold at one chart point, kept as jets so
// they can be differentiated further.  With input order q:
//   x at order q, dx / g / ginv / frame at q-1, d2x / Gamma / h at q-2.
struct FieldJets {
    int n = 0, m = 0, order = 0;
    std::vector<Jet> x;
    JetMatrix dx;                                   // [i][a]
    JetMatrix g, ginv;                              // [i][j]
    std::vector<JetMatrix> d2x;                     // [i][j][a]
    std::vector<JetMatrix> gamma;                   // [k][i][j]
    std::vector<JetMatrix> h;                       // [i][j][a]
    JetMatrix frame;                                // [i][a]
    JetMatrix frame_chart;                          // [i][l]: e_i = sum_l fc[i][l] d_l
};

inline FieldJets field_jets(const Immersion& imm, std::span<const double> p, int order) {
    if (order < 2 || order > 3)
        throw InvalidArgument("field jets: order must be 2 or 3");
    FieldJets f;
    f.n = imm.chart_dim();
    f.m = imm.ambient_dim();
    f.order = order;
    const int n = f.n, m = f.m;
    const auto sz = [](int k) { return static_cast<std::size_t>(k); };

    f.x = imm.eval(p, order);

    f.dx.assign(sz(n), {});
    for (int i = 0; i < n; ++i) {
        f.dx[sz(i)].reserve(sz(m));
        for (int a = 0; a < m; ++a) f.dx[sz(i)].push_back(jet_derivative(f.x[sz(a)], i));
    }

    const Jet zero1 = f.dx[0][0] * 0.0;
    f.g.assign(sz(n), std::vector<Jet>(sz(n), zero1));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            Jet s = zero1;
            for (int a = 0; a < m; ++a) s += f.dx[sz(i)][sz(a)] * f.dx[sz(j)][sz(a)];
            f.g[sz(i)][sz(j)] = s;
            f.g[sz(j)][sz(i)] = s;
        }
    f.ginv = invert_jet_matrix(f.g);

    f.d2x.assign(sz(n), JetMatrix(sz(n)));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            std::vector<Jet> row;
            row.reserve(sz(m));
            for (int a = 0; a < m; ++a) row.push_back(jet_derivative(f.dx[sz(i)][sz(a)], j));
            f.d2x[sz(i)][sz(j)] = row;
            f.d2x[sz(j)][sz(i)] = std::move(row);
        }

    // Gamma^k_ij = g^kl <x_ij, x_l>, truncated to the d2x order.
    const int q2 = order - 2;
    const Jet zero2 = truncate(zero1, q2);
    std::vector<JetMatrix> c(sz(n), JetMatrix(sz(n), std::vector<Jet>(sz(n), zero2)));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            for (int l = 0; l < n; ++l) {
                Jet s = zero2;
                for (int a = 0; a < m; ++a)
                    s += f.d2x[sz(i)][sz(j)][sz(a)] * truncate(f.dx[sz(l)][sz(a)], q2);
                c[sz(i)][sz(j)][sz(l)] = s;
                c[sz(j)][sz(i)][sz(l)] = s;
            }
    f.gamma.assign(sz(n), JetMatrix(sz(n), std::vector<Jet>(sz(n), zero2)));
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                Jet s = zero2;
                for (int l = 0; l < n; ++l)
                    s += truncate(f.ginv[sz(k)][sz(l)], q2) * c[sz(i)][sz(j)][sz(l)];
                f.gamma[sz(k)][sz(i)][sz(j)] = s;
                f.gamma[sz(k)][sz(j)][sz(i)] = s;
            }

    // h_ij = x_ij - Gamma^k_ij x_k: normal-valued by construction.
    f.h.assign(sz(n), JetMatrix(sz(n), std::vector<Jet>(sz(m), zero2)));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            for (int a = 0; a < m; ++a) {
                Jet s = f.d2x[sz(i)][sz(j)][sz(a)];
                for (int k = 0; k < n; ++k)
                    s -= f.gamma[sz(k)][sz(i)][sz(j)] * truncate(f.dx[sz(k)][sz(a)], q2);
                f.h[sz(i)][sz(j)][sz(a)] = s;
            }
            f.h[sz(j)][sz(i)] = f.h[sz(i)][sz(j)];
        }

    // Stabilized Gram-Schmidt on x_1..x_n, with a deterministic sign fix:
    // the first component larger than 1e-9 in absolute value is made positive.
    f.frame = f.dx;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < i; ++j) {
            Jet proj = zero1;
            for (int a = 0; a < m; ++a) proj += f.frame[sz(i)][sz(a)] * f.frame[sz(j)][sz(a)];
            for (int a = 0; a < m; ++a) f.frame[sz(i)][sz(a)] -= proj * f.frame[sz(j)][sz(a)];
        }
        Jet norm2 = zero1;
        for (int a = 0; a < m; ++a) norm2 += f.frame[sz(i)][sz(a)] * f.frame[sz(i)][sz(a)];
        if (norm2.value() <= 1e-20)
            throw RegularityError("tangent frame degenerates at this point");
        const Jet inv_norm = 1.0 / sqrt(norm2);
        for (int a = 0; a < m; ++a) f.frame[sz(i)][sz(a)] = f.frame[sz(i)][sz(a)] * inv_norm;
        for (int a = 0; a < m; ++a) {
            const double v = f.frame[sz(i)][sz(a)].value();
            if (std::abs(v) > 1e-9) {
                if (v < 0.0)
                    for (int b = 0; b < m; ++b)
                        f.frame[sz(i)][sz(b)] = -f.frame[sz(i)][sz(b)];
                break;
            }
        }
    }

    // Chart components of the frame: C^l_i = g^lj <e_i, x_j>.
    f.frame_chart.assign(sz(n), std::vector<Jet>(sz(n), zero1));
    for (int i = 0; i < n; ++i) {
        std::vector<Jet> edotx(sz(n), zero1);
        for (int j = 0; j < n; ++j) {
            Jet s = zero1;
            for (int a = 0; a < m; ++a) s += f.frame[sz(i)][sz(a)] * f.dx[sz(j)][sz(a)];
            edotx[sz(j)] = s;
        }
        for (int l = 0; l < n; ++l) {
            Jet s = zero1;
            for (int j = 0; j < n; ++j) s += f.ginv[sz(l)][sz(j)] * edotx[sz(j)];
            f.frame_chart[sz(i)][sz(l)] = s;
        }
    }
    return f;
}

} // namespace detail

struct GeometrySnapshot {
    std::vector<double> point;
    int n = 0, m = 0, order = 0;
    Eigen::VectorXd x;
    Eigen::MatrixXd dx;                                        // m x n, column i = x_i
    std::vector<std::vector<Eigen::VectorXd>> d2x;             // [i][j]
    std::vector<std::vector<std::vector<Eigen::VectorXd>>> d3x;  // [i][j][k], order 3 only
    Eigen::MatrixXd g, g_inv;
    std::vector<Eigen::MatrixXd> gamma;                        // [k](i,j) = Gamma^k_ij
    Eigen::MatrixXd frame;                                     // m x n, orthonormal columns
    Eigen::MatrixXd frame_chart;                               // (l,i) = C^l_i
    std::vector<std::vector<Eigen::VectorXd>> h;               // [i][j], normal m-vectors
    std::vector<Eigen::MatrixXd> omega;                        // [k](i,j) = omega_i^j(e_k)

    Eigen::VectorXd normal_project(const Eigen::VectorXd& v) const {
        return v - frame * (frame.transpose() * v);
    }
    // h evaluated on orthonormal frame vectors.
    Eigen::VectorXd h_frame(int i, int j) const {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l)
                out += frame_chart(k, i) * frame_chart(l, j) *
                       h[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
        return out;
    }
    double max_h_norm() const {
        double mx = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) mx = std::max(mx, h_frame(i, j).norm());
        return mx;
    }
};

namespace detail {

inline GeometrySnapshot build_snapshot(const FieldJets& f, std::span<const double> p) {
    const int n = f.n, m = f.m;
    const auto sz = [](int k) { return static_cast<std::size_t>(k); };

    GeometrySnapshot s;
    s.point.assign(p.begin(), p.end());
    s.n = n;
    s.m = m;
    s.order = f.order;

    s.x.resize(m);
    for (int a = 0; a < m; ++a) s.x(a) = f.x[sz(a)].value();
    s.dx.resize(m, n);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < m; ++a) s.dx(a, i) = f.dx[sz(i)][sz(a)].value();

    s.d2x.assign(sz(n), std::vector<Eigen::VectorXd>(sz(n)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Eigen::VectorXd v(m);
            for (int a = 0; a < m; ++a) v(a) = f.d2x[sz(i)][sz(j)][sz(a)].value();
            s.d2x[sz(i)][sz(j)] = std::move(v);
        }
    if (f.order >= 3) {
        s.d3x.assign(sz(n), std::vector<std::vector<Eigen::VectorXd>>(
                                sz(n), std::vector<Eigen::VectorXd>(sz(n))));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    Eigen::VectorXd v(m);
                    for (int a = 0; a < m; ++a) v(a) = f.x[sz(a)].d3(i, j, k);
                    s.d3x[sz(i)][sz(j)][sz(k)] = std::move(v);
                }
    }

    s.g.resize(n, n);
    s.g_inv.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            s.g(i, j) = f.g[sz(i)][sz(j)].value();
            s.g_inv(i, j) = f.ginv[sz(i)][sz(j)].value();
        }
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.g);
        if (es.eigenvalues()(0) <= 0.0)
            throw RegularityError("induced metric is not positive definite at this point");
    }

    s.gamma.assign(sz(n), Eigen::MatrixXd(n, n));
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                s.gamma[sz(k)](i, j) = f.gamma[sz(k)][sz(i)][sz(j)].value();

    s.frame.resize(m, n);
    s.frame_chart.resize(n, n);
    for (int i = 0; i < n; ++i) {
        for (int a = 0; a < m; ++a) s.frame(a, i) = f.frame[sz(i)][sz(a)].value();
        for (int l = 0; l < n; ++l) s.frame_chart(l, i) = f.frame_chart[sz(i)][sz(l)].value();
    }

    s.h.assign(sz(n), std::vector<Eigen::VectorXd>(sz(n)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Eigen::VectorXd v(m);
            for (int a = 0; a < m; ++a) v(a) = f.h[sz(i)][sz(j)][sz(a)].value();
            s.h[sz(i)][sz(j)] = std::move(v);
        }

    // omega_i^j(e_k) = sum_l C^l_k <d_l E_i, e_j>
    s.omega.assign(sz(n), Eigen::MatrixXd::Zero(n, n));
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double v = 0.0;
                for (int l = 0; l < n; ++l) {
                    double dEi_dot_ej = 0.0;
                    for (int a = 0; a < m; ++a)
                        dEi_dot_ej += f.frame[sz(i)][sz(a)].d1(l) * s.frame(a, j);
                    v += s.frame_chart(l, k) * dEi_dot_ej;
                }
                s.omega[sz(k)](i, j) = v;
            }
    return s;
}

} // namespace detail

inline GeometrySnapshot snapshot(const Immersion& imm, std::span<const double> p, int order = 3) {
    require_regular(imm, p);
    return detail::build_snapshot(detail::field_jets(imm, p, order), p);
}

// Weingarten map in the orthonormal frame: A(i,j) = <h(e_i,e_j), xi>.
inline Eigen::MatrixXd shape_operator(const GeometrySnapshot& s, const Eigen::VectorXd& xi) {
    if (xi.size() != s.m)
        throw InvalidArgument("shape operator: direction has wrong ambient dimension");
    const double leak = (s.frame.transpose() * xi).norm();
    if (leak > 1e-8 * xi.norm() + 1e-14 * (1.0 + s.x.norm()))
        throw InvalidArgument("shape operator: direction has tangential leakage " +
                              dsl::format_double(leak));
    Eigen::MatrixXd A(s.n, s.n);
    for (int i = 0; i < s.n; ++i)
        for (int j = i; j < s.n; ++j) {
            A(i, j) = s.h_frame(i, j).dot(xi);
            A(j, i) = A(i, j);
        }
    return A;
}

struct FirstNormalSpace {
    Eigen::MatrixXd basis;  // m x dim, orthonormal columns
    int dim = 0;
    Eigen::VectorXd singular_values;
};

// Span of the second fundamental form, from an SVD of the m x n(n+1)/2
// matrix of h components; rank cut at max(1e-10, 1e-10 * sigma_max).
inline FirstNormalSpace first_normal_space(const GeometrySnapshot& s) {
    const int cols = s.n * (s.n + 1) / 2;
    Eigen::MatrixXd M(s.m, cols);
    int c = 0;
    for (int i = 0; i < s.n; ++i)
        for (int j = i; j < s.n; ++j)
            M.col(c++) = s.h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU);
    const Eigen::VectorXd sv = svd.singularValues();
    const double cut = std::max(1e-10, sv.size() > 0 ? 1e-10 * sv(0) : 0.0);
    int d = 0;
    while (d < sv.size() && sv(d) > cut) ++d;
    FirstNormalSpace out;
    out.dim = d;
    out.singular_values = sv;
    out.basis = svd.matrixU().leftCols(d);
    return out;
}

using NormalField = std::function<std::vector<Jet>(std::span<const double>, int)>;

// D_{d_i} xi: the normal component of the ambient directional derivative of a
// normal field along each coordinate direction.
inline std::vector<Eigen::VectorXd> normal_covariant_derivative(const Immersion& imm,
                                                                std::span<const double> p,
                                                                const NormalField& field) {
    const GeometrySnapshot s = snapshot(imm, p, 2);
    const std::vector<Jet> xi = field(p, 1);
    if (static_cast<int>(xi.size()) != s.m)
        throw InvalidArgument("normal derivative: field has wrong ambient dimension");
    Eigen::VectorXd value(s.m);
    for (int a = 0; a < s.m; ++a) value(a) = xi[static_cast<std::size_t>(a)].value();
    const double leak = (s.frame.transpose() * value).norm();
    if (leak > 1e-8 * std::max(1.0, value.norm()))
        throw InvalidArgument("normal derivative: field is not normal at this point (leakage " +
                              dsl::format_double(leak) + ")");
    std::vector<Eigen::VectorXd> out;
    out.reserve(static_cast<std::size_t>(s.n));
    for (int i = 0; i < s.n; ++i) {
        Eigen::VectorXd di(s.m);
        for (int a = 0; a < s.m; ++a) di(a) = xi[static_cast<std::size_t>(a)].d1(i);
        out.push_back(s.normal_project(di));
    }
    return out;
}

using HDerivative = std::vector<std::vector<std::vector<Eigen::VectorXd>>>;

// (nabla_{d_i} h)(d_j, d_k) = P_N(d_i h_jk) - Gamma^l_ij h_lk - Gamma^l_ik h_jl.
inline HDerivative covariant_derivative_h(const Immersion& imm, std::span<const double> p) {
    require_regular(imm, p);
    const detail::FieldJets f = detail::field_jets(imm, p, 3);
    const GeometrySnapshot s = detail::build_snapshot(f, p);
    const int n = f.n, m = f.m;
    const auto sz = [](int k) { return static_cast<std::size_t>(k); };
    HDerivative T(sz(n), std::vector<std::vector<Eigen::VectorXd>>(
                             sz(n), std::vector<Eigen::VectorXd>(sz(n))));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                Eigen::VectorXd dh(m);
                for (int a = 0; a < m; ++a) dh(a) = f.h[sz(j)][sz(k)][sz(a)].d1(i);
                Eigen::VectorXd t = s.normal_project(dh);
                for (int l = 0; l < n; ++l)
                    t -= s.gamma[sz(l)](i, j) * s.h[sz(l)][sz(k)] +
                         s.gamma[sz(l)](i, k) * s.h[sz(j)][sz(l)];
                T[sz(i)][sz(j)][sz(k)] = std::move(t);
            }
    return T;
}

// Scale-free antisymmetry defect of nabla-h in its first two slots.  Flat
// ambient space makes this vanish identically, so it doubles as an engine
// self-test; the overload exists so tests can feed perturbed inputs.
inline double codazzi_residual_of(const HDerivative& T) {
    const int n = static_cast<int>(T.size());
    double scale = 0.0, defect = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                const auto& a = T[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
                                 [static_cast<std::size_t>(k)];
                const auto& b = T[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]
                                 [static_cast<std::size_t>(k)];
                scale = std::max(scale, a.lpNorm<Eigen::Infinity>());
                defect = std::max(defect, (a - b).lpNorm<Eigen::Infinity>());
            }
    return defect / (1.0 + scale);
}

inline double codazzi_residual(const Immersion& imm, std::span<const double> p) {
    return codazzi_residual_of(covariant_derivative_h(imm, p));
}

struct CurvatureData {
    int n = 0;
    Eigen::MatrixXd g;
    std::vector<double> r_int, r_gauss;  // R(d_i, d_j; d_k, d_l), flat n^4 arrays

    double R_int(int i, int j, int k, int l) const {
        return r_int[static_cast<std::size_t>(((i * n + j) * n + k) * n + l)];
    }
    double R_gauss(int i, int j, int k, int l) const {
        return r_gauss[static_cast<std::size_t>(((i * n + j) * n + k) * n + l)];
    }
    double max_abs_gauss() const {
        double mx = 0.0;
        for (double v : r_gauss) mx = std::max(mx, std::abs(v));
        return mx;
    }
    // Max discrepancy between the two routes, relative to the tensor scale.
    double gauss_residual() const {
        double d = 0.0;
        for (std::size_t t = 0; t < r_int.size(); ++t)
            d = std::max(d, std::abs(r_int[t] - r_gauss[t]));
        return d / (1.0 + max_abs_gauss());
    }
    // Sectional curvature of the plane spanned by chart vectors X, Y
    // (extrinsic route): K = R(X,Y;Y,X) / (|X|^2 |Y|^2 - <X,Y>^2).
    double sectional(std::span<const double> X, std::span<const double> Y) const {
        double gxx = 0.0, gyy = 0.0, gxy = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                gxx += g(i, j) * X[static_cast<std::size_t>(i)] * X[static_cast<std::size_t>(j)];
                gyy += g(i, j) * Y[static_cast<std::size_t>(i)] * Y[static_cast<std::size_t>(j)];
                gxy += g(i, j) * X[static_cast<std::size_t>(i)] * Y[static_cast<std::size_t>(j)];
            }
        const double den = gxx * gyy - gxy * gxy;
        if (!(den > 1e-16 * gxx * gyy))
            throw InvalidArgument("sectional curvature: degenerate 2-plane");
        double num = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l)
                        num += R_gauss(i, j, k, l) * X[static_cast<std::size_t>(i)] *
                               Y[static_cast<std::size_t>(j)] * Y[static_cast<std::size_t>(k)] *
                               X[static_cast<std::size_t>(l)];
        return num / den;
    }
};

// Curvature tensor by two independent routes:
//   intrinsic:  R_ijkl = g_lm (d_i Gamma^m_jk - d_j Gamma^m_ik
//                              + Gamma^p_jk Gamma^m_ip - Gamma^p_ik Gamma^m_jp)
//   extrinsic:  R_ijkl = <h_il, h_jk> - <h_ik, h_jl>
inline CurvatureData curvature_from(const detail::FieldJets& f, const GeometrySnapshot& s) {
    const int n = f.n;
    const auto sz = [](int k) { return static_cast<std::size_t>(k); };
    CurvatureData c;
    c.n = n;
    c.g = s.g;
    c.r_int.assign(sz(n * n * n * n), 0.0);
    c.r_gauss.assign(sz(n * n * n * n), 0.0);
    const auto idx = [n](int i, int j, int k, int l) {
        return static_cast<std::size_t>(((i * n + j) * n + k) * n + l);
    };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double rm = 0.0;
                    for (int mm = 0; mm < n; ++mm) {
                        double term = f.gamma[sz(mm)][sz(j)][sz(k)].d1(i) -
                                      f.gamma[sz(mm)][sz(i)][sz(k)].d1(j);
                        for (int q = 0; q < n; ++q)
                            term += s.gamma[sz(q)](j, k) * s.gamma[sz(mm)](i, q) -
                                    s.gamma[sz(q)](i, k) * s.gamma[sz(mm)](j, q);
                        rm += s.g(l, mm) * term;
                    }
                    c.r_int[idx(i, j, k, l)] = rm;
                    c.r_gauss[idx(i, j, k, l)] = s.h[sz(i)][sz(l)].dot(s.h[sz(j)][sz(k)]) -
                                                 s.h[sz(i)][sz(k)].dot(s.h[sz(j)][sz(l)]);
                }
    return c;
}

inline CurvatureData curvature(const Immersion& imm, std::span<const double> p) {
    require_regular(imm, p);
    const detail::FieldJets f = detail::field_jets(imm, p, 3);
    return curvature_from(f, detail::build_snapshot(f, p));
}

} // namespace rsm
