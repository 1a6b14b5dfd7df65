#pragma once

// Truncated multivariate Taylor arithmetic (forward-mode, order <= 3).
//
// A Jet stores the Taylor coefficients c_alpha = (1/alpha!) d^alpha f of a
// smooth function at a base point, for all multi-indices |alpha| <= order,
// in graded lexicographic order (degree first, then lex-descending within a
// degree).  Arithmetic and elementary functions propagate whole coefficient
// blocks, so third derivatives come out to machine precision instead of the
// ~1e-4 noise floor of third-order difference stencils.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rsm/errors.hpp"

namespace rsm {

namespace detail {

struct JetLayout {
    int num_vars = 0;
    int order = 0;
    // Multi-indices in graded-lex order.  Monomials of degree <= k form a
    // prefix of the table, so truncation and differentiation never reshuffle.
    std::vector<std::vector<int>> exponents;
    std::vector<int> degree;
    std::vector<double> factorial;          // alpha! per slot
    std::vector<int> count_to_order;        // #slots with degree <= k, k = 0..order
    std::map<std::vector<int>, int> slot_of;

    struct ProductTerm { int a, b, dst; };
    std::vector<ProductTerm> product;       // ordered pairs with deg a + deg b <= order
    // quotient[k]: ordered pairs (i, j), i indexing the divisor with deg >= 1,
    // j indexing the partial quotient; exp_i + exp_j = exp_k.
    std::vector<std::vector<std::pair<int, int>>> quotient;

    struct DerivTerm { int src, dst; double weight; };
    std::vector<std::vector<DerivTerm>> derivative;  // per variable

    int slots() const { return static_cast<int>(exponents.size()); }
};

inline void enumerate_monomials(int num_vars, int var, int remaining,
                                std::vector<int>& current,
                                std::vector<std::vector<int>>& out) {
    if (var == num_vars - 1) {
        current[var] = remaining;
        out.push_back(current);
        return;
    }
    for (int e = remaining; e >= 0; --e) {
        current[var] = e;
        enumerate_monomials(num_vars, var + 1, remaining - e, current, out);
    }
}

inline JetLayout build_layout(int num_vars, int order) {
    JetLayout lay;
    lay.num_vars = num_vars;
    lay.order = order;
    for (int d = 0; d <= order; ++d) {
        if (num_vars == 0) {
            if (d == 0) lay.exponents.push_back({});
        } else {
            std::vector<int> current(num_vars, 0);
            enumerate_monomials(num_vars, 0, d, current, lay.exponents);
        }
        lay.count_to_order.push_back(static_cast<int>(lay.exponents.size()));
    }
    const int slots = lay.slots();
    lay.degree.resize(slots);
    lay.factorial.resize(slots);
    for (int s = 0; s < slots; ++s) {
        int deg = 0;
        double fact = 1.0;
        for (int e : lay.exponents[s]) {
            deg += e;
            for (int k = 2; k <= e; ++k) fact *= k;
        }
        lay.degree[s] = deg;
        lay.factorial[s] = fact;
        lay.slot_of.emplace(lay.exponents[s], s);
    }
    lay.quotient.resize(slots);
    for (int a = 0; a < slots; ++a) {
        for (int b = 0; b < slots; ++b) {
            if (lay.degree[a] + lay.degree[b] > order) continue;
            std::vector<int> sum(num_vars);
            for (int v = 0; v < num_vars; ++v) sum[v] = lay.exponents[a][v] + lay.exponents[b][v];
            const int dst = lay.slot_of.at(sum);
            lay.product.push_back({a, b, dst});
            if (lay.degree[a] >= 1) lay.quotient[dst].emplace_back(a, b);
        }
    }
    lay.derivative.resize(num_vars);
    for (int v = 0; v < num_vars; ++v) {
        for (int s = 0; s < slots; ++s) {
            if (lay.exponents[s][v] == 0) continue;
            std::vector<int> reduced = lay.exponents[s];
            reduced[v] -= 1;
            lay.derivative[v].push_back({s, lay.slot_of.at(reduced),
                                         static_cast<double>(lay.exponents[s][v])});
        }
    }
    return lay;
}

inline const JetLayout& layout_for(int num_vars, int order) {
    if (num_vars < 0 || num_vars > 16)
        throw InvalidArgument("jet: number of variables must be in [0, 16], got " +
                              std::to_string(num_vars));
    if (order < 0 || order > 3)
        throw InvalidArgument("jet: order must be in [0, 3], got " + std::to_string(order));
    thread_local std::map<std::pair<int, int>, const JetLayout*> cache;
    const auto key = std::make_pair(num_vars, order);
    if (auto it = cache.find(key); it != cache.end()) return *it->second;

    static std::mutex registry_mutex;
    static std::map<std::pair<int, int>, std::unique_ptr<JetLayout>> registry;
    std::lock_guard<std::mutex> lock(registry_mutex);
    auto it = registry.find(key);
    if (it == registry.end())
        it = registry.emplace(key, std::make_unique<JetLayout>(build_layout(num_vars, order))).first;
    cache[key] = it->second.get();
    return *it->second;
}

} // namespace detail

class Jet {
public:
    Jet() : layout_(&detail::layout_for(0, 0)), c_(1, 0.0) {}

    static Jet constant(double v, int num_vars, int order) {
        Jet j(detail::layout_for(num_vars, order));
        j.c_[0] = v;
        return j;
    }

    // Seeds the jet of the coordinate function x_index at a base point.
    static Jet variable(int index, double base_value, int num_vars, int order) {
        if (index < 0 || index >= num_vars)
            throw InvalidArgument("jet: variable index " + std::to_string(index) +
                                  " out of range for " + std::to_string(num_vars) + " variables");
        Jet j(detail::layout_for(num_vars, order));
        j.c_[0] = base_value;
        if (order >= 1) j.c_[1 + index] = 1.0;  // degree-1 block starts at slot 1
        return j;
    }

    int num_vars() const { return layout_->num_vars; }
    int order() const { return layout_->order; }
    double value() const { return c_[0]; }

    // True partial derivative d^alpha f (the stored coefficient times alpha!).
    double partial(std::span<const int> alpha) const {
        if (static_cast<int>(alpha.size()) != num_vars())
            throw InvalidArgument("jet: partial() multi-index has wrong length");
        int deg = 0;
        for (int e : alpha) {
            if (e < 0) throw InvalidArgument("jet: negative exponent in multi-index");
            deg += e;
        }
        if (deg > order())
            throw InvalidArgument("jet: requested derivative of degree " + std::to_string(deg) +
                                  " from an order-" + std::to_string(order()) + " jet");
        const auto it = layout_->slot_of.find(std::vector<int>(alpha.begin(), alpha.end()));
        const int s = it->second;
        return c_[s] * layout_->factorial[s];
    }
    double partial(std::initializer_list<int> alpha) const {
        return partial(std::span<const int>(alpha.begin(), alpha.size()));
    }
    double d1(int i) const { return partial_by_vars({i}); }
    double d2(int i, int j) const { return partial_by_vars({i, j}); }
    double d3(int i, int j, int k) const { return partial_by_vars({i, j, k}); }

    bool finite() const {
        for (double c : c_)
            if (!std::isfinite(c)) return false;
        return true;
    }

    Jet& operator+=(const Jet& o) {
        check_shape(o);
        for (std::size_t s = 0; s < c_.size(); ++s) c_[s] += o.c_[s];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        check_shape(o);
        for (std::size_t s = 0; s < c_.size(); ++s) c_[s] -= o.c_[s];
        return *this;
    }
    Jet& operator*=(double k) {
        for (double& c : c_) c *= k;
        return *this;
    }
    Jet& operator+=(double k) { c_[0] += k; return *this; }
    Jet& operator-=(double k) { c_[0] -= k; return *this; }
    Jet& operator/=(double k) { return *this *= 1.0 / k; }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator+(Jet a, double k) { return a += k; }
    friend Jet operator+(double k, Jet a) { return a += k; }
    friend Jet operator-(Jet a, double k) { return a -= k; }
    friend Jet operator-(double k, const Jet& a) { return (-a) + k; }
    friend Jet operator*(Jet a, double k) { return a *= k; }
    friend Jet operator*(double k, Jet a) { return a *= k; }
    friend Jet operator/(Jet a, double k) { return a /= k; }
    friend Jet operator-(const Jet& a) {
        Jet r = a;
        for (double& c : r.c_) c = -c;
        return r;
    }

    friend Jet operator*(const Jet& a, const Jet& b) {
        a.check_shape(b);
        Jet r = zeros_like(a);
        for (const auto& t : a.layout_->product) r.c_[t.dst] += a.c_[t.a] * b.c_[t.b];
        return r;
    }

    // Truncated quotient via the coefficient recurrence (b*q)_alpha = a_alpha,
    // solved in graded order so every needed q-coefficient is already known.
    friend Jet operator/(const Jet& a, const Jet& b) {
        a.check_shape(b);
        if (b.c_[0] == 0.0) throw DomainError("divide: jet divisor has zero value part");
        Jet q = zeros_like(a);
        const int slots = a.layout_->slots();
        for (int k = 0; k < slots; ++k) {
            double s = a.c_[k];
            for (const auto& [i, j] : a.layout_->quotient[k]) s -= b.c_[i] * q.c_[j];
            q.c_[k] = s / b.c_[0];
        }
        q.ensure_finite("divide", b.c_[0]);
        return q;
    }
    friend Jet operator/(double k, const Jet& a) {
        return Jet::constant(k, a.num_vars(), a.order()) / a;
    }

    friend Jet jet_derivative(const Jet& a, int var) {
        if (var < 0 || var >= a.num_vars())
            throw InvalidArgument("jet_derivative: variable index out of range");
        if (a.order() == 0)
            throw InvalidArgument("jet_derivative: cannot differentiate an order-0 jet");
        Jet d(detail::layout_for(a.num_vars(), a.order() - 1));
        for (const auto& t : a.layout_->derivative[var]) d.c_[t.dst] += a.c_[t.src] * t.weight;
        return d;
    }

    friend Jet truncate(const Jet& a, int new_order) {
        if (new_order < 0 || new_order > a.order())
            throw InvalidArgument("truncate: target order must be in [0, jet order]");
        Jet t(detail::layout_for(a.num_vars(), new_order));
        std::copy_n(a.c_.begin(), t.c_.size(), t.c_.begin());
        return t;
    }

    // Re-expresses the jet over a larger variable set; variable i of the source
    // becomes variable var_offset + i of the result.
    friend Jet embed(const Jet& a, int new_num_vars, int var_offset) {
        if (var_offset < 0 || var_offset + a.num_vars() > new_num_vars)
            throw InvalidArgument("embed: variable window does not fit the target variable set");
        Jet r(detail::layout_for(new_num_vars, a.order()));
        std::vector<int> target(new_num_vars, 0);
        for (int s = 0; s < a.layout_->slots(); ++s) {
            std::fill(target.begin(), target.end(), 0);
            for (int v = 0; v < a.num_vars(); ++v) target[var_offset + v] = a.layout_->exponents[s][v];
            r.c_[r.layout_->slot_of.at(target)] = a.c_[s];
        }
        return r;
    }

    // --- elementary functions -------------------------------------------------

    friend Jet sin(const Jet& g) {
        const double v = g.value();
        return g.composed({std::sin(v), std::cos(v), -std::sin(v) / 2.0, -std::cos(v) / 6.0}, "sin");
    }
    friend Jet cos(const Jet& g) {
        const double v = g.value();
        return g.composed({std::cos(v), -std::sin(v), -std::cos(v) / 2.0, std::sin(v) / 6.0}, "cos");
    }
    friend Jet tan(const Jet& g) {
        const double v = g.value();
        if (std::abs(std::cos(v)) < 1e-12)
            throw DomainError("tan: domain violation at value " + std::to_string(v));
        const double t = std::tan(v);
        const double u = 1.0 + t * t;
        return g.composed({t, u, t * u, u * (1.0 + 3.0 * t * t) / 3.0}, "tan");
    }
    friend Jet atan(const Jet& g) {
        const double v = g.value();
        const double d = 1.0 / (1.0 + v * v);
        return g.composed({std::atan(v), d, -v * d * d, (3.0 * v * v - 1.0) * d * d * d / 3.0}, "atan");
    }
    friend Jet exp(const Jet& g) {
        const double e = std::exp(g.value());
        return g.composed({e, e, e / 2.0, e / 6.0}, "exp");
    }
    friend Jet log(const Jet& g) {
        const double v = g.value();
        if (v <= 0.0) throw DomainError("log: domain violation at value " + std::to_string(v));
        return g.composed({std::log(v), 1.0 / v, -0.5 / (v * v), 1.0 / (3.0 * v * v * v)}, "log");
    }
    friend Jet sqrt(const Jet& g) {
        const double v = g.value();
        if (v <= 0.0) throw DomainError("sqrt: domain violation at value " + std::to_string(v));
        const double r = std::sqrt(v);
        return g.composed({r, 0.5 / r, -1.0 / (8.0 * v * r), 1.0 / (16.0 * v * v * r)}, "sqrt");
    }

    // g^p for a constant exponent.  Integer exponents go through repeated
    // multiplication and tolerate any base value (negative powers require a
    // nonzero value part); fractional exponents require a positive value part.
    friend Jet pow(const Jet& g, double p) {
        const double rounded = std::nearbyint(p);
        if (p == rounded && std::abs(p) <= 64.0) {
            const long n = static_cast<long>(rounded);
            if (n == 0) return Jet::constant(1.0, g.num_vars(), g.order());
            if (n < 0 && g.value() == 0.0)
                throw DomainError("pow: negative exponent at jet with zero value part");
            Jet acc = Jet::constant(1.0, g.num_vars(), g.order());
            Jet base = g;
            for (long k = std::labs(n); k > 0; k >>= 1) {
                if (k & 1) acc = acc * base;
                if (k > 1) base = base * base;
            }
            if (n < 0) acc = Jet::constant(1.0, g.num_vars(), g.order()) / acc;
            acc.ensure_finite("pow", g.value());
            return acc;
        }
        const double v = g.value();
        if (v <= 0.0)
            throw DomainError("pow: fractional exponent " + std::to_string(p) +
                              " at non-positive value " + std::to_string(v));
        const double f0 = std::pow(v, p);
        return g.composed({f0,
                           p * f0 / v,
                           p * (p - 1.0) * f0 / (v * v) / 2.0,
                           p * (p - 1.0) * (p - 2.0) * f0 / (v * v * v) / 6.0},
                          "pow");
    }

private:
    explicit Jet(const detail::JetLayout& lay) : layout_(&lay), c_(lay.slots(), 0.0) {}

    static Jet zeros_like(const Jet& a) { return Jet(*a.layout_); }

    void check_shape(const Jet& o) const {
        if (layout_ != o.layout_)
            throw InvalidArgument("jet: operands have different variable counts or orders (" +
                                  std::to_string(num_vars()) + "/" + std::to_string(order()) +
                                  " vs " + std::to_string(o.num_vars()) + "/" +
                                  std::to_string(o.order()) + ")");
    }

    void ensure_finite(const char* fn, double at) const {
        if (!finite())
            throw DomainError(std::string(fn) + ": non-finite jet coefficients at value " +
                              std::to_string(at));
    }

    double partial_by_vars(std::initializer_list<int> vars) const {
        std::vector<int> alpha(static_cast<std::size_t>(num_vars()), 0);
        for (int v : vars) {
            if (v < 0 || v >= num_vars())
                throw InvalidArgument("jet: derivative variable index out of range");
            alpha[static_cast<std::size_t>(v)] += 1;
        }
        return partial(std::span<const int>(alpha));
    }

    // Truncated composition f(g) by Horner evaluation in ghat = g - g(0);
    // taylor[k] = f^(k)(g value)/k!.
    Jet composed(const std::array<double, 4>& taylor, const char* fn) const {
        Jet ghat = *this;
        ghat.c_[0] = 0.0;
        Jet r = Jet::constant(taylor[static_cast<std::size_t>(order())], num_vars(), order());
        for (int k = order() - 1; k >= 0; --k) {
            r = r * ghat;
            r.c_[0] += taylor[static_cast<std::size_t>(k)];
        }
        r.ensure_finite(fn, value());
        return r;
    }

    const detail::JetLayout* layout_;
    std::vector<double> c_;
};

// Seeds one jet per coordinate of a chart point.
inline std::vector<Jet> jet_point(std::span<const double> p, int order) {
    const int n = static_cast<int>(p.size());
    std::vector<Jet> vars;
    vars.reserve(p.size());
    for (int i = 0; i < n; ++i) vars.push_back(Jet::variable(i, p[i], n, order));
    return vars;
}

} // namespace rsm
