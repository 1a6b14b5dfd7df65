#pragma once

// Test oracles: long-double central differences applied to plain callables.
// Deliberately independent of the jet code path — derivatives here come from
// difference quotients of function values, never from Taylor arithmetic.
// Long double keeps the order-3 stencil roundoff (~eps/h^3) far below the
// tolerances the tests assert.

#include <functional>
#include <span>
#include <vector>

namespace oracle {

using Func = std::function<long double(std::span<const long double>)>;

// Mixed partial d/dx_{vars[0]} ... d/dx_{vars[k-1]} f at p, each factor a
// central difference of step h.  2^k evaluations, k <= 3 in practice.
inline long double nth_partial(const Func& f, std::vector<long double> p,
                               std::vector<int> vars, long double h = 1e-4L) {
    if (vars.empty()) return f(std::span<const long double>(p));
    const int v = vars.back();
    vars.pop_back();
    std::vector<long double> plus = p, minus = p;
    plus[static_cast<std::size_t>(v)] += h;
    minus[static_cast<std::size_t>(v)] -= h;
    return (nth_partial(f, plus, vars, h) - nth_partial(f, minus, vars, h)) / (2.0L * h);
}

} // namespace oracle
