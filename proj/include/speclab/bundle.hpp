#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "speclab/errors.hpp"

namespace speclab {

using ScalarFn = std::function<double(double)>;

inline ScalarFn constant_fn(double c) {
    return [c](double) { return c; };
}

// The degeneracy weight exp(-1/|t|^(1-kappa)), extended by its limit 0 at
// t = 0 (for kappa < 1).
inline ScalarFn kusuoka_weight(double kappa) {
    if (!(kappa < 1.0)) throw SchemaError("kusuoka weight needs kappa < 1");
    const double p = 1.0 - kappa;
    return [p](double t) {
        const double a = std::abs(t);
        if (a == 0.0) return 0.0;
        return std::exp(-1.0 / std::pow(a, p));
    };
}

// g(t) = t^(2p): polynomial degeneracy with an isolated zero.
inline ScalarFn power_weight(double p) {
    return [p](double t) { return std::pow(t * t, p); };
}

// Coefficient bundle of the x-direction: the operator
//   -a2(x) d^2/dx^2 + a1(x) d/dx + a0(x) + g(x) * (y-operator).
struct CoefficientBundleX {
    ScalarFn a2 = constant_fn(1.0);
    ScalarFn a1 = constant_fn(0.0);
    ScalarFn a0 = constant_fn(0.0);
    ScalarFn g = constant_fn(0.0);
    double x0 = 0.0;

    // Sanity sweep over [x0-r, x0+r]: a2 must stay positive, g nonnegative.
    void validate(double r, int samples = 257) const {
        for (int i = 0; i < samples; ++i) {
            const double x = x0 - r + 2.0 * r * i / (samples - 1);
            if (!(a2(x) > 0.0))
                throw SchemaError("coefficient bundle: a2 <= 0 at x=" + std::to_string(x));
            if (g(x) < 0.0)
                throw SchemaError("coefficient bundle: g < 0 at x=" + std::to_string(x));
        }
    }
};

// Divide through by a2 so the principal coefficient is identically one.
inline CoefficientBundleX normalize_a2(const CoefficientBundleX& in, double r = 1.0) {
    in.validate(r);
    CoefficientBundleX out;
    out.x0 = in.x0;
    out.a2 = constant_fn(1.0);
    auto a2 = in.a2;
    out.a1 = [f = in.a1, a2](double x) { return f(x) / a2(x); };
    out.a0 = [f = in.a0, a2](double x) { return f(x) / a2(x); };
    out.g = [f = in.g, a2](double x) { return f(x) / a2(x); };
    return out;
}

}  // namespace speclab
