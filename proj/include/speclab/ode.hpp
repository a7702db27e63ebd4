#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "speclab/bundle.hpp"
#include "speclab/errors.hpp"
#include "speclab/fourier.hpp"

namespace speclab {

// Exact spectral norm of a 2x2 matrix [[a,b],[c,d]].
inline double spectral_norm_2x2(double a, double b, double c, double d) {
    const double q11 = a * a + c * c;
    const double q22 = b * b + d * d;
    const double q12 = a * b + c * d;
    const double tr = q11 + q22;
    const double disc = std::sqrt(std::max(0.0, (q11 - q22) * (q11 - q22) + 4.0 * q12 * q12));
    return std::sqrt(0.5 * (tr + disc));
}

// Growth certificate for one spectral parameter. The first-order system is
// taken in the lambda-adapted state z = (v, v'/s) with s = <lambda>^(1/2),
// whose system matrix is Phi(x) = [[0, s], [a(x)/s, a1(x)]], a = a0 + g*lambda.
// M is the sup of ||Phi|| over the interval, so |z(x)| <= e^(M|x-x0|) is a
// theorem; C_x0 = M / <lambda>^(1/2) is the lambda-free constant.
struct GrowthCertificate {
    double M = 0.0;
    double C_x0 = 0.0;
    double bracket = 0.0;  // <lambda>
    bool certified = false;
    double worst_ratio = 0.0;
};

struct SpectralODESolution {
    double lambda = 1.0;
    double x0 = 0.0;
    double radius = 0.0;
    double scale_s = 1.0;  // <lambda>^(1/2)
    Vector x;              // 2*ns+1 ascending samples, x[ns] = x0
    Vector v;              // stored values; true v = v * exp(log_scale)
    Vector dv;
    Vector log_scale;  // 0 unless the overflow guard rescaled the state
    bool rescaled = false;
    bool complete = true;
    GrowthCertificate certificate;

    int center() const { return (static_cast<int>(x.size()) - 1) / 2; }

    double v_at(int i) const { return v[i] * std::exp(log_scale[i]); }
    double dv_at(int i) const { return dv[i] * std::exp(log_scale[i]); }

    // |z(x_i)| in the stored (possibly rescaled) state.
    double state_norm(int i) const {
        const double z2 = dv[i] / scale_s;
        return std::sqrt(v[i] * v[i] + z2 * z2);
    }
};

namespace detail {

struct OdeCoeffs {
    ScalarFn a1;
    ScalarFn a;  // a0 + g*lambda
    double s;    // <lambda>^(1/2)

    // z' = Phi_s(x) z in the adapted state.
    void rhs(double x, const double z[2], double out[2]) const {
        const double q = a(x) / s;
        out[0] = s * z[1];
        out[1] = q * z[0] + a1(x) * z[1];
    }

    double phi_norm(double x) const { return spectral_norm_2x2(0.0, s, a(x) / s, a1(x)); }
};

// Dormand-Prince 5(4) step; returns 5th-order result and the embedded error.
inline void dp45_step(const OdeCoeffs& c, double x, const double z[2], double h, double mu,
                      int dir, double out[2], double err[2]) {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    static constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9;

    auto f = [&](double xx, const double zz[2], double k[2]) {
        c.rhs(xx, zz, k);
        // overflow-guard drift: integrate z * exp(-mu*dir*(x - x0))
        k[0] -= dir * mu * zz[0];
        k[1] -= dir * mu * zz[1];
    };
    double k1[2], k2[2], k3[2], k4[2], k5[2], k6[2], k7[2], t[2];
    f(x, z, k1);
    for (int i = 0; i < 2; ++i) t[i] = z[i] + h * a21 * k1[i];
    f(x + c2 * h, t, k2);
    for (int i = 0; i < 2; ++i) t[i] = z[i] + h * (a31 * k1[i] + a32 * k2[i]);
    f(x + c3 * h, t, k3);
    for (int i = 0; i < 2; ++i) t[i] = z[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f(x + c4 * h, t, k4);
    for (int i = 0; i < 2; ++i)
        t[i] = z[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f(x + c5 * h, t, k5);
    for (int i = 0; i < 2; ++i)
        t[i] = z[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    f(x + h, t, k6);
    for (int i = 0; i < 2; ++i)
        out[i] = z[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    f(x + h, out, k7);
    for (int i = 0; i < 2; ++i)
        err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
}

// Adaptive march from x to x_target, PI step control, relative error per
// unit step <= tol. Returns false on step-size underflow.
inline bool march_to(const OdeCoeffs& c, double& x, double z[2], double x_target, double tol,
                     double mu, int dir) {
    double h = dir * std::min(std::abs(x_target - x), 1e-2 / std::max(1.0, c.phi_norm(x)));
    double err_prev = 1.0;
    int rejects_in_row = 0;
    while (dir * (x_target - x) > 1e-15 * std::max(1.0, std::abs(x_target))) {
        if (dir * (x + h) > dir * x_target) h = x_target - x;
        double znew[2], err[2];
        dp45_step(c, x, z, h, mu, dir, znew, err);
        const double scale =
            std::max({std::abs(z[0]), std::abs(z[1]), std::abs(znew[0]), std::abs(znew[1]), 1e-8});
        const double enorm =
            std::sqrt(err[0] * err[0] + err[1] * err[1]) / (tol * std::abs(h) * scale);
        if (enorm <= 1.0 || std::abs(h) <= 1e-14 * std::max(1.0, std::abs(x))) {
            if (enorm > 1.0) return false;  // forced minimal step still too coarse
            x += h;
            z[0] = znew[0];
            z[1] = znew[1];
            // PI controller (orders 5/4)
            const double fac = 0.9 * std::pow(std::max(enorm, 1e-10), -0.7 / 5.0) *
                               std::pow(std::max(err_prev, 1e-10), 0.4 / 5.0);
            h *= std::min(5.0, std::max(0.2, fac));
            err_prev = std::max(enorm, 1e-10);
            rejects_in_row = 0;
        } else {
            h *= std::max(0.1, 0.9 * std::pow(enorm, -1.0 / 5.0));
            if (++rejects_in_row > 60) return false;
        }
    }
    return true;
}

}  // namespace detail

inline GrowthCertificate certify_growth(const SpectralODESolution& sol);

// Integrate v'' = a1 v' + (a0 + g*lambda) v with v(x0)=1, v'(x0)=0 over
// [x0-r, x0+r]; 2*samples_per_side+1 sample points. The bundle must be
// a2-normalized. When M*r > 500 the rescaled state is integrated instead of
// the raw one and log_scale carries the removed exponent.
inline SpectralODESolution solve_ivp(const CoefficientBundleX& bundle, double lambda, double r,
                                     double tol, int samples_per_side = 64) {
    if (lambda < 1.0) throw SchemaError("solve_ivp: lambda must be >= 1");
    if (!(r > 0.0)) throw SchemaError("solve_ivp: radius must be positive");
    if (tol < 1e-12 || tol > 1e-4) throw SchemaError("solve_ivp: tol outside [1e-12, 1e-4]");
    for (double t : {-r, -0.37 * r, 0.0, 0.61 * r, r})
        if (std::abs(bundle.a2(bundle.x0 + t) - 1.0) > 1e-12)
            throw SchemaError("solve_ivp: bundle is not a2-normalized");

    SpectralODESolution sol;
    sol.lambda = lambda;
    sol.x0 = bundle.x0;
    sol.radius = r;
    sol.scale_s = std::sqrt(jap_bracket(lambda));

    detail::OdeCoeffs c;
    c.a1 = bundle.a1;
    c.a = [a0 = bundle.a0, g = bundle.g, lambda](double x) { return a0(x) + g(x) * lambda; };
    c.s = sol.scale_s;

    // sup ||Phi|| over a fine sweep; tiny inflation covers points between
    // sweep nodes so the certificate stays a true upper bound.
    const int msw = 8 * samples_per_side;
    double M = 0.0;
    for (int i = 0; i <= msw; ++i)
        M = std::max(M, c.phi_norm(bundle.x0 - r + 2.0 * r * i / msw));
    M *= 1.0 + 1e-6;

    sol.rescaled = M * r > 500.0;
    const double mu = sol.rescaled ? M : 0.0;

    const int ns = samples_per_side;
    const int total = 2 * ns + 1;
    sol.x.resize(total);
    sol.v.resize(total);
    sol.dv.resize(total);
    sol.log_scale = Vector::Zero(total);
    for (int i = 0; i < total; ++i) sol.x[i] = bundle.x0 + r * (i - ns) / ns;
    sol.x[ns] = bundle.x0;
    sol.v[ns] = 1.0;
    sol.dv[ns] = 0.0;

    for (int dir : {+1, -1}) {
        double x = bundle.x0;
        double z[2] = {1.0, 0.0};
        for (int step = 1; step <= ns; ++step) {
            const int idx = ns + dir * step;
            if (!detail::march_to(c, x, z, sol.x[idx], tol, mu, dir)) {
                sol.complete = false;
                for (int j = step; j <= ns; ++j) {
                    sol.v[ns + dir * j] = std::nan("");
                    sol.dv[ns + dir * j] = std::nan("");
                }
                break;
            }
            sol.v[idx] = z[0];
            sol.dv[idx] = sol.scale_s * z[1];
            sol.log_scale[idx] = mu * std::abs(sol.x[idx] - bundle.x0);
        }
        if (!sol.complete) break;
    }

    sol.certificate.M = M;
    sol.certificate.bracket = jap_bracket(lambda);
    sol.certificate.C_x0 = M / sol.scale_s;
    if (sol.complete) sol.certificate = certify_growth(sol);
    return sol;
}

// Checks |z(x)| <= e^(M|x-x0|) at every sample (in the stored scaling) and
// records the worst ratio. A violation marks the certificate failed.
inline GrowthCertificate certify_growth(const SpectralODESolution& sol) {
    if (!sol.complete)
        throw CertificateError("certify_growth: solution is incomplete (stiffness budget)");
    GrowthCertificate cert = sol.certificate;
    cert.worst_ratio = 0.0;
    cert.certified = true;
    for (int i = 0; i < sol.x.size(); ++i) {
        const double budget = cert.M * std::abs(sol.x[i] - sol.x0) - sol.log_scale[i];
        const double bound = std::exp(budget);
        const double ratio = sol.state_norm(i) / bound;
        cert.worst_ratio = std::max(cert.worst_ratio, ratio);
        if (ratio > 1.0 + 1e-10) cert.certified = false;
    }
    return cert;
}

struct CascadeResult {
    int order = 0;
    Vector values;      // stored scale: true derivative = values * exp(log_scale)
    double M_eff = 0.0;  // max over Phi and its needed derivatives
    bool certified = false;
    double worst_ratio = 0.0;
};

namespace detail {

inline double fd1(const ScalarFn& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}
inline double fd2(const ScalarFn& f, double x, double h) {
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}
inline double coeff_deriv(const ScalarFn& f, double x, int order) {
    const double h = 1e-4;
    switch (order) {
        case 0: return f(x);
        case 1: return fd1(f, x, h);
        case 2: return fd2(f, x, h);
        default: {
            // third derivative, central
            const double hh = 1e-3;
            return (f(x + 2 * hh) - 2 * f(x + hh) + 2 * f(x - hh) - f(x - 2 * hh)) /
                   (2 * hh * hh * hh);
        }
    }
}

}  // namespace detail

// d^k v via the differentiated ODE relation v'' = a1 v' + a v (Leibniz on the
// right-hand side). Certified against C(k) (1+M)^k e^(M|x-x0|) with
// C = {1,1,2,4,8}; coefficient derivatives come from finite differences.
inline CascadeResult derivative_cascade(const SpectralODESolution& sol,
                                        const CoefficientBundleX& bundle, int k) {
    if (k < 1 || k > 4) throw SchemaError("derivative_cascade: order must be in [1,4]");
    if (!sol.complete) throw CertificateError("derivative_cascade: incomplete solution");

    const ScalarFn a = [a0 = bundle.a0, g = bundle.g, lam = sol.lambda](double x) {
        return a0(x) + g(x) * lam;
    };
    const int n = static_cast<int>(sol.x.size());
    std::vector<Vector> d(k + 1);  // d[m] = stored-scale samples of v^(m)
    d[0] = sol.v;
    if (k >= 1) d[1] = sol.dv;
    for (int m = 2; m <= k; ++m) {
        d[m].resize(n);
        for (int i = 0; i < n; ++i) {
            const double x = sol.x[i];
            double acc = 0.0;
            double binom = 1.0;
            for (int j = 0; j <= m - 2; ++j) {
                acc += binom * (detail::coeff_deriv(bundle.a1, x, j) * d[m - 1 - j][i] +
                                detail::coeff_deriv(a, x, j) * d[m - 2 - j][i]);
                binom = binom * (m - 2 - j) / (j + 1);
            }
            d[m][i] = acc;
        }
    }

    CascadeResult res;
    res.order = k;
    res.values = d[k];

    // M_eff also dominates the derivatives of Phi that the bound needs.
    double meff = sol.certificate.M;
    const double s = sol.scale_s;
    for (int j = 1; j <= k - 1; ++j) {
        for (int i = 0; i < n; ++i) {
            const double dq = detail::coeff_deriv(a, sol.x[i], j) / s;
            const double da1 = detail::coeff_deriv(bundle.a1, sol.x[i], j);
            meff = std::max(meff, std::sqrt(dq * dq + da1 * da1));
        }
    }
    res.M_eff = meff;

    static constexpr double ck[5] = {1.0, 1.0, 2.0, 4.0, 8.0};
    res.certified = true;
    for (int i = 0; i < n; ++i) {
        const double bound =
            ck[k] * std::pow(1.0 + meff, k) *
            std::exp(meff * std::abs(sol.x[i] - sol.x0) - sol.log_scale[i]);
        const double ratio = std::abs(res.values[i]) / bound;
        res.worst_ratio = std::max(res.worst_ratio, ratio);
        if (ratio > 1.0 + 1e-8) res.certified = false;
    }
    return res;
}

// Least-squares slope of log M against log lambda; the <lambda>^(1/2) shape
// shows up as a slope near 1/2 whenever g is somewhere positive.
inline double growth_scaling_slope(const CoefficientBundleX& bundle,
                                   const std::vector<double>& lambdas, double r, double tol) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(lambdas.size());
    for (double lam : lambdas) {
        auto sol = solve_ivp(bundle, lam, r, tol, 16);
        const double lx = std::log(lam);
        const double ly = std::log(sol.certificate.M);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace speclab
