#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "speclab/errors.hpp"
#include "speclab/fourier.hpp"
#include "speclab/grid.hpp"
#include "speclab/ode.hpp"
#include "speclab/operator.hpp"
#include "speclab/spectral.hpp"

namespace speclab {

// w(x, y) = sum_k  c_k * weight_k * v_{lambda_k}(x) * e_k(y), where weight_k
// collects the band multipliers psi_j(lambda_k) over the selected bands and
// every retained mode carries a growth certificate.
struct SpectralSolution {
    double x0 = 0.0;
    double radius = 0.0;
    double epsilon = 0.0;
    double C_max = 0.0;               // max certified C_x0 over retained modes
    std::vector<int> mode_index;      // indices into the decomposition
    Vector lambdas;                   // retained eigenvalues
    Vector amplitude;                 // c_k * weight_k
    Matrix basis;                     // dofs x retained modes
    std::vector<SpectralODESolution> profiles;  // aligned with mode_index
    double h = 0.0;                   // spatial weight of the y-grid

    int sample_count() const {
        return profiles.empty() ? 0 : static_cast<int>(profiles.front().x.size());
    }
    double x_sample(int i) const { return profiles.front().x[i]; }

    // w(x_i, .) as a dof vector.
    Vector slice(int i) const {
        Vector amp(amplitude.size());
        for (int k = 0; k < amp.size(); ++k) amp[k] = amplitude[k] * profiles[k].v_at(i);
        return basis * amp;
    }
    // d/dx w(x_i, .)
    Vector slice_dx(int i) const {
        Vector amp(amplitude.size());
        for (int k = 0; k < amp.size(); ++k) amp[k] = amplitude[k] * profiles[k].dv_at(i);
        return basis * amp;
    }
};

// Band-filtered null solution. The admissible radius keeps the certified
// growth below e^(epsilon * <lambda>^(1/2) |x-x0| / 2): r = min(eps/(2 Cmax), 1)
// with Cmax collected from radius-1 certificates first.
inline SpectralSolution build_solution(const Vector& u, const BandProjectionSet& bands,
                                       const SpectralDecomposition& dec,
                                       const CoefficientBundleX& bundle,
                                       const std::vector<int>& band_list, double epsilon,
                                       double tol = 1e-10, int samples_per_side = 32) {
    if (!(epsilon > 0.0)) throw SchemaError("build_solution: epsilon must be positive");
    if (band_list.empty()) throw SchemaError("build_solution: band list is empty");
    for (int j : band_list)
        if (j < 0 || j > bands.cutoffs.j_max)
            throw SchemaError("build_solution: band index " + std::to_string(j) +
                              " outside [0, " + std::to_string(bands.cutoffs.j_max) + "]");

    const Vector c = dec.coefficients(u);
    const int n = static_cast<int>(dec.eigenvalues.size());
    Vector weight = Vector::Zero(n);
    for (int j : band_list)
        for (int k = 0; k < n; ++k) weight[k] += bands.weights(j, k);

    std::vector<int> keep;
    for (int k = 0; k < n; ++k)
        if (std::abs(weight[k] * c[k]) > 1e-14) keep.push_back(k);
    if (keep.empty()) throw SchemaError("build_solution: selected bands carry no mass of u");

    // Pass 1: radius-1 growth constants fix the admissible radius.
    detail::OdeCoeffs probe;
    probe.a1 = bundle.a1;
    double c_max = 0.0;
    for (int k : keep) {
        const double lam = dec.eigenvalues[k];
        probe.a = [a0 = bundle.a0, g = bundle.g, lam](double x) { return a0(x) + g(x) * lam; };
        probe.s = std::sqrt(jap_bracket(lam));
        double m = 0.0;
        for (int i = 0; i <= 256; ++i)
            m = std::max(m, probe.phi_norm(bundle.x0 - 1.0 + i / 128.0));
        c_max = std::max(c_max, m * (1.0 + 1e-6) / probe.s);
    }
    const double r = std::min(epsilon / (2.0 * c_max), 1.0);

    SpectralSolution sol;
    sol.x0 = bundle.x0;
    sol.radius = r;
    sol.epsilon = epsilon;
    sol.C_max = c_max;
    sol.h = dec.grid.h();
    sol.mode_index = keep;
    sol.lambdas.resize(static_cast<int>(keep.size()));
    sol.amplitude.resize(static_cast<int>(keep.size()));
    sol.basis.resize(dec.eigenvectors.rows(), static_cast<int>(keep.size()));
    for (int m = 0; m < static_cast<int>(keep.size()); ++m) {
        const int k = keep[m];
        sol.lambdas[m] = dec.eigenvalues[k];
        sol.amplitude[m] = weight[k] * c[k];
        sol.basis.col(m) = dec.eigenvectors.col(k);
        auto profile = solve_ivp(bundle, dec.eigenvalues[k], r, tol, samples_per_side);
        if (!profile.complete || !profile.certificate.certified)
            throw CertificateError("build_solution: mode lambda=" +
                                   std::to_string(dec.eigenvalues[k]) +
                                   " failed its growth certificate");
        sol.profiles.push_back(std::move(profile));
    }
    return sol;
}

struct ResidualReport {
    double analytic = 0.0;  // x-derivatives from the ODE relation; isolates B e_k - lambda_k e_k
    double fd = 0.0;        // d_xx replaced by a second difference in x
    double fd_step = 0.0;
    double scale = 0.0;     // max slice norm used for normalization
};

// Relative residual of L w = (-d_xx + a1 d_x + a0 + g(x) B) w over the sample
// slab. op must be the operator the decomposition came from, with its
// positivity shift already inside a0 if one was applied.
inline ResidualReport residual_check(const SpectralSolution& sol, const DiscreteOperator& op,
                                     const CoefficientBundleX& bundle) {
    ResidualReport rep;
    const int ns = sol.sample_count();
    const int m = static_cast<int>(sol.lambdas.size());
    const double h = sol.h;

    std::vector<Vector> w(ns), wx(ns);
    for (int i = 0; i < ns; ++i) {
        w[i] = sol.slice(i);
        wx[i] = sol.slice_dx(i);
        rep.scale = std::max(rep.scale, l2_norm(w[i], h));
    }
    const double denom = std::max(rep.scale, 1e-300);

    for (int i = 0; i < ns; ++i) {
        const double x = sol.x_sample(i);
        Vector lam_part(m);
        for (int k = 0; k < m; ++k)
            lam_part[k] = sol.amplitude[k] * sol.lambdas[k] * sol.profiles[k].v_at(i);
        // -wxx + a1 wx + (a0 + g B) w collapses to g * (B w - sum lambda_k c_k v_k e_k)
        const Vector analytic = bundle.g(x) * (op.matrix * w[i] - sol.basis * lam_part);
        rep.analytic = std::max(rep.analytic, l2_norm(analytic, h) / denom);
    }

    if (ns >= 3) {
        const double dx = sol.x_sample(1) - sol.x_sample(0);
        rep.fd_step = dx;
        for (int i = 1; i + 1 < ns; ++i) {
            const double x = sol.x_sample(i);
            const Vector wxx_fd = (w[i + 1] - 2.0 * w[i] + w[i - 1]) / (dx * dx);
            const Vector res = -wxx_fd + bundle.a1(x) * wx[i] + bundle.a0(x) * w[i] +
                               bundle.g(x) * (op.matrix * w[i]);
            rep.fd = std::max(rep.fd, l2_norm(res, h) / denom);
        }
    }
    return rep;
}

struct WeightedNorm {
    double value = 0.0;  // || e^(eps sqrt(B)) u || (h-weighted); meaningless if !finite
    bool finite = true;
};

// e^(eps sqrt(B)) applied through the spectral calculus; an exponent past the
// double range is reported as an overflow flag instead of inf.
inline WeightedNorm exponential_weight(const SpectralDecomposition& dec, const Vector& u,
                                       double eps) {
    if (eps < 0.0) throw SchemaError("exponential_weight: eps must be nonnegative");
    WeightedNorm out;
    const Vector c = dec.coefficients(u);
    double acc = 0.0;
    for (int k = 0; k < c.size(); ++k) {
        const double expo = eps * std::sqrt(dec.eigenvalues[k]);
        if (expo > 700.0 && std::abs(c[k]) > 1e-300) {
            out.finite = false;
            return out;
        }
        const double t = std::exp(std::min(expo, 700.0)) * c[k];
        acc += t * t;
    }
    out.value = std::sqrt(dec.grid.h() * acc);
    return out;
}

}  // namespace speclab
