#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "speclab/errors.hpp"

namespace speclab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

// <x> = sqrt(e^2 + x^2), so log<x> >= 1 everywhere.
inline double jap_bracket(double x) {
    return std::sqrt(std::numbers::e * std::numbers::e + x * x);
}

inline double jap_bracket2(double x2) {
    return std::sqrt(std::numbers::e * std::numbers::e + x2);
}

namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 Cooley-Tukey. sign = -1 forward.
inline void fft_pow2(std::vector<Complex>& a, int sign) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        const Complex wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            Complex w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                Complex u = a[i + k];
                Complex v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// O(n^2) fallback for grids that are not a power of two. All grids in this
// project are small enough that this is never a bottleneck.
inline std::vector<Complex> dft_direct(const std::vector<Complex>& a, int sign) {
    const std::size_t n = a.size();
    std::vector<Complex> out(n, Complex(0, 0));
    for (std::size_t m = 0; m < n; ++m) {
        Complex acc(0, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const double ang = sign * 2.0 * std::numbers::pi *
                               static_cast<double>(m) * static_cast<double>(i) /
                               static_cast<double>(n);
            acc += a[i] * Complex(std::cos(ang), std::sin(ang));
        }
        out[m] = acc;
    }
    return out;
}

}  // namespace detail

// Unnormalized forward transform: F_m = sum_i a_i exp(-2 pi i m i / n).
inline std::vector<Complex> fft_forward(std::vector<Complex> a) {
    if (detail::is_pow2(a.size())) {
        detail::fft_pow2(a, -1);
        return a;
    }
    return detail::dft_direct(a, -1);
}

inline std::vector<Complex> fft_inverse(std::vector<Complex> a) {
    if (detail::is_pow2(a.size())) {
        detail::fft_pow2(a, +1);
    } else {
        a = detail::dft_direct(a, +1);
    }
    for (auto& z : a) z /= static_cast<double>(a.size());
    return a;
}

// Fourier-side description of a real periodic sequence: coefficients c_m with
// u_i = sum_m c_m exp(2 pi i m i / n), frequencies xi_m = 2 pi m / period
// (signed, m in [-n/2, n/2)), and the Parseval weight `period` such that
// ||u||_{L^2}^2 = h sum |u_i|^2 = period * sum |c_m|^2.
struct Spectrum {
    std::vector<Complex> coeff;
    std::vector<double> freq;
    double period = 0.0;

    std::size_t size() const { return coeff.size(); }

    double l2_norm2() const {
        double s = 0.0;
        for (const auto& c : coeff) s += std::norm(c);
        return period * s;
    }

    // || m(xi) u ||^2 for a scalar multiplier.
    template <class Mult>
    double weighted_norm2(Mult&& m) const {
        double s = 0.0;
        for (std::size_t i = 0; i < coeff.size(); ++i) {
            const double w = m(freq[i]);
            s += w * w * std::norm(coeff[i]);
        }
        return period * s;
    }
};

// Treats `u` as one period of an h-spaced sequence (period = n*h).
inline Spectrum analyze(const Vector& u, double h) {
    const std::size_t n = static_cast<std::size_t>(u.size());
    std::vector<Complex> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = Complex(u[static_cast<Eigen::Index>(i)], 0.0);
    a = fft_forward(std::move(a));
    Spectrum sp;
    sp.period = h * static_cast<double>(n);
    sp.coeff.resize(n);
    sp.freq.resize(n);
    for (std::size_t m = 0; m < n; ++m) {
        sp.coeff[m] = a[m] / static_cast<double>(n);
        const double ms = (m <= n / 2) ? static_cast<double>(m)
                                       : static_cast<double>(m) - static_cast<double>(n);
        sp.freq[m] = 2.0 * std::numbers::pi * ms / sp.period;
    }
    return sp;
}

inline double l2_norm(const Vector& u, double h) { return std::sqrt(h * u.squaredNorm()); }

// || <xi>^s u ||, with the bracket base selectable: base e (the jap bracket)
// for the operator-adapted estimates, base 1 for the classical Sobolev chain.
inline double sobolev_norm(const Spectrum& sp, double s, double base) {
    double acc = 0.0;
    for (std::size_t i = 0; i < sp.size(); ++i) {
        const double b2 = base * base + sp.freq[i] * sp.freq[i];
        acc += std::pow(b2, s) * std::norm(sp.coeff[i]);
    }
    return std::sqrt(sp.period * acc);
}

}  // namespace speclab
