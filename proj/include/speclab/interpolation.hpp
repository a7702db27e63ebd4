#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "speclab/errors.hpp"
#include "speclab/fourier.hpp"
#include "speclab/grid.hpp"
#include "speclab/operator.hpp"
#include "speclab/spectral.hpp"

namespace speclab {

// alpha_k, k = 0..K, on a common grid, with cached embedded spectra.
struct BandSequence {
    Grid1D grid;
    std::vector<Vector> alpha;
    std::vector<Spectrum> spectra;
    std::vector<double> l2;  // || alpha_k ||

    static BandSequence from(const Grid1D& grid, std::vector<Vector> alpha) {
        if (alpha.empty()) throw SchemaError("BandSequence: no bands");
        BandSequence seq;
        seq.grid = grid;
        seq.alpha = std::move(alpha);
        for (const auto& a : seq.alpha) {
            if (a.size() != grid.dofs()) throw SchemaError("BandSequence: size mismatch");
            seq.spectra.push_back(grid.spectrum_of(a));
            seq.l2.push_back(l2_norm(a, grid.h()));
        }
        return seq;
    }

    int K() const { return static_cast<int>(alpha.size()) - 1; }
};

// e^R = (s2 log<xi> / (2 eps))^2, clamped at R = 0.
inline double split_index(double xi, double s2, double epsilon) {
    if (!(s2 > 0.0) || !(epsilon > 0.0))
        throw SchemaError("split_index: s2 and epsilon must be positive");
    const double arg = s2 * std::log(jap_bracket(xi)) / (2.0 * epsilon);
    return arg > 1.0 ? 2.0 * std::log(arg) : 0.0;
}

struct InterpBound {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;     // lhs / rhs, 0 when both vanish
    double constant = 0.0;  // the explicit constant inside rhs
};

// || sum_{k <= R(xi)} log<xi> alpha_k^(xi) ||^2
//   <= C(eps, s2) sum_k e^{-2 eps sqrt(e^k)} ||alpha_k||^2_{H^{s2}}
// with C = sup_xi log^2<xi> (floor(R)+1) / <xi>^{s2}: for k <= R the weight
// e^{2 eps sqrt(e^k)} <= <xi>^{s2}, and floor(R)+1 counts the Cauchy-Schwarz
// terms (the count, not R itself, is what the inequality needs).
inline InterpBound low_band_inequality(const BandSequence& seq, double s2, double epsilon) {
    if (!(s2 > 0.0) || !(epsilon > 0.0))
        throw SchemaError("low_band_inequality: s2 and epsilon must be positive");
    const std::size_t nf = seq.spectra.front().size();
    const double period = seq.spectra.front().period;

    InterpBound out;
    double lhs = 0.0;
    for (std::size_t i = 0; i < nf; ++i) {
        const double xi = seq.spectra.front().freq[i];
        const double lg = std::log(jap_bracket(xi));
        const int cut = static_cast<int>(std::floor(split_index(xi, s2, epsilon)));
        Complex acc(0.0, 0.0);
        for (int k = 0; k <= std::min(cut, seq.K()); ++k) acc += lg * seq.spectra[k].coeff[i];
        lhs += std::norm(acc);
        out.constant = std::max(out.constant, lg * lg * (cut + 1) /
                                                  std::pow(jap_bracket(xi), s2));
    }
    out.lhs = period * lhs;

    double rhs = 0.0;
    for (int k = 0; k <= seq.K(); ++k) {
        const double hs = sobolev_norm(seq.spectra[k], s2, std::exp(1.0));
        rhs += std::exp(-2.0 * epsilon * std::sqrt(std::exp(k))) * hs * hs;
    }
    out.rhs = out.constant * rhs;
    out.ratio = out.rhs > 0.0 ? out.lhs / out.rhs : 0.0;
    if (out.lhs > out.rhs * (1.0 + 1e-10))
        throw NumericalError("low_band_inequality violated: lhs=" + std::to_string(out.lhs) +
                             " rhs=" + std::to_string(out.rhs));
    return out;
}

// || sum_{k >= R(xi)} log<xi> alpha_k^(xi) ||^2 <= 3 (4 eps/s2)^2 sum_k e^k ||alpha_k||^2.
// Geometric series: the Cauchy-Schwarz weight e^{-k} sums to e/(e-1) at the
// cut, and log<xi> <= (2 eps/s2) e^{ceil(R)/2} there (also under the clamp).
inline InterpBound high_band_inequality(const BandSequence& seq, double s2, double epsilon) {
    if (!(s2 > 0.0) || !(epsilon > 0.0))
        throw SchemaError("high_band_inequality: s2 and epsilon must be positive");
    const std::size_t nf = seq.spectra.front().size();
    const double period = seq.spectra.front().period;

    InterpBound out;
    out.constant = 48.0 * (epsilon / s2) * (epsilon / s2);
    double lhs = 0.0;
    for (std::size_t i = 0; i < nf; ++i) {
        const double xi = seq.spectra.front().freq[i];
        const double lg = std::log(jap_bracket(xi));
        const int cut = static_cast<int>(std::ceil(split_index(xi, s2, epsilon)));
        Complex acc(0.0, 0.0);
        for (int k = cut; k <= seq.K(); ++k) acc += lg * seq.spectra[k].coeff[i];
        lhs += std::norm(acc);
    }
    out.lhs = period * lhs;

    double rhs = 0.0;
    for (int k = 0; k <= seq.K(); ++k) rhs += std::exp(k) * seq.l2[k] * seq.l2[k];
    out.rhs = out.constant * rhs;
    out.ratio = out.rhs > 0.0 ? out.lhs / out.rhs : 0.0;
    if (out.lhs > out.rhs * (1.0 + 1e-10))
        throw NumericalError("high_band_inequality violated: lhs=" + std::to_string(out.lhs) +
                             " rhs=" + std::to_string(out.rhs));
    return out;
}

struct AssemblyReport {
    double epsilon = 0.0;
    double s2 = 0.0;
    double eps_tilde = 0.0;  // split parameter making I <= eps <op u, u>
    double logterm = 0.0;    // || log<D> u ||^2
    double I = 0.0;          // high-band budget, <= eps <op u, u>
    double II = 0.0;         // low-band budget, = measured_C ||u||^2
    double measured_C = 0.0;
    bool holds = false;
    std::vector<double> band_l2;      // e^j ||P_j u||^2
    std::vector<double> band_smooth;  // e^{-2 eps~ sqrt(e^j)} ||P_j u||^2_{H^{s2}}
};

// Assembles || log<D> u ||^2 <= eps <op u, u> + C(eps, s2) ||u||^2 from the two
// band inequalities over alpha_j = P_j u, with eps~ = s2 sqrt(eps / (96 e)) so
// that 2 * 48 (eps~/s2)^2 * e * <op u, u> = eps <op u, u> via the f = sqrt
// operator sandwich.
inline AssemblyReport assemble_theorem(const Vector& u, const DiscreteOperator& op,
                                       const SpectralDecomposition& dec,
                                       const BandProjectionSet& bands, double s2,
                                       double epsilon) {
    if (!(epsilon > 0.0) || !(s2 > 0.0))
        throw SchemaError("assemble_theorem: epsilon and s2 must be positive");
    if (u.size() != op.grid.dofs()) throw SchemaError("assemble_theorem: size mismatch");
    const double h = op.grid.h();
    if (l2_norm(u, h) <= 0.0) throw SchemaError("assemble_theorem: zero test function");

    AssemblyReport rep;
    rep.epsilon = epsilon;
    rep.s2 = s2;
    rep.eps_tilde = s2 * std::sqrt(epsilon / (96.0 * std::exp(1.0)));

    std::vector<Vector> alpha;
    for (int j = 0; j <= bands.cutoffs.j_max; ++j) alpha.push_back(bands.apply(j, u));
    const BandSequence seq = BandSequence::from(op.grid, std::move(alpha));

    const auto low = low_band_inequality(seq, s2, rep.eps_tilde);
    const auto high = high_band_inequality(seq, s2, rep.eps_tilde);

    rep.logterm = [&] {
        const Spectrum sp = op.grid.spectrum_of(u);
        return sp.weighted_norm2([](double xi) { return std::log(jap_bracket(xi)); });
    }();
    // triangle split: logterm <= 2*low.lhs + 2*high.lhs (pointwise in xi)
    const double quad = op.quad_form(u);
    const double u2 = h * u.squaredNorm();

    for (int j = 0; j <= seq.K(); ++j) {
        rep.band_l2.push_back(std::exp(j) * seq.l2[j] * seq.l2[j]);
        const double hs = sobolev_norm(seq.spectra[j], s2, std::exp(1.0));
        rep.band_smooth.push_back(std::exp(-2.0 * rep.eps_tilde * std::sqrt(std::exp(j))) * hs * hs);
    }

    rep.I = epsilon * quad;  // = 2 * high.constant * e * quad by choice of eps_tilde
    rep.II = 2.0 * low.rhs;
    rep.measured_C = rep.II / u2;
    // 2*high.rhs <= 2 * 48(eps~/s2)^2 * e * quad = I via the LP sandwich
    rep.holds = rep.logterm <= rep.I + rep.measured_C * u2 * (1.0 + 1e-10) &&
                rep.logterm <= 2.0 * (low.lhs + high.lhs) * (1.0 + 1e-10) &&
                2.0 * high.rhs <= rep.I * (1.0 + 1e-10) + 1e-300;
    return rep;
}

}  // namespace speclab
