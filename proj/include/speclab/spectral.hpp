#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "speclab/errors.hpp"
#include "speclab/operator.hpp"

namespace speclab {

// Full eigensystem of a DiscreteOperator: ascending eigenvalues, orthonormal
// eigenvector columns. This is the discrete resolution of identity; E_lambda
// is the span of columns with eigenvalue <= lambda.
struct SpectralDecomposition {
    Vector eigenvalues;
    Matrix eigenvectors;
    Grid1D grid;
    double worst_residual = 0.0;

    int size() const { return static_cast<int>(eigenvalues.size()); }

    Vector coefficients(const Vector& u) const { return eigenvectors.transpose() * u; }

    // E_lambda u: project onto eigenspaces with eigenvalue <= lambda
    // (right-continuous in lambda).
    Vector resolution(double lambda, const Vector& u) const {
        Vector c = coefficients(u);
        for (int k = 0; k < size(); ++k)
            if (eigenvalues[k] > lambda) c[k] = 0.0;
        return eigenvectors * c;
    }
};

inline SpectralDecomposition decompose(const DiscreteOperator& op) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(op.matrix);
    if (es.info() != Eigen::Success)
        throw NumericalError("decompose: symmetric eigensolver did not converge");
    SpectralDecomposition dec;
    dec.eigenvalues = es.eigenvalues();
    dec.eigenvectors = es.eigenvectors();
    dec.grid = op.grid;

    double worst = 0.0;
    for (int k = 0; k < dec.size(); ++k) {
        const double r = (op.matrix * dec.eigenvectors.col(k) -
                          dec.eigenvalues[k] * dec.eigenvectors.col(k))
                             .norm() /
                         std::max(1.0, std::abs(dec.eigenvalues[k]));
        worst = std::max(worst, r);
    }
    dec.worst_residual = worst;
    if (worst > 1e-8)
        throw NumericalError("decompose: worst eigen-residual " + std::to_string(worst) +
                             " exceeds 1e-8");
    if (dec.eigenvalues[0] < 1.0 - 1e-10)
        throw NumericalError("decompose: operator not shifted-positive, lambda_1 = " +
                             std::to_string(dec.eigenvalues[0]));
    return dec;
}

// f(B) u = sum_k f(lambda_k) <u, e_k> e_k.
inline Vector apply_function(const std::function<double(double)>& f,
                             const SpectralDecomposition& dec, const Vector& u) {
    Vector c = dec.coefficients(u);
    for (int k = 0; k < dec.size(); ++k) {
        const double fv = f(dec.eigenvalues[k]);
        if (!std::isfinite(fv))
            throw NumericalError("apply_function: f not finite at eigenvalue " +
                                 std::to_string(dec.eigenvalues[k]));
        c[k] *= fv;
    }
    return dec.eigenvectors * c;
}

// Smooth even cutoff: 1 on [-1,1], 0 outside [-e,e], glued by the standard
// exp(-1/s) partition on the transition band.
inline double cutoff_phi(double t) {
    const double a = std::abs(t);
    if (a <= 1.0) return 1.0;
    if (a >= std::numbers::e) return 0.0;
    auto sigma = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
    const double u = (std::numbers::e - a) / (std::numbers::e - 1.0);
    return sigma(u) / (sigma(u) + sigma(1.0 - u));
}

// Band functions psi_j = phi(. e^-j) - phi(. e^-(j-1)), supported on
// [e^(j-1), e^(j+1)] for lambda >= 1.
struct CutoffFamily {
    int j_max = 0;

    static double phi_j(int j, double lambda) { return cutoff_phi(lambda * std::exp(-double(j))); }

    static double psi(int j, double lambda) { return phi_j(j, lambda) - phi_j(j - 1, lambda); }

    static CutoffFamily for_spectrum(double lambda_max) {
        CutoffFamily f;
        // largest j with e^(j-1) <= lambda_max; bands above that are empty
        f.j_max = static_cast<int>(std::floor(std::log(std::max(lambda_max, 1.0)))) + 1;
        return f;
    }
};

// The operator-adapted Littlewood-Paley projections P_j u = psi_j(B) u,
// realized through the eigenbasis. weights(j,k) = psi_j(lambda_k).
struct BandProjectionSet {
    const SpectralDecomposition* dec = nullptr;
    CutoffFamily cutoffs;
    Matrix weights;  // (j_max+1) x n

    int band_count() const { return static_cast<int>(weights.rows()); }

    Vector apply(int j, const Vector& u) const {
        Vector c = dec->coefficients(u);
        c.array() *= weights.row(j).transpose().array();
        return dec->eigenvectors * c;
    }

    // ||P_j u||^2 for all j at once (h-weighted L^2).
    Vector band_masses(const Vector& u) const {
        Vector c = dec->coefficients(u);
        Vector out(band_count());
        for (int j = 0; j < band_count(); ++j)
            out[j] = dec->grid.h() * (weights.row(j).transpose().array() * c.array()).square().sum();
        return out;
    }

    Vector sum_all(const Vector& u) const {
        Vector c = dec->coefficients(u);
        c.array() *= weights.colwise().sum().transpose().array();
        return dec->eigenvectors * c;
    }
};

inline BandProjectionSet build_bands(const SpectralDecomposition& dec) {
    BandProjectionSet set;
    set.dec = &dec;
    set.cutoffs = CutoffFamily::for_spectrum(dec.eigenvalues[dec.size() - 1]);
    set.weights = Matrix::Zero(set.cutoffs.j_max + 1, dec.size());
    for (int j = 0; j <= set.cutoffs.j_max; ++j)
        for (int k = 0; k < dec.size(); ++k)
            set.weights(j, k) = CutoffFamily::psi(j, dec.eigenvalues[k]);
    return set;
}

struct SandwichReport {
    double lower = 0.0;
    double middle = 0.0;
    double upper = 0.0;
    bool holds = false;
};

// sum f(e^(j-1))^2 ||P_j u||^2  <=  ||f(B)u||^2  <=  2 sum f(e^(j+1))^2 ||P_j u||^2
// for nondecreasing f on [1, infinity); arguments below 1 are clamped to 1,
// which keeps the lower bound valid on the j=0 band.
inline SandwichReport norm_sandwich_check(const std::function<double(double)>& f,
                                          const SpectralDecomposition& dec,
                                          const BandProjectionSet& bands, const Vector& u) {
    // monotonicity spot-check on the sampled eigenvalues
    for (int k = 1; k < dec.size(); ++k)
        if (f(dec.eigenvalues[k]) < f(dec.eigenvalues[k - 1]) - 1e-12 * std::abs(f(dec.eigenvalues[k])))
            throw SchemaError("norm_sandwich_check: f not nondecreasing on the spectrum");

    const Vector masses = bands.band_masses(u);
    SandwichReport rep;
    for (int j = 0; j < bands.band_count(); ++j) {
        const double flo = f(std::max(std::exp(double(j - 1)), 1.0));
        const double fhi = f(std::exp(double(j + 1)));
        rep.lower += flo * flo * masses[j];
        rep.upper += 2.0 * fhi * fhi * masses[j];
    }
    Vector fu = apply_function(f, dec, u);
    rep.middle = dec.grid.h() * fu.squaredNorm();
    const double slack = 1e-10 * std::max(1.0, rep.middle);
    rep.holds = rep.lower <= rep.middle + slack && rep.middle <= rep.upper + slack;
    return rep;
}

}  // namespace speclab
