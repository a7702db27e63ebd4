#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "speclab/bundle.hpp"
#include "speclab/errors.hpp"
#include "speclab/grid.hpp"

namespace speclab {

enum class OperatorForm { divergence_1d, separable_2d };

// Symmetric matrix realization of the y-direction operator, shifted so the
// spectrum starts at 1. `shift` is what was added to the diagonal; the
// unshifted operator is matrix - shift*I.
struct DiscreteOperator {
    Matrix matrix;
    Grid1D grid;
    double shift = 0.0;
    OperatorForm form = OperatorForm::divergence_1d;
    double mode = 0.0;  // eta_2 frequency for separable per-mode operators

    int size() const { return static_cast<int>(matrix.rows()); }

    Vector apply(const Vector& u) const { return matrix * u; }

    // h-weighted quadratic form <Mu, u>.
    double quad_form(const Vector& u) const { return grid.h() * u.dot(matrix * u); }
};

namespace detail {

// -d/dy (b d/dy .) + b0 by centered flux differencing, over the grid dofs.
// b, b0 are sampled at all n grid points; fluxes use midpoint averages.
inline Matrix divergence_matrix(const Vector& b, const Vector& b0, const Grid1D& grid) {
    const int n = grid.n;
    const double h = grid.h();
    const double ih2 = 1.0 / (h * h);
    const int m = grid.dofs();
    Matrix M = Matrix::Zero(m, m);
    auto flux = [&](int i, int j) { return 0.5 * (b[i] + b[j]); };

    if (grid.boundary == Boundary::periodic) {
        for (int k = 0; k < m; ++k) {
            const int kp = (k + 1) % m;
            const int km = (k + m - 1) % m;
            const double fp = flux(k, (k + 1) % n);
            const double fm = flux(k, (k + n - 1) % n);
            M(k, k) += (fp + fm) * ih2 + b0[k];
            M(k, kp) -= fp * ih2;
            M(k, km) -= fm * ih2;
        }
    } else {
        // dof k lives at grid point k+1; boundary values are eliminated.
        for (int k = 0; k < m; ++k) {
            const int i = k + 1;
            const double fp = flux(i, i + 1);
            const double fm = flux(i, i - 1);
            M(k, k) += (fp + fm) * ih2 + b0[i];
            if (k + 1 < m) M(k, k + 1) -= fp * ih2;
            if (k - 1 >= 0) M(k, k - 1) -= fm * ih2;
        }
    }
    return M;
}

inline double min_eigenvalue(const Matrix& M) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("min_eigenvalue: eigensolver failed");
    return es.eigenvalues()(0);
}

// Shift the diagonal so eigenvalues are >= 1. `psd_floor` is a certified
// lower bound on the spectrum that is cheap to have (PSD part plus the
// pointwise zeroth-order minimum); when it already certifies positivity, or
// when entries are too large for a stable dense solve, the eigensolver is
// skipped.
inline void apply_positivity_shift(DiscreteOperator& op, double psd_floor) {
    double lo = psd_floor;
    const double scale = op.matrix.cwiseAbs().maxCoeff();
    if (lo < 1.0 && scale < 1e100) lo = min_eigenvalue(op.matrix);
    if (lo < 1.0) {
        op.shift = 1.0 - lo;
        op.matrix.diagonal().array() += op.shift;
    }
}

}  // namespace detail

// Divergence-form 1-D operator with pointwise-sampled coefficients.
inline DiscreteOperator build_divergence_operator(const Vector& b, const Vector& b0,
                                                  const Grid1D& grid) {
    if (b.size() != grid.n || b0.size() != grid.n)
        throw SchemaError("build_divergence_operator: coefficient sample count != grid.n");
    for (int i = 0; i < grid.n; ++i)
        if (b[i] < 0.0)
            throw SchemaError("build_divergence_operator: negative b sample at i=" +
                              std::to_string(i) + " (b=" + std::to_string(b[i]) + ")");
    DiscreteOperator op;
    op.grid = grid;
    op.form = OperatorForm::divergence_1d;
    op.matrix = detail::divergence_matrix(b, b0, grid);
    detail::apply_positivity_shift(op, b0.minCoeff());
    return op;
}

inline DiscreteOperator build_divergence_operator(const ScalarFn& b, const ScalarFn& b0,
                                                  const Grid1D& grid) {
    Vector bs(grid.n), b0s(grid.n);
    for (int i = 0; i < grid.n; ++i) {
        bs[i] = b(grid.point(i));
        b0s[i] = b0(grid.point(i));
    }
    return build_divergence_operator(bs, b0s, grid);
}

// Per-mode reduction of the separable 2-D operator
//   -d^2/dy1^2 + b_weight(y1) * (-d^2/dy2^2) + b0(y1):
// one 1-D operator  -d^2/dy1^2 + b_weight*eta^2 + b0  per frequency eta.
inline std::vector<DiscreteOperator> build_separable_operator(const ScalarFn& b_weight,
                                                              const std::vector<double>& modes,
                                                              const Grid1D& grid,
                                                              const ScalarFn& b0 = constant_fn(0.0)) {
    if (modes.empty()) throw SchemaError("build_separable_operator: empty mode list");
    Vector w(grid.n), b0s(grid.n);
    for (int i = 0; i < grid.n; ++i) {
        w[i] = b_weight(grid.point(i));
        b0s[i] = b0(grid.point(i));
        if (w[i] < 0.0) throw SchemaError("build_separable_operator: negative weight sample");
    }
    // The Laplacian block is mode-independent; its smallest eigenvalue gives
    // the PSD floor reused for every mode (the eta^2*w part only raises it).
    const Vector ones = Vector::Constant(grid.n, 1.0);
    const Matrix lap = detail::divergence_matrix(ones, Vector::Zero(grid.n), grid);
    const double lap_floor = detail::min_eigenvalue(lap);

    std::vector<DiscreteOperator> ops;
    ops.reserve(modes.size());
    for (double eta : modes) {
        DiscreteOperator op;
        op.grid = grid;
        op.form = OperatorForm::separable_2d;
        op.mode = eta;
        op.matrix = lap;
        double diag_min = std::numeric_limits<double>::infinity();
        for (int k = 0; k < grid.dofs(); ++k) {
            const int i = grid.boundary == Boundary::dirichlet ? k + 1 : k;
            const double d = eta * eta * w[i] + b0s[i];
            op.matrix(k, k) += d;
            diag_min = std::min(diag_min, d);
        }
        detail::apply_positivity_shift(op, lap_floor + diag_min);
        ops.push_back(std::move(op));
    }
    return ops;
}

}  // namespace speclab
