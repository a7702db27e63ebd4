#pragma once

#include <cmath>

#include "speclab/errors.hpp"
#include "speclab/fourier.hpp"

namespace speclab {

enum class Boundary { dirichlet, periodic };

// Uniform 1-D grid. Dirichlet grids carry n points including both endpoints;
// the operator unknowns are the n-2 interior values (supports vanish at the
// boundary). Periodic grids identify y_max with y_min + n*h.
struct Grid1D {
    int n = 0;
    double y_min = 0.0;
    double y_max = 0.0;
    Boundary boundary = Boundary::dirichlet;

    Grid1D() = default;
    Grid1D(int n_, double y_min_, double y_max_, Boundary b) : n(n_), y_min(y_min_), y_max(y_max_), boundary(b) {
        if (n < 8) throw SchemaError("Grid1D: need n >= 8, got n=" + std::to_string(n));
        if (!(y_max > y_min)) throw SchemaError("Grid1D: empty interval");
    }

    double h() const {
        return boundary == Boundary::dirichlet ? (y_max - y_min) / (n - 1)
                                               : (y_max - y_min) / n;
    }

    // Number of operator unknowns.
    int dofs() const { return boundary == Boundary::dirichlet ? n - 2 : n; }

    // Physical coordinate of grid point i, i in [0, n).
    double point(int i) const { return y_min + h() * i; }

    // Coordinate of unknown k.
    double dof_point(int k) const {
        return boundary == Boundary::dirichlet ? point(k + 1) : point(k);
    }

    // Zero-pads a dof vector to the full n points (Dirichlet) for use as one
    // period of a periodic sequence; period is n*h either way.
    Vector embed(const Vector& u) const {
        if (u.size() != dofs()) throw SchemaError("Grid1D::embed: size mismatch");
        if (boundary == Boundary::periodic) return u;
        Vector full = Vector::Zero(n);
        full.segment(1, n - 2) = u;
        return full;
    }

    Spectrum spectrum_of(const Vector& u_dof) const { return analyze(embed(u_dof), h()); }
};

}  // namespace speclab
