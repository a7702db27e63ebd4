#include <catch_amalgamated.hpp>
#include <random>

#include "oracles.hpp"
#include "speclab/bundle.hpp"
#include "speclab/operator.hpp"
#include "speclab/solution.hpp"
#include "speclab/spectral.hpp"

using namespace speclab;

namespace {

struct Setup {
    Grid1D grid{48, -1.0, 1.0, Boundary::dirichlet};
    DiscreteOperator op;
    SpectralDecomposition dec;
    BandProjectionSet bands;
    CoefficientBundleX bundle;

    Setup() {
        op = build_divergence_operator(constant_fn(1.0), constant_fn(1.0), grid);
        dec = decompose(op);
        bands = build_bands(dec);
        bands.dec = &dec;  // rebind after copy
        bundle.a2 = constant_fn(1.0);
        bundle.g = constant_fn(1.0);
    }
};

Vector bump(const Grid1D& g) {
    Vector u(g.dofs());
    for (int i = 0; i < g.dofs(); ++i) {
        const double t = g.dof_point(i) / 0.6;
        u[i] = std::abs(t) < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0;
    }
    return u;
}

}  // namespace

TEST_CASE("build_solution validation") {
    Setup s;
    const Vector u = bump(s.grid);
    CHECK_THROWS_AS(build_solution(u, s.bands, s.dec, s.bundle, {}, 0.1), SchemaError);
    CHECK_THROWS_AS(build_solution(u, s.bands, s.dec, s.bundle, {99}, 0.1), SchemaError);
    CHECK_THROWS_AS(build_solution(u, s.bands, s.dec, s.bundle, {1}, -0.5), SchemaError);
    // an eigenvector of band j carries no mass in far-away bands
    const Vector e0 = s.dec.eigenvectors.col(0);
    CHECK_THROWS_AS(build_solution(e0, s.bands, s.dec, s.bundle,
                                   {s.bands.cutoffs.j_max}, 0.1),
                    SchemaError);
}

TEST_CASE("single-band solution has tiny analytic residual") {
    Setup s;
    const Vector u = bump(s.grid);
    const int j = s.bands.cutoffs.j_max / 2;
    auto w = build_solution(u, s.bands, s.dec, s.bundle, {j}, 0.1, 1e-11);
    CHECK(w.radius <= 1.0);
    CHECK(w.radius > 0.0);
    CHECK(!w.profiles.empty());

    // amplitudes match psi_j(lambda_k) * <u, e_k>
    const Vector c = s.dec.coefficients(u);
    for (std::size_t m = 0; m < w.mode_index.size(); ++m) {
        const int k = w.mode_index[m];
        CHECK(w.amplitude[static_cast<int>(m)] ==
              Catch::Approx(s.bands.weights(j, k) * c[k]).margin(1e-14));
    }

    const auto res = residual_check(w, s.op, s.bundle);
    CHECK(res.analytic <= 1e-10);
    CHECK(res.fd > res.analytic);  // the FD variant sees the discretization error
}

TEST_CASE("finite-difference residual converges at second order") {
    Setup s;
    const Vector u = bump(s.grid);
    const int j = std::max(1, s.bands.cutoffs.j_max / 2);
    double prev = 0.0;
    std::vector<double> fd;
    for (int ns : {8, 16, 32}) {
        auto w = build_solution(u, s.bands, s.dec, s.bundle, {j}, 0.1, 1e-12, ns);
        fd.push_back(residual_check(w, s.op, s.bundle).fd);
        (void)prev;
    }
    const double order1 = std::log2(fd[0] / fd[1]);
    const double order2 = std::log2(fd[1] / fd[2]);
    CHECK(order1 == Catch::Approx(2.0).margin(0.3));
    CHECK(order2 == Catch::Approx(2.0).margin(0.3));
}

TEST_CASE("multi-band solution and slices") {
    Setup s;
    const Vector u = bump(s.grid);
    std::vector<int> all;
    for (int j = 0; j <= s.bands.cutoffs.j_max; ++j) all.push_back(j);
    auto w = build_solution(u, s.bands, s.dec, s.bundle, all, 0.2, 1e-10);
    // at x = x0 every profile is 1, so the slice is sum psi_j-weighted u = u
    const Vector at0 = w.slice(w.profiles.front().center());
    CHECK((at0 - u).norm() <= 1e-9 * u.norm());
    const Vector d0 = w.slice_dx(w.profiles.front().center());
    CHECK(d0.norm() <= 1e-12 * u.norm());
}

TEST_CASE("exponential weight through the calculus") {
    Setup s;
    const Vector e3 = s.dec.eigenvectors.col(3);
    const double lam = s.dec.eigenvalues[3];
    const auto wn = exponential_weight(s.dec, e3, 0.5);
    CHECK(wn.finite);
    CHECK(wn.value ==
          Catch::Approx(std::exp(0.5 * std::sqrt(lam)) * l2_norm(e3, s.grid.h())).epsilon(1e-10));

    const Vector top = s.dec.eigenvectors.col(s.dec.size() - 1);
    const double lam_top = s.dec.eigenvalues[s.dec.size() - 1];
    const auto big = exponential_weight(s.dec, top, 800.0 / std::sqrt(lam_top));
    CHECK_FALSE(big.finite);
    CHECK_THROWS_AS(exponential_weight(s.dec, e3, -1.0), SchemaError);
}
