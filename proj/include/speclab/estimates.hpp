#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "speclab/errors.hpp"
#include "speclab/fourier.hpp"
#include "speclab/grid.hpp"
#include "speclab/operator.hpp"
#include "speclab/solution.hpp"
#include "speclab/spectral.hpp"

namespace speclab {

// One test function. beta is a dof vector on the y1 grid; eta is the y2
// frequency it rides on (0 for purely 1-D members), op_index selects the
// matching per-mode operator, scale tags concentration members (-1 otherwise).
struct TestMember {
    Vector beta;
    double eta = 0.0;
    int op_index = 0;
    int scale = -1;
    std::string label;
};

enum class FamilyKind { gaussian_bumps, modulated_packets, band_limited_random, concentrating_sequence };

struct TestFamily {
    FamilyKind kind = FamilyKind::gaussian_bumps;
    Grid1D grid;
    std::vector<TestMember> members;
    std::uint64_t seed = 0;
};

// || log<D> u ||, <xi> = sqrt(e^2 + xi^2 + eta^2), on the zero-padded
// periodic embedding. Always >= ||u||.
inline double log_norm2(const Grid1D& grid, const Vector& beta, double eta = 0.0) {
    const Spectrum sp = grid.spectrum_of(beta);
    return sp.weighted_norm2([eta](double xi) {
        return 0.5 * std::log(std::exp(2.0) + xi * xi + eta * eta);
    });
}
inline double log_norm(const Grid1D& grid, const Vector& beta, double eta = 0.0) {
    return std::sqrt(log_norm2(grid, beta, eta));
}

// H^delta norm squared of the member in the (xi, eta) bracket convention.
inline double jap_sobolev_norm2(const Grid1D& grid, const Vector& beta, double eta, double delta) {
    const Spectrum sp = grid.spectrum_of(beta);
    return sp.weighted_norm2([eta, delta](double xi) {
        return std::pow(std::exp(2.0) + xi * xi + eta * eta, 0.5 * delta);
    });
}

namespace detail {

inline double compact_bump(double t) {  // supported on |t| < 1
    const double s = 1.0 - t * t;
    return s > 0.0 ? std::exp(-1.0 / s) : 0.0;
}

inline void normalize_member(TestMember& m, double h) {
    const double nrm = l2_norm(m.beta, h);
    if (nrm > 0.0) m.beta /= nrm;
}

}  // namespace detail

inline TestFamily make_gaussian_bumps(const Grid1D& grid, int count, std::uint64_t seed) {
    TestFamily fam{FamilyKind::gaussian_bumps, grid, {}, seed};
    std::mt19937_64 rng(seed);
    const double span = grid.y_max - grid.y_min;
    std::uniform_real_distribution<double> center(grid.y_min + 0.25 * span, grid.y_max - 0.25 * span);
    std::uniform_real_distribution<double> width(0.03 * span, 0.12 * span);
    for (int i = 0; i < count; ++i) {
        TestMember m;
        m.beta.resize(grid.dofs());
        const double c = center(rng), s = width(rng);
        for (int k = 0; k < grid.dofs(); ++k) {
            const double t = (grid.dof_point(k) - c) / s;
            m.beta[k] = std::exp(-0.5 * t * t) * detail::compact_bump((grid.dof_point(k) - 0.5 * (grid.y_min + grid.y_max)) / (0.49 * span));
        }
        m.label = "gauss#" + std::to_string(i);
        detail::normalize_member(m, grid.h());
        fam.members.push_back(std::move(m));
    }
    return fam;
}

inline TestFamily make_modulated_packets(const Grid1D& grid, int count, std::uint64_t seed) {
    TestFamily fam{FamilyKind::modulated_packets, grid, {}, seed};
    std::mt19937_64 rng(seed);
    const double span = grid.y_max - grid.y_min;
    const double xi_max = M_PI / grid.h();
    std::uniform_real_distribution<double> center(grid.y_min + 0.3 * span, grid.y_max - 0.3 * span);
    std::uniform_real_distribution<double> width(0.04 * span, 0.1 * span);
    std::uniform_real_distribution<double> freq(0.0, 0.3 * xi_max);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
    for (int i = 0; i < count; ++i) {
        TestMember m;
        m.beta.resize(grid.dofs());
        const double c = center(rng), s = width(rng), w = freq(rng), p = phase(rng);
        for (int k = 0; k < grid.dofs(); ++k) {
            const double y = grid.dof_point(k);
            m.beta[k] = std::exp(-0.5 * (y - c) * (y - c) / (s * s)) * std::cos(w * y + p);
        }
        m.label = "packet#" + std::to_string(i);
        detail::normalize_member(m, grid.h());
        fam.members.push_back(std::move(m));
    }
    return fam;
}

inline TestFamily make_band_limited_random(const Grid1D& grid, int count, int k_max,
                                           std::uint64_t seed) {
    TestFamily fam{FamilyKind::band_limited_random, grid, {}, seed};
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double L = grid.y_max - grid.y_min;
    for (int i = 0; i < count; ++i) {
        TestMember m;
        m.beta = Vector::Zero(grid.dofs());
        for (int k = 1; k <= k_max; ++k) {
            const double a = gauss(rng);
            for (int j = 0; j < grid.dofs(); ++j)
                m.beta[j] += a * std::sin(k * M_PI * (grid.dof_point(j) - grid.y_min) / L);
        }
        m.label = "band#" + std::to_string(i);
        detail::normalize_member(m, grid.h());
        fam.members.push_back(std::move(m));
    }
    return fam;
}

// y2-frequency ladder adapted to super-polynomial degeneracies: log eta spans
// [1.41, 140] geometrically, so the largest resolvable response of the
// degenerate form is probed, not just the grid's Nyquist frequency.
inline std::vector<double> concentration_modes(int n_modes = 16, double log_eta_max = 140.0) {
    std::vector<double> etas;
    const double lo = 1.41;
    for (int k = 0; k < n_modes; ++k) {
        const double t = n_modes == 1 ? 0.0 : static_cast<double>(k) / (n_modes - 1);
        etas.push_back(std::exp(lo * std::pow(log_eta_max / lo, t)));
    }
    return etas;
}

// Bumps at distance 2^-m from the degeneracy at y1 = 0 with half-width
// 2^-(m+1), each paired with every ladder mode.
inline TestFamily make_concentrating_family(const Grid1D& grid, const std::vector<double>& etas,
                                            int m_min = 2, int m_max = 6) {
    if (etas.empty()) throw SchemaError("make_concentrating_family: empty mode ladder");
    TestFamily fam{FamilyKind::concentrating_sequence, grid, {}, 0};
    for (int m = m_min; m <= m_max; ++m) {
        const double c = std::pow(2.0, -m);
        const double w = std::pow(2.0, -m - 1);
        Vector beta(grid.dofs());
        for (int k = 0; k < grid.dofs(); ++k)
            beta[k] = detail::compact_bump((grid.dof_point(k) - c) / w);
        if (l2_norm(beta, grid.h()) <= 0.0)
            throw SchemaError("make_concentrating_family: scale 2^-" + std::to_string(m) +
                              " unresolved by the grid");
        for (std::size_t q = 0; q < etas.size(); ++q) {
            TestMember mem;
            mem.beta = beta;
            mem.eta = etas[q];
            mem.op_index = static_cast<int>(q);
            mem.scale = m;
            mem.label = "m=" + std::to_string(m) + ",mode#" + std::to_string(q);
            detail::normalize_member(mem, grid.h());
            fam.members.push_back(std::move(mem));
        }
    }
    return fam;
}

struct EstimateReport {
    std::string estimate;
    std::vector<double> epsilons;
    std::vector<double> C_eps;       // per epsilon, clamped at 0
    std::vector<int> worst_member;   // per epsilon
    std::string verdict;             // consistent | violation_trend | inconclusive
    std::vector<int> scales;         // concentration scales present (may be empty)
    Matrix scale_C;                  // epsilons x scales, per-scale max constants
};

namespace detail {

inline void check_family_ops(const std::vector<DiscreteOperator>& ops, const TestFamily& fam) {
    if (fam.members.empty()) throw SchemaError("estimate: empty test family");
    if (ops.empty()) throw SchemaError("estimate: no operators supplied");
    for (const auto& m : fam.members) {
        if (m.op_index < 0 || m.op_index >= static_cast<int>(ops.size()))
            throw SchemaError("estimate: member op_index out of range");
        if (m.beta.size() != ops[m.op_index].grid.dofs())
            throw SchemaError("estimate: member size does not match operator grid");
        if (l2_norm(m.beta, fam.grid.h()) <= 0.0)
            throw SchemaError("estimate: zero-norm test member");
    }
}

// C(m+2) >= 10 * C(m) across three consecutive scales, floored at 1 so benign
// noise near zero cannot fire the rule.
inline bool trend_in_row(const std::vector<int>& scales, const Vector& row) {
    for (std::size_t i = 0; i + 2 < scales.size(); ++i)
        if (scales[i + 1] == scales[i] + 1 && scales[i + 2] == scales[i] + 2 &&
            std::max(row[static_cast<int>(i + 2)], 1.0) >= 10.0 * std::max(row[static_cast<int>(i)], 1.0))
            return true;
    return false;
}

}  // namespace detail

inline EstimateReport superlog_test(const std::vector<DiscreteOperator>& ops,
                                    const TestFamily& fam, const std::vector<double>& epsilons) {
    if (epsilons.empty()) throw SchemaError("superlog_test: empty epsilon list");
    detail::check_family_ops(ops, fam);

    const int nm = static_cast<int>(fam.members.size());
    Vector ln2(nm), n2(nm), form(nm);
    for (int i = 0; i < nm; ++i) {
        const auto& m = fam.members[i];
        ln2[i] = log_norm2(fam.grid, m.beta, m.eta);
        n2[i] = fam.grid.h() * m.beta.squaredNorm();
        form[i] = ops[m.op_index].quad_form(m.beta);
    }

    std::vector<int> scales;
    for (const auto& m : fam.members)
        if (m.scale >= 0 && (scales.empty() || scales.back() != m.scale)) scales.push_back(m.scale);
    std::sort(scales.begin(), scales.end());
    scales.erase(std::unique(scales.begin(), scales.end()), scales.end());

    EstimateReport rep;
    rep.estimate = "superlog";
    rep.epsilons = epsilons;
    rep.scales = scales;
    rep.scale_C = Matrix::Zero(static_cast<int>(epsilons.size()), static_cast<int>(scales.size()));
    bool trend = false;
    for (std::size_t e = 0; e < epsilons.size(); ++e) {
        const double eps = epsilons[e];
        double best = 0.0;
        int best_i = 0;
        for (int i = 0; i < nm; ++i) {
            const double c = (ln2[i] - eps * form[i]) / n2[i];
            if (c > best) best = c, best_i = i;
            if (fam.members[i].scale >= 0) {
                const int s = static_cast<int>(std::lower_bound(scales.begin(), scales.end(),
                                                                fam.members[i].scale) -
                                               scales.begin());
                rep.scale_C(static_cast<int>(e), s) =
                    std::max(rep.scale_C(static_cast<int>(e), s), std::max(c, 0.0));
            }
        }
        rep.C_eps.push_back(best);
        rep.worst_member.push_back(best_i);
        if (!scales.empty()) {
            const Vector row = rep.scale_C.row(static_cast<int>(e)).transpose();
            trend = trend || detail::trend_in_row(scales, row);
        }
    }
    rep.verdict = trend ? "violation_trend" : "consistent";
    return rep;
}

inline EstimateReport superlog_test(const DiscreteOperator& op, const TestFamily& fam,
                                    const std::vector<double>& epsilons) {
    return superlog_test(std::vector<DiscreteOperator>{op}, fam, epsilons);
}

inline EstimateReport subelliptic_test(const std::vector<DiscreteOperator>& ops,
                                       const TestFamily& fam, double delta) {
    if (!(delta > 0.0) || delta > 1.0) throw SchemaError("subelliptic_test: delta outside (0, 1]");
    detail::check_family_ops(ops, fam);
    EstimateReport rep;
    rep.estimate = "subelliptic";
    rep.epsilons = {delta};
    double best = 0.0;
    int best_i = 0;
    for (std::size_t i = 0; i < fam.members.size(); ++i) {
        const auto& m = fam.members[i];
        const double num = jap_sobolev_norm2(fam.grid, m.beta, m.eta, delta);
        const double den = ops[m.op_index].quad_form(m.beta) + fam.grid.h() * m.beta.squaredNorm();
        const double c = num / den;
        if (c > best) best = c, best_i = static_cast<int>(i);
    }
    rep.C_eps.push_back(best);
    rep.worst_member.push_back(best_i);
    rep.verdict = std::isfinite(best) ? "consistent" : "inconclusive";
    return rep;
}

inline EstimateReport subelliptic_test(const DiscreteOperator& op, const TestFamily& fam,
                                       double delta) {
    return subelliptic_test(std::vector<DiscreteOperator>{op}, fam, delta);
}

// Stability classification across a grid refinement and a family enlargement:
// constants (floored at 1) must agree within +-25% and no run may carry a
// growth trend for the verdict "consistent".
inline std::string classify_verdict(const EstimateReport& base, const EstimateReport& refined,
                                    const EstimateReport& enlarged) {
    for (const auto* r : {&base, &refined, &enlarged})
        if (r->verdict == "violation_trend") return "violation_trend";
    for (std::size_t e = 0; e < base.C_eps.size(); ++e) {
        const double c0 = std::max(base.C_eps[e], 1.0);
        for (const auto* r : {&refined, &enlarged}) {
            if (e >= r->C_eps.size()) return "inconclusive";
            const double c1 = std::max(r->C_eps[e], 1.0);
            if (c1 > 1.25 * c0 || c0 > 1.25 * c1) return "inconclusive";
        }
    }
    return "consistent";
}

struct SmoothingReport {
    std::vector<int> bands;
    std::vector<double> ratio;  // max over family of ||P_j u||_{H^s2} / ||P_j u||
    double s2 = 0.0;
    double eps_fit = 0.0;  // smallest eps with log ratio_j <= eps sqrt(e^j), j >= 1
    double C_tilde = 0.0;  // j = 0 level
};

inline SmoothingReport smoothing_ratio(const SpectralDecomposition& dec,
                                       const BandProjectionSet& bands,
                                       const std::vector<int>& band_list, double s2,
                                       const TestFamily& fam) {
    if (!(s2 > 0.0)) throw SchemaError("smoothing_ratio: s2 must be positive");
    if (fam.members.empty()) throw SchemaError("smoothing_ratio: empty test family");
    SmoothingReport rep;
    rep.s2 = s2;
    const double h = dec.grid.h();
    for (int j : band_list) {
        if (j < 0 || j > bands.cutoffs.j_max)
            throw SchemaError("smoothing_ratio: band index out of range");
        bool populated = false;
        for (int k = 0; k < dec.eigenvalues.size(); ++k)
            if (bands.weights(j, k) > 0.0) populated = true;
        if (!populated)
            throw SchemaError("smoothing_ratio: band " + std::to_string(j) + " empty of spectrum");
        double worst = 0.0;
        for (const auto& m : fam.members) {
            const Vector pj = bands.apply(j, m.beta);
            const double den = l2_norm(pj, h);
            if (den <= 1e-13 * l2_norm(m.beta, h)) continue;
            const double num = sobolev_norm(dec.grid.spectrum_of(pj), s2, std::exp(1.0));
            worst = std::max(worst, num / den);
        }
        rep.bands.push_back(j);
        rep.ratio.push_back(worst);
        if (j == 0) rep.C_tilde = std::max(rep.C_tilde, worst);
        if (j >= 1 && worst > 1.0)
            rep.eps_fit = std::max(rep.eps_fit, std::log(worst) / std::sqrt(std::exp(j)));
    }
    return rep;
}

// m = (1+xi^2)^s1 (1+eta^2)^s2 / (1+xi^2+eta^2)^(s1+s2); always <= 1.
inline double sobolev_multiplier_check(double s1, double s2, const Vector& xi_grid,
                                       const Vector& eta_grid) {
    if (s1 < 0.0 || s2 < 0.0) throw SchemaError("sobolev_multiplier_check: s1, s2 must be >= 0");
    double sup = 0.0;
    for (int i = 0; i < xi_grid.size(); ++i) {
        const double lx = std::log1p(xi_grid[i] * xi_grid[i]);
        for (int j = 0; j < eta_grid.size(); ++j) {
            const double ly = std::log1p(eta_grid[j] * eta_grid[j]);
            const double ls = std::log1p(xi_grid[i] * xi_grid[i] + eta_grid[j] * eta_grid[j]);
            sup = std::max(sup, std::exp(s1 * lx + s2 * ly - (s1 + s2) * ls));
        }
    }
    return sup;
}

struct MixedNormReport {
    double lhs = 0.0;     // max_x ||u(x,.)||_{H^s2_y}
    double rhs = 0.0;     // ||u||_{H^(s1+s2)}
    double C_disc = 0.0;  // rigorous discrete kernel constant
    double C_quad = 0.0;  // continuum integral for reference
    bool holds = false;
};

// Lemma-style embedding on a periodic 2-D box: u(i, j) = u(x_i, y_j),
// box lengths Lx, Ly. Brackets here use the Euclidean 1 + |xi|^2 convention
// of the multiplier chain.
inline MixedNormReport mixed_norm_check(const Matrix& u, double Lx, double Ly, double s1,
                                        double s2) {
    if (!(s1 > 0.5))
        throw SchemaError("mixed_norm_check: s1 <= 1/2, kernel not square-summable");
    const int nx = static_cast<int>(u.rows());
    const int ny = static_cast<int>(u.cols());
    if (nx < 4 || ny < 4) throw SchemaError("mixed_norm_check: grid too small");
    const double hx = Lx / nx, hy = Ly / ny;

    // 2-D coefficients via row/column transforms; c = FFT2(u) / (nx*ny)
    std::vector<std::vector<Complex>> rows(nx);
    for (int i = 0; i < nx; ++i) {
        std::vector<Complex> r(ny);
        for (int j = 0; j < ny; ++j) r[j] = Complex(u(i, j), 0.0);
        rows[i] = fft_forward(std::move(r));
    }
    std::vector<std::vector<Complex>> c(nx, std::vector<Complex>(ny));
    for (int j = 0; j < ny; ++j) {
        std::vector<Complex> col(nx);
        for (int i = 0; i < nx; ++i) col[i] = rows[i][static_cast<std::size_t>(j)];
        col = fft_forward(std::move(col));
        for (int i = 0; i < nx; ++i) c[i][j] = col[i] / static_cast<double>(nx * ny);
    }
    auto freq = [](int idx, int n, double L) {
        const int m = idx <= n / 2 ? idx : idx - n;
        return 2.0 * M_PI * m / L;
    };

    MixedNormReport rep;
    const double s = s1 + s2;
    double rhs2 = 0.0, kernel = 0.0;
    for (int i = 0; i < nx; ++i) {
        const double xi = freq(i, nx, Lx);
        kernel += std::pow(1.0 + xi * xi, -s1);
        for (int j = 0; j < ny; ++j) {
            const double eta = freq(j, ny, Ly);
            rhs2 += std::pow(1.0 + xi * xi + eta * eta, s) * std::norm(c[i][j]);
        }
    }
    rep.rhs = std::sqrt(Lx * Ly * rhs2);
    rep.C_disc = std::sqrt(kernel / Lx);
    rep.C_quad = std::sqrt(std::sqrt(M_PI) * std::tgamma(s1 - 0.5) / (2.0 * M_PI * std::tgamma(s1)));

    for (int i = 0; i < nx; ++i) {
        std::vector<Complex> slice(ny);
        for (int j = 0; j < ny; ++j) slice[j] = Complex(u(i, j), 0.0);
        slice = fft_forward(std::move(slice));
        double acc = 0.0;
        for (int j = 0; j < ny; ++j) {
            const double eta = freq(j, ny, Ly);
            acc += std::pow(1.0 + eta * eta, s2) * std::norm(slice[j] / static_cast<double>(ny));
        }
        rep.lhs = std::max(rep.lhs, std::sqrt(Ly * acc));
    }
    rep.holds = rep.lhs <= rep.C_disc * rep.rhs * (1.0 + 1e-10);
    return rep;
}

struct ClosedGraphRow {
    double r_inner = 0.0;
    double constant = 0.0;
};

// ||w||_{H^s2 (|x-x0| <= r')} / ||w||_{L^2 (full slab)}; nondecreasing in r'.
inline std::vector<ClosedGraphRow> closed_graph_constant(const SpectralSolution& sol,
                                                         const Grid1D& grid, double s2,
                                                         const std::vector<double>& radii) {
    if (radii.empty()) throw SchemaError("closed_graph_constant: no inner radii");
    for (double rp : radii)
        if (!(rp > 0.0) || rp >= sol.radius)
            throw SchemaError("closed_graph_constant: need 0 < r' < r");

    const int ns = sol.sample_count();
    const double h = sol.h;
    double outer2 = 0.0;
    std::vector<double> slice_h(ns), slice_x(ns);
    const double dx = ns > 1 ? sol.x_sample(1) - sol.x_sample(0) : 0.0;
    for (int i = 0; i < ns; ++i) {
        const Vector w = sol.slice(i);
        slice_x[i] = sol.x_sample(i);
        slice_h[i] = sobolev_norm(grid.spectrum_of(w), s2, std::exp(1.0));
        outer2 += dx * h * w.squaredNorm();
    }
    const double denom = std::sqrt(outer2);

    std::vector<ClosedGraphRow> table;
    for (double rp : radii) {
        double sup = 0.0;
        for (int i = 0; i < ns; ++i)
            if (std::abs(slice_x[i] - sol.x0) <= rp) sup = std::max(sup, slice_h[i]);
        table.push_back({rp, denom > 0.0 ? sup / denom : 0.0});
    }
    return table;
}

}  // namespace speclab
