#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "speclab/bundle.hpp"
#include "speclab/errors.hpp"
#include "speclab/estimates.hpp"
#include "speclab/grid.hpp"
#include "speclab/interpolation.hpp"
#include "speclab/ode.hpp"
#include "speclab/operator.hpp"
#include "speclab/solution.hpp"
#include "speclab/spectral.hpp"

namespace speclab {

inline constexpr const char* kVersion = "0.1.0";

// Shortest round-trip-exact decimal form; reports must be byte-stable.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Named coefficient presets: numbers are constants; strings are
// "constant(c)", "sin", "cos", "power(p)", "kusuoka(kappa)", "zero", "one".
inline ScalarFn parse_scalar_fn(const nlohmann::json& j, const std::string& field) {
    if (j.is_number()) return constant_fn(j.get<double>());
    if (!j.is_string())
        throw SchemaError("scenario: field '" + field + "' must be a number or preset string");
    const std::string s = j.get<std::string>();
    auto arg = [&](const std::string& head) -> std::optional<double> {
        if (s.rfind(head + "(", 0) == 0 && s.back() == ')')
            return std::stod(s.substr(head.size() + 1, s.size() - head.size() - 2));
        return std::nullopt;
    };
    if (s == "zero") return constant_fn(0.0);
    if (s == "one") return constant_fn(1.0);
    if (s == "sin") return [](double x) { return std::sin(x); };
    if (s == "cos") return [](double x) { return std::cos(x); };
    if (auto v = arg("constant")) return constant_fn(*v);
    if (auto v = arg("power")) return power_weight(*v);
    if (auto v = arg("kusuoka")) return kusuoka_weight(*v);
    throw SchemaError("scenario: unknown preset '" + s + "' in field '" + field + "'");
}

struct Scenario {
    std::string name;
    Grid1D grid;
    ScalarFn b;        // y1 degeneracy weight
    ScalarFn b0;       // zero-order term
    CoefficientBundleX bundle;
    std::string task;
    std::vector<double> epsilons{0.1};
    double s1 = 0.75;
    double s2 = 1.0;
    double delta = 0.5;
    std::vector<int> band_list;
    std::vector<double> radii{0.5};
    std::vector<double> lambdas;
    std::uint64_t seed = 1;
    double tol = 1e-10;
    std::uint64_t hash = 0;
};

inline Scenario parse_scenario(const nlohmann::json& j) {
    if (!j.is_object() || j.empty()) throw SchemaError("scenario: empty or non-object document");
    Scenario sc;
    try {
        sc.name = j.value("name", "unnamed");
        const auto& g = j.at("grid");
        const std::string bnd = g.value("boundary", "dirichlet");
        if (bnd != "dirichlet" && bnd != "periodic")
            throw SchemaError("scenario: boundary must be 'dirichlet' or 'periodic'");
        sc.grid = Grid1D(g.at("n").get<int>(), g.at("ymin").get<double>(),
                         g.at("ymax").get<double>(),
                         bnd == "dirichlet" ? Boundary::dirichlet : Boundary::periodic);
        if (j.contains("b") && j.at("b").is_array()) {
            const auto table = j.at("b").get<std::vector<double>>();
            if (static_cast<int>(table.size()) != sc.grid.n)
                throw SchemaError("scenario: coefficient table size != grid n");
            sc.b = [table, grid = sc.grid](double y) {
                const double t = (y - grid.y_min) / grid.h();
                const int i = std::min(grid.n - 1, std::max(0, static_cast<int>(std::lround(t))));
                return table[static_cast<std::size_t>(i)];
            };
        } else {
            sc.b = parse_scalar_fn(j.value("b", nlohmann::json("one")), "b");
        }
        sc.b0 = parse_scalar_fn(j.value("b0", nlohmann::json(1.0)), "b0");
        const auto bx = j.value("bundle_x", nlohmann::json::object());
        sc.bundle.a2 = parse_scalar_fn(bx.value("a2", nlohmann::json(1.0)), "a2");
        sc.bundle.a1 = parse_scalar_fn(bx.value("a1", nlohmann::json(0.0)), "a1");
        sc.bundle.a0 = parse_scalar_fn(bx.value("a0", nlohmann::json(0.0)), "a0");
        sc.bundle.g = parse_scalar_fn(bx.value("g", nlohmann::json(1.0)), "g");
        sc.bundle.x0 = bx.value("x0", 0.0);
        sc.task = j.value("task", "spectrum");
        const auto p = j.value("parameters", nlohmann::json::object());
        if (p.contains("epsilons")) sc.epsilons = p.at("epsilons").get<std::vector<double>>();
        sc.s1 = p.value("s1", sc.s1);
        sc.s2 = p.value("s2", sc.s2);
        sc.delta = p.value("delta", sc.delta);
        if (p.contains("bands")) sc.band_list = p.at("bands").get<std::vector<int>>();
        if (p.contains("radii")) sc.radii = p.at("radii").get<std::vector<double>>();
        if (p.contains("lambdas")) sc.lambdas = p.at("lambdas").get<std::vector<double>>();
        sc.seed = p.value("seed", sc.seed);
        sc.tol = p.value("tol", sc.tol);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("scenario: malformed document: ") + e.what());
    }
    sc.hash = fnv1a(j.dump());
    if (sc.epsilons.empty()) throw SchemaError("scenario: empty epsilon list");
    if (sc.tol < 1e-12 || sc.tol > 1e-4) throw SchemaError("scenario: tol outside [1e-12, 1e-4]");
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("scenario: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("scenario: invalid JSON: ") + e.what());
    }
    return parse_scenario(j);
}

namespace detail {

inline nlohmann::json report_header(const Scenario& sc) {
    nlohmann::json h;
    h["scenario"] = sc.name;
    h["scenario_hash"] = fmt(static_cast<double>(sc.hash));  // decimal, stable
    h["version"] = kVersion;
    h["tol"] = fmt(sc.tol);
    h["seed"] = sc.seed;
    return h;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NumericalError("cannot write '" + path.string() + "'");
    out << text;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    write_text(path, j.dump(2) + "\n");
}

}  // namespace detail

// Runs one task; artifacts land under out_dir. Returns a one-line summary.
inline std::string run_scenario(const Scenario& sc, const std::string& task,
                                const std::string& out_dir) {
    namespace fs = std::filesystem;
    const fs::path out(out_dir);

    auto make_op = [&] {
        return build_divergence_operator(sc.b, sc.b0, sc.grid);
    };

    if (task == "spectrum") {
        const auto op = make_op();
        const auto dec = decompose(op);
        std::string csv = "k,lambda\n";
        for (int k = 0; k < dec.eigenvalues.size(); ++k)
            csv += std::to_string(k) + "," + fmt(dec.eigenvalues[k]) + "\n";
        detail::write_text(out / "spectrum.csv", csv);
        auto j = detail::report_header(sc);
        j["task"] = "spectrum";
        j["shift"] = fmt(op.shift);
        j["lambda_min"] = fmt(dec.eigenvalues[0]);
        j["lambda_max"] = fmt(dec.eigenvalues[dec.eigenvalues.size() - 1]);
        detail::write_json(out / "spectrum.json", j);
        return "spectrum: " + std::to_string(dec.eigenvalues.size()) + " eigenvalues";
    }

    if (task == "bands") {
        const auto op = make_op();
        const auto dec = decompose(op);
        const auto bands = build_bands(dec);
        std::mt19937_64 rng(sc.seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        Vector u(sc.grid.dofs());
        for (int i = 0; i < u.size(); ++i) u[i] = gauss(rng);
        const Vector masses = bands.band_masses(u);
        std::string csv = "j,mass\n";
        for (int jb = 0; jb < masses.size(); ++jb)
            csv += std::to_string(jb) + "," + fmt(masses[jb]) + "\n";
        detail::write_text(out / "bands.csv", csv);
        const auto sw = norm_sandwich_check([](double lam) { return std::sqrt(lam); }, dec, bands, u);
        auto j = detail::report_header(sc);
        j["task"] = "bands";
        j["j_max"] = bands.cutoffs.j_max;
        j["sandwich_lower"] = fmt(sw.lower);
        j["sandwich_middle"] = fmt(sw.middle);
        j["sandwich_upper"] = fmt(sw.upper);
        j["sandwich_holds"] = sw.holds;
        detail::write_json(out / "bands.json", j);
        return std::string("bands: sandwich ") + (sw.holds ? "holds" : "VIOLATED");
    }

    if (task == "ode" || task == "ode_sweep") {
        CoefficientBundleX nb = normalize_a2(sc.bundle, std::max(sc.radii[0], 1.0));
        std::vector<double> lams = sc.lambdas;
        if (lams.empty())
            for (int e = 2; e <= 10; e += 2) lams.push_back(std::exp(e));
        std::string csv = "lambda,M,C_x0,worst_ratio,certified\n";
        for (double lam : lams) {
            const auto sol = solve_ivp(nb, lam, sc.radii[0], sc.tol);
            csv += fmt(lam) + "," + fmt(sol.certificate.M) + "," + fmt(sol.certificate.C_x0) +
                   "," + fmt(sol.certificate.worst_ratio) + "," +
                   (sol.certificate.certified ? "1" : "0") + "\n";
            if (!sol.certificate.certified)
                throw CertificateError("ode sweep: growth certificate failed at lambda=" +
                                       fmt(lam));
        }
        detail::write_text(out / "ode.csv", csv);
        auto j = detail::report_header(sc);
        j["task"] = "ode";
        j["radius"] = fmt(sc.radii[0]);
        j["count"] = lams.size();
        detail::write_json(out / "ode.json", j);
        return "ode: " + std::to_string(lams.size()) + " certified solutions";
    }

    if (task == "solve" || task == "build_solution") {
        const auto op = make_op();
        const auto dec = decompose(op);
        const auto bands = build_bands(dec);
        std::vector<int> bl = sc.band_list;
        if (bl.empty()) bl = {std::max(0, bands.cutoffs.j_max / 2)};
        auto fam = make_gaussian_bumps(sc.grid, 1, sc.seed);
        CoefficientBundleX nb = normalize_a2(sc.bundle, 1.0);
        const auto w = build_solution(fam.members[0].beta, bands, dec, nb, bl, sc.epsilons[0],
                                      std::max(sc.tol, 1e-12));
        const auto res = residual_check(w, op, nb);
        auto j = detail::report_header(sc);
        j["task"] = "solve";
        j["radius"] = fmt(w.radius);
        j["C_max"] = fmt(w.C_max);
        j["modes"] = w.mode_index.size();
        j["residual_analytic"] = fmt(res.analytic);
        j["residual_fd"] = fmt(res.fd);
        j["fd_step"] = fmt(res.fd_step);
        detail::write_json(out / "solve.json", j);
        return "solve: residual " + fmt(res.analytic);
    }

    if (task == "estimate" || task == "superlog" || task == "subelliptic" || task == "smoothing") {
        const std::string kind = task == "estimate" ? sc.task : task;
        auto j = detail::report_header(sc);
        std::string csv = "eps,C\n";
        EstimateReport rep;
        if (kind == "superlog") {
            const auto etas = concentration_modes();
            const auto ops = build_separable_operator(sc.b, etas, sc.grid, sc.b0);
            const auto fam = make_concentrating_family(sc.grid, etas);
            rep = superlog_test(ops, fam, sc.epsilons);
        } else if (kind == "subelliptic") {
            const auto op = make_op();
            const auto fam = make_modulated_packets(sc.grid, 24, sc.seed);
            rep = subelliptic_test(op, fam, sc.delta);
        } else if (kind == "smoothing") {
            const auto op = make_op();
            const auto dec = decompose(op);
            const auto bands = build_bands(dec);
            std::vector<int> bl = sc.band_list;
            if (bl.empty())
                for (int b = 0; b <= bands.cutoffs.j_max; ++b) bl.push_back(b);
            const auto fam = make_band_limited_random(sc.grid, 16, sc.grid.dofs() / 4, sc.seed);
            const auto sm = smoothing_ratio(dec, bands, bl, sc.s2, fam);
            csv = "j,ratio\n";
            for (std::size_t i = 0; i < sm.bands.size(); ++i)
                csv += std::to_string(sm.bands[i]) + "," + fmt(sm.ratio[i]) + "\n";
            detail::write_text(out / "estimate.csv", csv);
            j["task"] = "smoothing";
            j["eps_fit"] = fmt(sm.eps_fit);
            j["C_tilde"] = fmt(sm.C_tilde);
            detail::write_json(out / "estimate.json", j);
            return "smoothing: eps_fit " + fmt(sm.eps_fit);
        } else {
            throw SchemaError("estimate: unknown kind '" + kind + "'");
        }
        for (std::size_t i = 0; i < rep.epsilons.size(); ++i)
            csv += fmt(rep.epsilons[i]) + "," + fmt(rep.C_eps[i]) + "\n";
        detail::write_text(out / "estimate.csv", csv);
        j["task"] = kind;
        j["verdict"] = rep.verdict;
        j["worst_member"] = rep.worst_member;
        if (!rep.scales.empty()) {
            nlohmann::json table = nlohmann::json::array();
            for (int e = 0; e < rep.scale_C.rows(); ++e) {
                nlohmann::json row;
                row["eps"] = fmt(rep.epsilons[static_cast<std::size_t>(e)]);
                for (int s = 0; s < rep.scale_C.cols(); ++s)
                    row["m" + std::to_string(rep.scales[static_cast<std::size_t>(s)])] =
                        fmt(rep.scale_C(e, s));
                table.push_back(row);
            }
            j["scale_table"] = table;
        }
        detail::write_json(out / "estimate.json", j);
        return kind + ": verdict " + rep.verdict;
    }

    if (task == "interp" || task == "interpolate") {
        std::mt19937_64 rng(sc.seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<Vector> alpha;
        for (int k = 0; k < 5; ++k) {
            Vector a(sc.grid.dofs());
            for (int i = 0; i < a.size(); ++i) a[i] = gauss(rng);
            alpha.push_back(a);
        }
        const auto seq = BandSequence::from(sc.grid, std::move(alpha));
        auto j = detail::report_header(sc);
        j["task"] = "interp";
        nlohmann::json rows = nlohmann::json::array();
        for (double eps : sc.epsilons) {
            const auto lo = low_band_inequality(seq, sc.s2, eps);
            const auto hi = high_band_inequality(seq, sc.s2, eps);
            nlohmann::json r;
            r["eps"] = fmt(eps);
            r["low_lhs"] = fmt(lo.lhs);
            r["low_rhs"] = fmt(lo.rhs);
            r["low_constant"] = fmt(lo.constant);
            r["high_lhs"] = fmt(hi.lhs);
            r["high_rhs"] = fmt(hi.rhs);
            r["high_constant"] = fmt(hi.constant);
            rows.push_back(r);
        }
        j["rows"] = rows;
        detail::write_json(out / "interp.json", j);
        return "interp: " + std::to_string(sc.epsilons.size()) + " settings verified";
    }

    if (task == "assemble") {
        const auto op = make_op();
        const auto dec = decompose(op);
        const auto bands = build_bands(dec);
        const auto fam = make_gaussian_bumps(sc.grid, 1, sc.seed);
        auto j = detail::report_header(sc);
        j["task"] = "assemble";
        nlohmann::json rows = nlohmann::json::array();
        std::string csv = "eps,band,e_j_l2,smooth_term\n";
        for (double eps : sc.epsilons) {
            const auto rep = assemble_theorem(fam.members[0].beta, op, dec, bands, sc.s2, eps);
            nlohmann::json r;
            r["epsilon"] = fmt(rep.epsilon);
            r["s2"] = fmt(rep.s2);
            r["I"] = fmt(rep.I);
            r["II"] = fmt(rep.II);
            r["measured_C"] = fmt(rep.measured_C);
            r["holds"] = rep.holds;
            rows.push_back(r);
            for (std::size_t b = 0; b < rep.band_l2.size(); ++b)
                csv += fmt(eps) + "," + std::to_string(b) + "," + fmt(rep.band_l2[b]) + "," +
                       fmt(rep.band_smooth[b]) + "\n";
            if (!rep.holds)
                throw NumericalError("assemble: assembled inequality failed at eps=" + fmt(eps));
        }
        j["rows"] = rows;
        detail::write_json(out / "assemble.json", j);
        detail::write_text(out / "assemble.csv", csv);
        return "assemble: " + std::to_string(sc.epsilons.size()) + " epsilons hold";
    }

    if (task == "report" || task == "full_report") {
        std::string s;
        for (const char* t : {"spectrum", "bands", "interp", "assemble"})
            s += run_scenario(sc, t, out_dir) + "; ";
        return s;
    }

    throw SchemaError("unknown task '" + task + "'");
}

}  // namespace speclab
