#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "speclab/scenario.hpp"

namespace {

int run(const std::string& task, const std::string& scenario_path, const std::string& out_dir,
        std::uint64_t seed, bool seed_set, double tol, bool tol_set) {
    speclab::Scenario sc = speclab::load_scenario(scenario_path);
    if (seed_set) sc.seed = seed;
    if (tol_set) {
        if (tol < 1e-12 || tol > 1e-4)
            throw speclab::SchemaError("--tol outside [1e-12, 1e-4]");
        sc.tol = tol;
    }
    std::cout << speclab::run_scenario(sc, task, out_dir) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"speclab: operator-adapted spectral calculus workbench"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir = "out";
    std::uint64_t seed = 0;
    double tol = 0.0;

    const char* names[] = {"spectrum", "bands", "ode", "solve",
                           "estimate", "interp", "assemble", "report"};
    std::vector<CLI::App*> subs;
    for (const char* n : names) {
        auto* s = app.add_subcommand(n);
        s->add_option("--scenario", scenario_path, "scenario JSON path")->required();
        s->add_option("--out", out_dir, "output directory");
        s->add_option("--seed", seed, "override scenario seed");
        s->add_option("--tol", tol, "override scenario tolerance");
        subs.push_back(s);
    }

    CLI11_PARSE(app, argc, argv);

    const CLI::App* active = app.get_subcommands().front();
    try {
        return run(active->get_name(), scenario_path, out_dir, seed,
                   active->count("--seed") > 0, tol, active->count("--tol") > 0);
    } catch (const speclab::SchemaError& e) {
        std::cerr << "{\"error\":\"schema\",\"message\":\"" << e.what() << "\"}\n";
        return 2;
    } catch (const speclab::CertificateError& e) {
        std::cerr << "{\"error\":\"certificate\",\"message\":\"" << e.what() << "\"}\n";
        return 4;
    } catch (const speclab::NumericalError& e) {
        std::cerr << "{\"error\":\"numerical\",\"message\":\"" << e.what() << "\"}\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "{\"error\":\"numerical\",\"message\":\"" << e.what() << "\"}\n";
        return 3;
    }
}
