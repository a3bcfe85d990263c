#include <cstdint>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gaplab/error.hpp"
#include "gaplab/harness.hpp"

using namespace gaplab;

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for the fundamental gap of geodesic balls:\n"
                 "eigenvalues, the 1D comparison operator, the modulus evolution,\n"
                 "and the two-point log-concavity samples"};
    app.require_subcommand(0, 1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file; flags override its values");
    bool print_config = false;
    app.add_flag("--print-config", print_config, "print the merged configuration and exit");

    int n = 0;
    double D = 0.0;
    std::vector<int> k_list;
    int nodes = 0;
    double t_end = 0.0;
    std::vector<std::string> tols;
    std::uint64_t seed = 0;
    int pairs = 0;
    std::string out;
    auto* opt_n = app.add_option("--n", n, "sphere dimension n");
    auto* opt_D = app.add_option("--D", D, "diameter D");
    auto* opt_k = app.add_option("--k", k_list, "supersolution levels (repeatable)");
    auto* opt_nodes = app.add_option("--nodes", nodes, "grid nodes per half-interval");
    auto* opt_t_end = app.add_option("--t-end", t_end, "time horizon for the evolution");
    app.add_option("--tol", tols, "tolerance override: VALUE sets 'flow', KEY=VALUE any key");
    auto* opt_seed = app.add_option("--seed", seed, "seed for the two-point sampler");
    auto* opt_pairs = app.add_option("--pairs", pairs, "two-point sample count");
    auto* opt_out = app.add_option("--out", out, "output directory");

    auto add_sub = [&](const std::string& name, const std::string& desc) {
        auto* sub = app.add_subcommand(name, desc);
        sub->fallthrough();
        return sub;
    };
    auto* cmd_eigen = add_sub("eigen", "comparison-operator spectrum mu0, mu1 and the gap bound");
    auto* cmd_robin = add_sub("robin", "boundary-value family members and their couplings");
    auto* cmd_modulus = add_sub("modulus", "piecewise initial modulus for each level k");
    auto* cmd_flow = add_sub("flow", "evolve the modulus to its stationary profile per k");
    auto* cmd_verify_gap =
        add_sub("verify-gap", "gap-chain margins on balls plus two-point sampling");
    auto* cmd_sweep = add_sub("sweep", "comparison-operator gap over the (n, D) grid");

    CLI11_PARSE(app, argc, argv);

    RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = RunConfig::from_json_file(config_path);
        if (opt_n->count()) cfg.n = n;
        if (opt_D->count()) cfg.D = D;
        if (opt_k->count()) cfg.k_list = k_list;
        if (opt_nodes->count()) cfg.grid_nodes = nodes;
        if (opt_t_end->count()) cfg.t_end = t_end;
        if (opt_seed->count()) cfg.seed = seed;
        if (opt_pairs->count()) cfg.pairs = pairs;
        if (opt_out->count()) cfg.output_dir = out;
        cfg.explicit_case = opt_n->count() > 0 || opt_D->count() > 0;
        for (const std::string& entry : tols) {
            auto eq = entry.find('=');
            std::string key = eq == std::string::npos ? "flow" : entry.substr(0, eq);
            std::string value = eq == std::string::npos ? entry : entry.substr(eq + 1);
            if (cfg.tolerances.find(key) == cfg.tolerances.end())
                fail("invalid system", "unknown tolerance key: " + key);
            try {
                cfg.tolerances[key] = std::stod(value);
            } catch (const std::logic_error&) {
                fail("invalid system", "tolerance value is not a number: " + entry);
            }
        }

        if (print_config) {
            std::cout << cfg.to_json() << '\n';
            return 0;
        }

        if (*cmd_eigen) return run_eigen(cfg, std::cout);
        if (*cmd_robin) return run_robin(cfg, std::cout);
        if (*cmd_modulus) return run_modulus(cfg, std::cout);
        if (*cmd_flow) return run_flow(cfg, std::cout);
        if (*cmd_verify_gap) return run_verify_gap(cfg, std::cout);
        if (*cmd_sweep) return run_sweep(cfg, std::cout);
    } catch (const NumericsError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    }

    std::cout << app.help();
    return 1;
}
