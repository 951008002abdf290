// sandlab command-line driver.
//
//   sandlab gen        write generated inputs to files
//   sandlab run        run a model over many trials and write CSV/JSON
//   sandlab compare    compare two run directories
//   sandlab theorems   empirical checks of the complexity/steady-state bounds
//   sandlab limit-dist limit distribution of the moving parallelepiped
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sandlab/exact.hpp"
#include "sandlab/experiment.hpp"
#include "sandlab/input_gen.hpp"
#include "sandlab/limit_dist.hpp"
#include "sandlab/sandpile.hpp"
#include "sandlab/stats.hpp"

namespace fs = std::filesystem;
using namespace sandlab;

namespace {

std::uint64_t resolve_seed(std::uint64_t cli_seed) {
    if (const char* env = std::getenv("LAB_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return cli_seed;
}

Policy parse_policy(const std::string& name) {
    if (name == "lowest") return Policy::lowest;
    if (name == "random") return Policy::random;
    if (name == "highest") return Policy::highest;
    throw CLI::ValidationError("--policy", "must be lowest, random or highest");
}

int cmd_gen(const GeneratorSpec& spec, const std::string& kind,
            std::int64_t count, const std::string& out_dir) {
    GeneratorSpec g = spec;
    g.kind = generator_kind_from_name(kind);
    fs::create_directories(out_dir);
    for (std::int64_t i = 0; i < count; ++i) {
        auto rng = SplitMix64::stream(g.seed, 2 * i);
        std::ostringstream name;
        switch (g.kind) {
        case GeneratorKind::knapsack: {
            const IntegerBasis basis = knapsack_basis(g, rng);
            name << "basis_" << i << ".txt";
            save_basis_file((fs::path(out_dir) / name.str()).string(), basis);
            break;
        }
        case GeneratorKind::direct_gso: {
            const GsoState state = direct_gso_sample(g, rng);
            name << "gso_" << i << ".json";
            std::ofstream f(fs::path(out_dir) / name.str());
            f << gso_state_to_json(state) << "\n";
            break;
        }
        case GeneratorKind::sandpile_uniform: {
            const IntConfig config = sandpile_input(g, rng);
            name << "config_" << i << ".json";
            std::ofstream f(fs::path(out_dir) / name.str());
            f << int_config_to_json(config) << "\n";
            break;
        }
        }
    }
    std::cout << "wrote " << count << " " << kind << " input(s) to " << out_dir
              << "\n";
    return 0;
}

int cmd_theorems(const std::string& which, int n, std::int64_t trials,
                 std::uint64_t seed, std::int64_t T, std::int64_t I,
                 std::int64_t samples, std::int64_t thin, double delta,
                 double eps) {
    if (which == "thm3") {
        const double r_lo = 4.2, r_hi = 5.2;
        const auto rep =
            termination_check_thm3(n, delta, r_lo, r_hi, trials, seed);
        std::cout << "thm3: n=" << n << " delta=" << delta
                  << " trials=" << rep.trials
                  << " mean_energy=" << format_double(rep.mean_energy)
                  << " H=" << format_double(rep.energy_floor_h) << "\n"
                  << "thm3: fraction not terminated in E/4 steps = "
                  << format_double(rep.fraction_not_terminated) << "\n"
                  << "thm3: F_N/N = " << format_double(rep.mean_f_n_over_n)
                  << " (expect about 3.386)\n";
        const bool pass = rep.fraction_not_terminated >= 0.99;
        std::cout << (pass ? "PASS" : "FAIL") << "\n";
        return pass ? 0 : 1;
    }
    if (which == "thm4") {
        const auto rep = optimal_delta_check(n, 4.2, 5.2, trials, 0.01, eps, seed);
        std::cout << "thm4: n=" << n << " eps=" << eps
                  << " budget=10E/d with d=" << format_double(rep.d) << "\n"
                  << "thm4: mean steps " << format_double(rep.mean_steps)
                  << " of budget " << format_double(rep.mean_budget) << "\n"
                  << "thm4: terminated fraction = "
                  << format_double(rep.fraction_terminated) << "\n";
        const bool pass = rep.fraction_terminated >= 0.99;
        std::cout << (pass ? "PASS" : "FAIL") << "\n";
        return pass ? 0 : 1;
    }
    if (which == "thm2") {
        SandpileParams sp{T, I, Policy::lowest, 0};
        sp.validate();
        IntConfig g{n, std::vector<std::int64_t>(n - 1, 0)};
        g.heights[0] = 1;
        auto rng = SplitMix64::stream(seed, 0);
        const auto run = ssp_steady_state_sample(n, sp, g, -1, samples, rng, thin);
        double mean_log_rhf = 0.0;
        for (const auto& s : run.samples) {
            std::vector<double> h(s.heights.begin(), s.heights.end());
            mean_log_rhf += log_rhf(h, n);
        }
        mean_log_rhf /= static_cast<double>(run.samples.size());
        const double bound = T / 2.0 - static_cast<double>(I) / (2.0 * M_E * M_E);
        const double empirical = T / 2.0 - static_cast<double>(I) / 8.0;
        std::cout << "thm2: n=" << n << " T=" << T << " I=" << I
                  << " samples=" << run.samples.size() << "\n"
                  << "thm2: mean log RHF = " << format_double(mean_log_rhf)
                  << ", bound T/2 - I/(2e^2) = " << format_double(bound)
                  << ", empirical T/2 - I/8 = " << format_double(empirical)
                  << "\n";
        const bool pass =
            mean_log_rhf <= bound && std::abs(mean_log_rhf - empirical) <= 5.0;
        std::cout << (pass ? "PASS" : "FAIL") << "\n";
        return pass ? 0 : 1;
    }
    std::cerr << "unknown theorem id: " << which << " (use thm2|thm3|thm4)\n";
    return 2;
}

int cmd_limit_dist(int n, std::int64_t I, double tol, std::int64_t T,
                   bool corner, const std::string& out) {
    const auto [dist, report] = parallelepiped_limit(n, I, tol);
    std::cout << "limit-dist: n=" << n << " I=" << I
              << " iterations=" << report.iterations
              << " final_delta=" << format_double(report.final_delta)
              << " invariance_gap=" << format_double(report.max_invariance_gap)
              << (report.converged ? "" : " (NOT CONVERGED)") << "\n";
    if (corner) {
        SandpileParams sp{T, I, Policy::lowest, 0};
        const double density = ssp_corner_density(dist, n, I, sp);
        const double predicted =
            std::pow(static_cast<double>(I) / 2.0, -(n - 1));
        std::cout << "corner density = " << format_double(density)
                  << " (prediction (I/2)^-(n-1) = " << format_double(predicted)
                  << ")\n";
    }
    if (!out.empty()) {
        nlohmann::json j{{"n", n},
                         {"I", I},
                         {"weights", dist.weights},
                         {"iterations", report.iterations},
                         {"final_delta", report.final_delta},
                         {"converged", report.converged}};
        std::ofstream f(out);
        if (!f) {
            std::cerr << "cannot write " << out << "\n";
            return 1;
        }
        f << j.dump(2) << "\n";
    }
    return report.converged ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LLL and sandpile dynamics laboratory"};
    app.require_subcommand(1);

    // --- gen -------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate inputs and write them out");
    GeneratorSpec gen_spec;
    std::string gen_kind = "knapsack";
    std::int64_t gen_count = 1;
    std::string gen_out = "inputs";
    std::uint64_t gen_seed = 0;
    gen->add_option("--kind", gen_kind, "knapsack | direct-gso | sandpile-uniform");
    gen->add_option("--n", gen_spec.n, "dimension")->required();
    gen->add_option("--bits", gen_spec.bits, "knapsack entry bits (default 10n)");
    gen->add_option("--r-lo", gen_spec.r_lo, "direct-gso lower bound");
    gen->add_option("--r-hi", gen_spec.r_hi, "direct-gso upper bound");
    gen->add_option("--height-lo", gen_spec.h_lo, "sandpile lower bound");
    gen->add_option("--height-hi", gen_spec.h_hi, "sandpile upper bound");
    gen->add_option("--count", gen_count, "number of inputs");
    gen->add_option("--seed", gen_seed, "base seed");
    gen->add_option("--out", gen_out, "output directory");

    // --- run -------------------------------------------------------------
    auto* run = app.add_subcommand("run", "run a batch experiment");
    std::string run_model = "lll";
    std::string run_kind;
    std::string run_policy = "lowest";
    std::string run_out = "run_out";
    std::string from_manifest;
    ExperimentConfig cfg;
    bool paper_scale = false;
    bool independent = false;
    run->add_option("--model", run_model, "lll | lllsp | asm | ssp");
    run->add_option("--kind", run_kind,
                    "generator kind (defaults to knapsack for lll/lllsp, "
                    "sandpile-uniform for asm/ssp)");
    run->add_option("--n", cfg.generator.n, "dimension");
    run->add_option("--bits", cfg.generator.bits,
                    "knapsack entry bits (default 10n)");
    run->add_option("--r-lo", cfg.generator.r_lo, "direct-gso lower bound");
    run->add_option("--r-hi", cfg.generator.r_hi, "direct-gso upper bound");
    run->add_option("--height-lo", cfg.generator.h_lo, "sandpile lower bound");
    run->add_option("--height-hi", cfg.generator.h_hi, "sandpile upper bound");
    run->add_option("--delta", cfg.delta, "swap parameter, in (0, 3/4]");
    run->add_option("--T", cfg.T, "sandpile threshold");
    run->add_option("--I", cfg.I, "sandpile increment bound");
    run->add_option("--trials", cfg.trials, "trial / sample count");
    run->add_option("--seed", cfg.seed, "base seed (LAB_SEED overrides)");
    run->add_option("--policy", run_policy, "lowest | random | highest");
    run->add_option("--parallelism", cfg.parallelism, "worker threads");
    run->add_option("--max-steps", cfg.max_steps, "per-trial step cap");
    run->add_option("--burn-in", cfg.burn_in, "ssp chain burn-in (-1 = auto)");
    run->add_option("--thin", cfg.thin, "ssp chain thinning interval");
    run->add_option("--out", run_out, "output directory");
    run->add_option("--from-manifest", from_manifest,
                    "load the configuration from a manifest.json");
    run->add_flag("--paper-scale", paper_scale,
                  "full experiment protocol (5000 trials)");
    run->add_flag("--independent", independent,
                  "ssp: stabilize independent uniform inputs instead of "
                  "sampling the steady-state chain");
    run->add_flag("--trace", cfg.trace_first_trial,
                  "write trace.csv for trial 0");

    // --- compare ---------------------------------------------------------
    auto* cmp = app.add_subcommand("compare", "compare two run directories");
    std::string dir_a, dir_b;
    CompareTolerances tol;
    cmp->add_option("dir_a", dir_a)->required();
    cmp->add_option("dir_b", dir_b)->required();
    cmp->add_option("--tol-shape", tol.shape_middle,
                    "middle-site mean difference tolerance");
    cmp->add_option("--tol-rhf", tol.mean_rhf, "mean RHF difference tolerance");
    cmp->add_option("--ks-level", tol.ks_level, "KS significance level");

    // --- theorems ----------------------------------------------------------
    auto* thm = app.add_subcommand("theorems", "empirical theorem checks");
    std::string which;
    int thm_n = 40;
    std::int64_t thm_trials = 200, thm_T = 400, thm_I = 200;
    std::int64_t thm_samples = 500, thm_thin = 200;
    double thm_delta = 0.5, thm_eps = 0.1;
    std::uint64_t thm_seed = 0;
    thm->add_option("which", which, "thm2 | thm3 | thm4")->required();
    thm->add_option("--n", thm_n, "dimension");
    thm->add_option("--trials", thm_trials, "trial count");
    thm->add_option("--seed", thm_seed, "seed (LAB_SEED overrides)");
    thm->add_option("--T", thm_T, "thm2: threshold");
    thm->add_option("--I", thm_I, "thm2: increment bound");
    thm->add_option("--samples", thm_samples, "thm2: steady-state samples");
    thm->add_option("--thin", thm_thin, "thm2: chain thinning");
    thm->add_option("--delta", thm_delta, "thm3: swap parameter");
    thm->add_option("--eps", thm_eps, "thm4: epsilon");

    // --- limit-dist --------------------------------------------------------
    auto* lim = app.add_subcommand("limit-dist",
                                   "parallelepiped limit distribution");
    int lim_n = 3;
    std::int64_t lim_I = 4, lim_T = 8;
    double lim_tol = 1e-12;
    bool lim_corner = false;
    std::string lim_out;
    lim->add_option("--n", lim_n, "dimension");
    lim->add_option("--I", lim_I, "increment bound");
    lim->add_option("--T", lim_T, "threshold for the corner estimate");
    lim->add_option("--tol", lim_tol, "total-variation stopping tolerance");
    lim->add_flag("--corner-density", lim_corner,
                  "also estimate the steady-state corner density");
    lim->add_option("--out", lim_out, "write the distribution as JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            gen_spec.seed = resolve_seed(gen_seed);
            if (gen_kind == "knapsack" && gen->count("--bits") == 0)
                gen_spec.bits = 10 * gen_spec.n;
            return cmd_gen(gen_spec, gen_kind, gen_count, gen_out);
        }
        if (run->parsed()) {
            if (!from_manifest.empty()) {
                std::ifstream f(from_manifest);
                if (!f) {
                    std::cerr << "cannot open manifest " << from_manifest << "\n";
                    return 2;
                }
                nlohmann::json manifest;
                f >> manifest;
                cfg = config_from_json(manifest.at("config").dump());
            } else {
                cfg.model = model_from_name(run_model);
                cfg.policy = parse_policy(run_policy);
                if (run->count("--n") == 0) {
                    cfg.generator.n =
                        (cfg.model == Model::lll || cfg.model == Model::lllsp)
                            ? 80 : 100;
                }
                if (!run_kind.empty()) {
                    cfg.generator.kind = generator_kind_from_name(run_kind);
                } else {
                    cfg.generator.kind =
                        (cfg.model == Model::lll || cfg.model == Model::lllsp)
                            ? GeneratorKind::knapsack
                            : GeneratorKind::sandpile_uniform;
                }
                if (run->count("--bits") == 0)
                    cfg.generator.bits = 10 * cfg.generator.n;
                if (paper_scale && run->count("--trials") == 0)
                    cfg.trials = 5000;
                cfg.ssp_chain = !independent;
                cfg.generator.seed = cfg.seed;
            }
            cfg.seed = resolve_seed(cfg.seed);
            cfg.generator.seed = cfg.seed;
            cfg.output_dir = run_out;
            return run_experiment(cfg);
        }
        if (cmp->parsed()) {
            return compare_runs(dir_a, dir_b, tol, std::cout);
        }
        if (thm->parsed()) {
            return cmd_theorems(which, thm_n, thm_trials, resolve_seed(thm_seed),
                                thm_T, thm_I, thm_samples, thm_thin, thm_delta,
                                thm_eps);
        }
        if (lim->parsed()) {
            return cmd_limit_dist(lim_n, lim_I, lim_tol, lim_T, lim_corner,
                                  lim_out);
        }
    } catch (const std::invalid_argument& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
