// Batch experiment driver: generate inputs, run a model over many trials,
// aggregate, and write plot-ready CSV plus a JSON summary and a manifest
// that reproduces the run byte for byte.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sandlab/gso.hpp"
#include "sandlab/input_gen.hpp"
#include "sandlab/sandpile.hpp"
#include "sandlab/stats.hpp"

namespace sandlab {

enum class Model { lll, lllsp, asm_model, ssp };

const char* model_name(Model model);
Model model_from_name(const std::string& name);

struct ExperimentConfig {
    Model model = Model::lll;
    GeneratorSpec generator;
    double delta = 0.7;            // lll / lllsp
    std::int64_t T = 0, I = 1;     // asm / ssp
    Policy policy = Policy::lowest;
    std::int64_t trials = 500;
    std::uint64_t seed = 0;
    int parallelism = 1;           // worker threads for independent trials
    std::string output_dir;
    std::int64_t max_steps = 0;
    bool trace_first_trial = false;
    // ssp steady-state chain settings; ssp_chain=false stabilizes
    // independent uniform inputs instead.
    bool ssp_chain = true;
    std::int64_t burn_in = -1;     // -1: automatic
    std::int64_t thin = 200;
};

std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const std::string& text);

struct TrialResult {
    std::int64_t trial = 0;
    std::vector<double> final_r;
    double rhf_value = 0.0;
    double log_rhf_value = 0.0;
    std::int64_t steps = 0;
    bool terminated = true;
    double initial_energy = 0.0;
    double final_energy = 0.0;
};

struct ExperimentResult {
    std::vector<TrialResult> trials;  // ordered by trial index
    ShapeProfile shape;
    Histogram rhf_hist;
    bool all_terminated = true;
    std::int64_t burn_in_used = 0;    // ssp chain only
};

// Exit codes: 0 success, 2 invalid configuration, 3 at least one trial hit
// its step cap (outputs are still written, flagged in the summary).
int run_experiment(const ExperimentConfig& config);

// In-memory variant used by tests; does not touch the filesystem.
ExperimentResult execute_experiment(const ExperimentConfig& config);

struct CompareTolerances {
    double shape_middle = 0.01;  // per-site mean difference, middle third
    double mean_rhf = 0.001;
    double ks_level = 0.01;      // significance level of the KS gate
};

struct CompareReport {
    int n = 0;
    double max_middle_diff = 0.0;
    double mean_rhf_diff = 0.0;
    double ks_statistic = 0.0;
    double ks_critical = 0.0;
    bool pass = false;
    std::vector<double> site_diff;  // per-site |mean_a - mean_b|
};

// Exit codes: 0 PASS, 1 FAIL, 2 incompatible run directories.
int compare_runs(const std::string& dir_a, const std::string& dir_b,
                 const CompareTolerances& tol, std::ostream& out,
                 CompareReport* report = nullptr);

// Two-sample KS critical value c(alpha) * sqrt((m+n)/(m n)).
double ks_critical_value(std::size_t m, std::size_t n, double alpha);

// Shortest round-trip decimal form; the only double formatter used in
// output files, so reruns are byte-identical.
std::string format_double(double v);

// Wire formats: {"n":., "r":[..], "mu":[[..],..]} for GSO states, a bare
// height array for integer configurations, {"heights":[..], "mu":[..]} for
// real ones.
std::string gso_state_to_json(const GsoState& state);
GsoState gso_state_from_json(const std::string& text);
std::string int_config_to_json(const IntConfig& config);
IntConfig int_config_from_json(const std::string& text);
std::string real_config_to_json(const RealConfig& config);
RealConfig real_config_from_json(const std::string& text);

}  // namespace sandlab
