// Aggregation across trials and the empirical checks behind the complexity
// and steady-state statements.
#pragma once

#include <cstdint>
#include <vector>

#include "sandlab/gso.hpp"

namespace sandlab {

// A finished run keyed by its trial index; aggregation sorts by key first so
// every statistic is bit-identical under permutation of the collection.
struct RunShape {
    std::int64_t trial = 0;
    std::vector<double> r;
};

struct ShapeProfile {
    int n = 0;
    std::vector<double> mean_r;
    std::vector<double> stderr_r;
    std::int64_t trials = 0;
};

struct Histogram {
    std::vector<double> bin_edges;      // ascending, counts.size() + 1 entries
    std::vector<std::int64_t> counts;
    std::int64_t total = 0;
    double mean = 0.0;
    double stddev = 0.0;
};

struct ShapeMetrics {
    double plateau = 0.0;        // mean of mean_r over the middle third
    double threshold_gap = 0.0;  // T - plateau
    double boundary_gap = 0.0;   // plateau - mean of the two extreme sites
    int onset_left = 0;          // first site (1-based) within 3 stderr of the plateau
    int onset_right = 0;         // last such site (1-based)
};

struct MixingReport {
    std::vector<double> density_edges;  // bins over [0, 1/2]
    std::vector<double> density;        // empirical |mu| density per bin
    std::vector<double> autocorr;       // lags 0..L of |mu_{k(i)}|
    bool autocorr_defined = true;       // false for a zero-variance trace
    std::int64_t trace_length = 0;
    double m_hat = 0.0;      // mean of log mu^{-2}
    double sigma_hat = 0.0;  // standard deviation of log mu^{-2}
};

ShapeProfile average_shape(std::vector<RunShape> runs);

// Middle-third site range [lo, hi) in 0-based sites, used for the plateau.
std::pair<int, int> middle_third(int n);

ShapeMetrics shape_metrics(const ShapeProfile& profile, double T);

// Histogram over [min, max] with `bins` equal bins; values are paired with
// their trial keys for deterministic summation order.
Histogram rhf_histogram(std::vector<std::pair<std::int64_t, double>> keyed_rhf,
                        int bins = 50);

// Two-sample Kolmogorov-Smirnov statistic in [0, 1].
double ks_distance(std::vector<double> a, std::vector<double> b);

MixingReport mu_trace_report(const RunTrace& trace, int max_lag = 50);

struct Thm3Report {
    std::int64_t trials = 0;
    double fraction_not_terminated = 0.0;
    double mean_f_n_over_n = 0.0;       // average of F_N / N across trials
    double mean_energy = 0.0;           // average initial energy
    double energy_floor_h = 0.0;        // H for the chosen n and T
    double max_accounting_error = 0.0;  // |E_final - (E_initial - sum drops)|
};

// Run LLL-SP for exactly floor(E/4) steps on direct-gso inputs with heights
// in [r_lo, r_hi]; every input must satisfy E > 10 H.
Thm3Report termination_check_thm3(int n, double delta, double r_lo, double r_hi,
                                  std::int64_t trials, std::uint64_t seed);

struct Thm4Report {
    std::int64_t trials = 0;
    double fraction_terminated = 0.0;
    double d = 0.0;            // log(3/4 + (1-eps)^2/4)^{-1}
    double eta = 0.0;          // requested failure probability (reported only)
    double mean_steps = 0.0;
    double mean_budget = 0.0;
};

// LLL-SP at delta = 3/4 with step budget 10 E / d per trial.
Thm4Report optimal_delta_check(int n, double r_lo, double r_hi,
                               std::int64_t trials, double eta, double eps,
                               std::uint64_t seed);

}  // namespace sandlab
