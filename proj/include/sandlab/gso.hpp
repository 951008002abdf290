// Lattice-basis dynamics in Gram-Schmidt coordinates.
//
// A basis is represented only through its GSO data: the log-ratios
// r_i = log(|b*_i| / |b*_{i+1}|) and the lower-triangular coefficients
// mu_{i,j}. The swap of two neighboring basis vectors has a closed form in
// these coordinates, so the reduction loop never touches basis vectors.
// Sites and matrix indices are 0-based here; site k means the pair
// (b_{k+1}, b_{k+2}) in 1-based basis numbering.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sandlab/rng.hpp"

namespace sandlab {

enum class Policy { lowest, random, highest };

struct GsoState {
    int n = 0;                            // basis dimension, n >= 2
    std::vector<double> r;                // n-1 entries, r[k] = log alpha_{k+1}
    std::vector<std::vector<double>> mu;  // mu[i].size() == i, mu[i][j] for j < i

    static GsoState zero(int n);
    // Superdiagonal coefficient mu_{k+2,k+1} attached to site k.
    double superdiag(int k) const { return mu[k + 1][k]; }
};

struct ReductionParams {
    double delta = 0.7;          // swap condition delta, in (0, 3/4]
    Policy policy = Policy::lowest;
    std::int64_t max_steps = 0;  // 0: automatic cap from the initial energy

    // Swap condition in log coordinates: site k is unstable iff r[k] > T.
    double threshold() const;
};

struct ToppleEvent {
    std::int64_t step = 0;
    int site = 0;
    double increment = 0.0;   // amount given to each neighbor (log Q_k here)
    double mu_abs = 0.0;      // |mu| consumed by this step (NaN for ASM/SSP)
    double q_inv_sq = 0.0;    // Q_k^{-2} (NaN for ASM/SSP)
    double energy_drop = 0.0; // equals 2 * increment
};

struct RunTrace {
    std::vector<ToppleEvent> events;  // filled only when record_events is set
    bool terminated = false;
    std::int64_t steps = 0;
    double initial_energy = 0.0;
    double final_energy = 0.0;        // tracked incrementally across steps
    double sum_log_mu_inv_sq = 0.0;   // sum of log mu_{k(i)}^{-2} over steps
};

// Q_k = (exp(-2 r_k) + mu_{k+2,k+1}^2)^{-1/2}; throws std::out_of_range.
double q_factor(const GsoState& state, int k);

// log Q for a single site given its (r, mu) pair; shared with the sandpile
// models, which keep only the superdiagonal mu.
double log_q(double r_k, double mu_k);

// Full size reduction: afterwards |mu_{i,j}| <= 1/2 everywhere, r unchanged.
// Idempotent. Rounding is to nearest with ties to even.
void size_reduce(GsoState& state);

// Size-reduce rows from_row..n-1 only; equivalent to size_reduce when all
// rows above are already reduced (their values are never modified).
void size_reduce_rows(GsoState& state, int from_row);

// Site selection among {k : r[k] > T}. `rng` is required for Policy::random.
std::optional<int> find_unstable(const GsoState& state,
                                 const ReductionParams& params,
                                 SplitMix64* rng = nullptr);

// Neighbor-swap update at site k: r and mu change exactly as a basis swap
// would change the underlying GSO data. Throws std::out_of_range.
void swap_update(GsoState& state, int k);

// The reduction loop: size-reduce, pick an unstable site, swap, repeat.
// Mutates `state` to the final configuration and reports the run. When the
// step cap is hit the trace comes back with terminated == false.
RunTrace lll_reduce(GsoState& state, const ReductionParams& params,
                    SplitMix64* rng = nullptr, bool record_events = true);

// Weighted height sum E = sum_i (i+1)(n-i-1) r[i] (0-based i).
double energy(const std::vector<double>& heights, int n);
double energy(const GsoState& state);

// Largest energy a stable configuration can have: (T/6)(n^3 - n).
double energy_floor(int n, double T);

// Root Hermite factor exp( (1/n^2) sum_i (n-i-1) r[i] ) (0-based i).
double rhf(const std::vector<double>& heights, int n);
double rhf(const GsoState& state);
double log_rhf(const std::vector<double>& heights, int n);

// Step cap used when ReductionParams::max_steps == 0.
std::int64_t default_step_cap(double initial_energy, double delta);

}  // namespace sandlab
