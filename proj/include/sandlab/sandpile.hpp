// Sandpile models on the cycle graph with one sink.
//
// Vertices are v_1..v_n with v_n the sink; the n-1 non-sink heights live in
// heights[0..n-2]. A site is stable when its height is <= T; toppling site k
// removes twice the increment and gives the increment to each neighbor, with
// anything sent to the sink discarded. ASM uses the fixed increment I, SSP
// draws the increment uniformly from {1..I}, and LLL-SP uses log Q_k derived
// from the site's height and its mu coefficient.
#pragma once

#include <cstdint>
#include <vector>

#include "sandlab/gso.hpp"
#include "sandlab/rng.hpp"

namespace sandlab {

struct SandpileParams {
    std::int64_t T = 0;
    std::int64_t I = 1;  // increment bound, 0 < I <= T/2
    Policy policy = Policy::lowest;
    std::int64_t max_steps = 0;  // 0: effectively unbounded

    void validate() const;  // throws std::invalid_argument
};

struct IntConfig {
    int n = 0;
    std::vector<std::int64_t> heights;  // n-1 entries

    bool operator==(const IntConfig&) const = default;
};

struct RealConfig {
    int n = 0;
    std::vector<double> heights;  // n-1 entries
    std::vector<double> mu;       // n-1 superdiagonal coefficients, |mu| <= 1/2

    static RealConfig from_gso(const GsoState& state);
};

std::int64_t energy(const IntConfig& config);
double rhf(const RealConfig& config);
double log_rhf(const RealConfig& config);
std::int64_t sum_heights(const IntConfig& config);

// --- ASM ---------------------------------------------------------------

// Deterministic toppling at site k (0-based). Throws std::out_of_range.
void asm_topple(IntConfig& config, int k, const SandpileParams& params);

struct AsmResult {
    IntConfig config;
    std::vector<std::int64_t> topples_per_site;
    std::int64_t total_topples = 0;
    std::int64_t sand_to_sink = 0;
    bool terminated = true;
};

// Stabilize by repeated legal topplings; the result is independent of the
// site-selection policy. `rng` only matters for Policy::random.
AsmResult asm_stabilize(IntConfig config, const SandpileParams& params,
                        SplitMix64* rng = nullptr);

// r (+) s: pointwise sum followed by stabilization.
IntConfig asm_add(const IntConfig& r, const IntConfig& s,
                  const SandpileParams& params);

struct CycleState {
    IntConfig config;
    double frequency;
};

// Iterate m -> m (+) g from the empty configuration until the sequence
// cycles; returns the cycle states with their visit frequencies (uniform,
// since the iteration map is deterministic). Throws if no cycle is found
// within max_iters or if g violates the gcd non-degeneracy condition.
std::vector<CycleState> asm_recurrent_cycle(int n, const SandpileParams& params,
                                            const IntConfig& g,
                                            std::int64_t max_iters = 1000000);

// --- SSP ---------------------------------------------------------------

// Stochastic toppling; returns the sampled gamma in {1..I}.
std::int64_t ssp_topple(IntConfig& config, int k, const SandpileParams& params,
                        SplitMix64& rng);

struct SspResult {
    IntConfig config;
    RunTrace trace;
    std::int64_t total_topples = 0;
    std::int64_t sand_to_sink = 0;
};

SspResult ssp_stabilize(IntConfig config, const SandpileParams& params,
                        SplitMix64& rng, bool record_events = false);

struct SteadyStateRun {
    std::vector<IntConfig> samples;
    std::int64_t burn_in_used = 0;
    std::int64_t mixing_estimate = 0;  // iterations until the shape stopped drifting
    std::int64_t thin = 1;
};

// Samples of the SSP steady state via the g-addition chain
// s -> stabilize(s + g), started from the empty configuration. burn_in < 0
// selects the automatic rule: 10x the first iteration count after which the
// running mean shape drifts by less than one standard error per site.
// Consecutive kept samples are `thin` chain steps apart.
SteadyStateRun ssp_steady_state_sample(int n, const SandpileParams& params,
                                       const IntConfig& g, std::int64_t burn_in,
                                       std::int64_t n_samples, SplitMix64& rng,
                                       std::int64_t thin = 1);

// --- LLL-SP ------------------------------------------------------------

// Topple the lowest (or policy-selected) site with height above
// T = -log(delta)/2 using log Q_k, then resample the mu coefficients of the
// toppled site and its existing neighbors uniformly from [-1/2, 1/2).
// Mutates `config` to the final state.
RunTrace lllsp_stabilize(RealConfig& config, const ReductionParams& params,
                         SplitMix64& rng, bool record_events = false);

}  // namespace sandlab
