#include "sandlab/sandpile.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace sandlab {

void SandpileParams::validate() const {
    if (I <= 0 || 2 * I > T)
        throw std::invalid_argument("sandpile params need 0 < I <= T/2");
}

RealConfig RealConfig::from_gso(const GsoState& state) {
    RealConfig c;
    c.n = state.n;
    c.heights = state.r;
    c.mu.resize(static_cast<std::size_t>(state.n - 1));
    for (int k = 0; k + 1 < state.n; ++k) c.mu[k] = state.superdiag(k);
    return c;
}

std::int64_t energy(const IntConfig& config) {
    std::int64_t e = 0;
    const int n = config.n;
    for (int i = 0; i < n - 1; ++i)
        e += static_cast<std::int64_t>(i + 1) * (n - i - 1) * config.heights[i];
    return e;
}

double rhf(const RealConfig& config) { return rhf(config.heights, config.n); }
double log_rhf(const RealConfig& config) {
    return log_rhf(config.heights, config.n);
}

std::int64_t sum_heights(const IntConfig& config) {
    return std::accumulate(config.heights.begin(), config.heights.end(),
                           std::int64_t{0});
}

namespace {

void check_site(int k, int n) {
    if (k < 0 || k >= n - 1) throw std::out_of_range("site index out of range");
}

template <typename Config, typename Pred>
std::optional<int> select_site(const Config& config, Pred unstable,
                               Policy policy, SplitMix64* rng) {
    const int sites = config.n - 1;
    switch (policy) {
    case Policy::lowest:
        for (int k = 0; k < sites; ++k)
            if (unstable(k)) return k;
        return std::nullopt;
    case Policy::highest:
        for (int k = sites - 1; k >= 0; --k)
            if (unstable(k)) return k;
        return std::nullopt;
    case Policy::random: {
        if (rng == nullptr)
            throw std::invalid_argument("random policy needs an rng");
        int count = 0;
        for (int k = 0; k < sites; ++k) count += unstable(k);
        if (count == 0) return std::nullopt;
        auto pick = static_cast<std::int64_t>(rng->below(count));
        for (int k = 0; k < sites; ++k)
            if (unstable(k) && pick-- == 0) return k;
        return std::nullopt;  // unreachable
    }
    }
    return std::nullopt;
}

// Move `amount` out of site k, `amount/2` to each neighbor; returns the part
// lost to the sink.
template <typename T, typename Vec>
T apply_topple(Vec& heights, int k, int sites, T give) {
    heights[k] -= 2 * give;
    T lost = 0;
    if (k - 1 >= 0) heights[k - 1] += give; else lost += give;
    if (k + 1 <= sites - 1) heights[k + 1] += give; else lost += give;
    return lost;
}

}  // namespace

void asm_topple(IntConfig& config, int k, const SandpileParams& params) {
    check_site(k, config.n);
    apply_topple<std::int64_t>(config.heights, k, config.n - 1, params.I);
}

AsmResult asm_stabilize(IntConfig config, const SandpileParams& params,
                        SplitMix64* rng) {
    params.validate();
    AsmResult out;
    out.topples_per_site.assign(static_cast<std::size_t>(config.n - 1), 0);
    const std::int64_t cap = params.max_steps > 0
                                 ? params.max_steps
                                 : std::numeric_limits<std::int64_t>::max();
    auto unstable = [&](int k) { return config.heights[k] > params.T; };
    // Lowest-first runs with a resume pointer: after a topple at k only
    // heights k-1..k+1 changed, so no site below k-1 can have become
    // unstable.
    int resume = 0;
    while (out.total_topples < cap) {
        std::optional<int> site;
        if (params.policy == Policy::lowest) {
            int k = resume;
            while (k < config.n - 1 && !unstable(k)) ++k;
            if (k < config.n - 1) site = k;
        } else {
            site = select_site(config, unstable, params.policy, rng);
        }
        if (!site) {
            out.config = std::move(config);
            return out;
        }
        out.sand_to_sink += apply_topple<std::int64_t>(
            config.heights, *site, config.n - 1, params.I);
        ++out.topples_per_site[*site];
        ++out.total_topples;
        resume = std::max(*site - 1, 0);
    }
    out.terminated = false;
    out.config = std::move(config);
    return out;
}

IntConfig asm_add(const IntConfig& r, const IntConfig& s,
                  const SandpileParams& params) {
    if (r.n != s.n) throw std::invalid_argument("asm_add: dimension mismatch");
    IntConfig sum = r;
    for (std::size_t i = 0; i < sum.heights.size(); ++i)
        sum.heights[i] += s.heights[i];
    return asm_stabilize(std::move(sum), params).config;
}

std::vector<CycleState> asm_recurrent_cycle(int n, const SandpileParams& params,
                                            const IntConfig& g,
                                            std::int64_t max_iters) {
    params.validate();
    if (g.n != n) throw std::invalid_argument("g has wrong dimension");
    const std::int64_t d = std::gcd(params.T, params.I);
    bool coprime = false;
    for (auto gi : g.heights) coprime = coprime || std::gcd(gi, d) == 1;
    if (!coprime)
        throw std::invalid_argument(
            "asm_recurrent_cycle: no g_i coprime to gcd(T, I)");

    IntConfig state{n, std::vector<std::int64_t>(n - 1, 0)};
    std::map<std::vector<std::int64_t>, std::int64_t> first_seen;
    std::vector<IntConfig> trajectory;
    for (std::int64_t m = 0; m < max_iters; ++m) {
        state = asm_add(state, g, params);
        auto [it, fresh] = first_seen.try_emplace(state.heights, m);
        if (!fresh) {
            const std::int64_t start = it->second;
            const std::int64_t period = m - start;
            std::vector<CycleState> cycle;
            cycle.reserve(period);
            for (std::int64_t i = start; i < m; ++i)
                cycle.push_back({trajectory[i], 1.0 / period});
            return cycle;
        }
        trajectory.push_back(state);
    }
    throw std::runtime_error("asm_recurrent_cycle: no cycle within budget");
}

std::int64_t ssp_topple(IntConfig& config, int k, const SandpileParams& params,
                        SplitMix64& rng) {
    check_site(k, config.n);
    const std::int64_t gamma =
        1 + static_cast<std::int64_t>(rng.below(params.I));
    apply_topple<std::int64_t>(config.heights, k, config.n - 1, gamma);
    return gamma;
}

SspResult ssp_stabilize(IntConfig config, const SandpileParams& params,
                        SplitMix64& rng, bool record_events) {
    params.validate();
    SspResult out;
    out.trace.initial_energy = static_cast<double>(energy(config));
    out.trace.final_energy = out.trace.initial_energy;
    const std::int64_t cap = params.max_steps > 0
                                 ? params.max_steps
                                 : std::numeric_limits<std::int64_t>::max();
    auto unstable = [&](int k) { return config.heights[k] > params.T; };
    const double nan = std::numeric_limits<double>::quiet_NaN();
    int resume = 0;
    for (;;) {
        std::optional<int> site;
        if (params.policy == Policy::lowest) {
            int k = resume;
            while (k < config.n - 1 && !unstable(k)) ++k;
            if (k < config.n - 1) site = k;
        } else {
            site = select_site(config, unstable, params.policy, &rng);
        }
        if (!site) {
            out.trace.terminated = true;
            break;
        }
        if (out.total_topples >= cap) break;
        const std::int64_t gamma =
            1 + static_cast<std::int64_t>(rng.below(params.I));
        out.sand_to_sink += apply_topple<std::int64_t>(
            config.heights, *site, config.n - 1, gamma);
        ++out.total_topples;
        ++out.trace.steps;
        out.trace.final_energy -= 2.0 * static_cast<double>(gamma);
        if (record_events) {
            out.trace.events.push_back({out.trace.steps, *site,
                                        static_cast<double>(gamma), nan, nan,
                                        2.0 * static_cast<double>(gamma)});
        }
        resume = std::max(*site - 1, 0);
    }
    out.config = std::move(config);
    return out;
}

SteadyStateRun ssp_steady_state_sample(int n, const SandpileParams& params,
                                       const IntConfig& g, std::int64_t burn_in,
                                       std::int64_t n_samples, SplitMix64& rng,
                                       std::int64_t thin) {
    params.validate();
    if (g.n != n)
        throw std::invalid_argument("steady state: g has wrong dimension");
    if (thin < 1) thin = 1;
    SteadyStateRun out;
    out.thin = thin;
    // Warm start: stabilizing a far-from-threshold uniform configuration
    // already lands on the steady state, so the additions only have to keep
    // stirring it. A cold start would need ~n*I additions per refresh of the
    // far boundary before the first usable sample.
    IntConfig state{n, std::vector<std::int64_t>(n - 1, 0)};
    for (auto& h : state.heights)
        h = params.T + 1 + static_cast<std::int64_t>(
                               rng.below(2 * params.T));
    state = ssp_stabilize(std::move(state), params, rng).config;
    auto step = [&]() {
        for (std::size_t i = 0; i < state.heights.size(); ++i)
            state.heights[i] += g.heights[i];
        state = ssp_stabilize(std::move(state), params, rng).config;
    };

    if (burn_in < 0) {
        // Drift-based mixing estimate: advance in blocks and compare block
        // mean shapes; stop once the worst per-site drift is below one
        // standard error of the block mean.
        const std::int64_t block = std::max<std::int64_t>(500, 50LL * n);
        std::vector<double> prev_mean;
        std::int64_t iters = 0;
        // The chain starts warm, so the drift scan is a safety net, not the
        // main equilibration mechanism; cap it accordingly.
        const std::int64_t hard_cap = 40 * block;
        while (iters < hard_cap) {
            std::vector<double> mean(state.heights.size(), 0.0);
            std::vector<double> sq(state.heights.size(), 0.0);
            for (std::int64_t b = 0; b < block; ++b) {
                step();
                for (std::size_t i = 0; i < mean.size(); ++i) {
                    mean[i] += static_cast<double>(state.heights[i]);
                    sq[i] += static_cast<double>(state.heights[i]) *
                             static_cast<double>(state.heights[i]);
                }
            }
            iters += block;
            for (std::size_t i = 0; i < mean.size(); ++i) {
                mean[i] /= static_cast<double>(block);
                sq[i] = sq[i] / static_cast<double>(block) - mean[i] * mean[i];
            }
            if (!prev_mean.empty()) {
                bool settled = true;
                for (std::size_t i = 0; i < mean.size(); ++i) {
                    const double se = std::sqrt(std::max(sq[i], 0.0) /
                                                static_cast<double>(block));
                    if (std::abs(mean[i] - prev_mean[i]) > std::max(se, 1e-12))
                        settled = false;
                }
                if (settled) break;
            }
            prev_mean = mean;
        }
        out.mixing_estimate = iters;
        burn_in = 10 * iters;
        // The drift scan already advanced the chain by `iters` steps.
        burn_in -= iters;
        if (burn_in < 0) burn_in = 0;
    }
    out.burn_in_used = burn_in + out.mixing_estimate;

    for (std::int64_t i = 0; i < burn_in; ++i) step();
    out.samples.reserve(n_samples);
    for (std::int64_t s = 0; s < n_samples; ++s) {
        for (std::int64_t t = 0; t < thin; ++t) step();
        out.samples.push_back(state);
    }
    return out;
}

RunTrace lllsp_stabilize(RealConfig& config, const ReductionParams& params,
                         SplitMix64& rng, bool record_events) {
    RunTrace trace;
    trace.initial_energy = energy(config.heights, config.n);
    trace.final_energy = trace.initial_energy;
    const double T = params.threshold();
    const std::int64_t cap = params.max_steps > 0
                                 ? params.max_steps
                                 : default_step_cap(trace.initial_energy,
                                                    params.delta);
    auto unstable = [&](int k) { return config.heights[k] > T; };
    const int sites = config.n - 1;
    int resume = 0;
    for (;;) {
        std::optional<int> site;
        if (params.policy == Policy::lowest) {
            int k = resume;
            while (k < sites && !unstable(k)) ++k;
            if (k < sites) site = k;
        } else {
            site = select_site(config, unstable, params.policy, &rng);
        }
        if (!site) {
            trace.terminated = true;
            break;
        }
        if (trace.steps >= cap) break;
        const int k = *site;
        const double mu = config.mu[k];
        const double q_inv_sq =
            std::exp(-2.0 * config.heights[k]) + mu * mu;
        const double log_q_k = -0.5 * std::log(q_inv_sq);
        apply_topple<double>(config.heights, k, sites, log_q_k);
        if (k - 1 >= 0) config.mu[k - 1] = rng.uniform(-0.5, 0.5);
        config.mu[k] = rng.uniform(-0.5, 0.5);
        if (k + 1 <= sites - 1) config.mu[k + 1] = rng.uniform(-0.5, 0.5);
        ++trace.steps;
        trace.final_energy -= 2.0 * log_q_k;
        trace.sum_log_mu_inv_sq += -2.0 * std::log(std::abs(mu));
        if (record_events) {
            trace.events.push_back({trace.steps, k, log_q_k, std::abs(mu),
                                    q_inv_sq, 2.0 * log_q_k});
        }
        resume = std::max(k - 1, 0);
    }
    return trace;
}

}  // namespace sandlab
