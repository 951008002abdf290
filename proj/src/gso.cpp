#include "sandlab/gso.hpp"

#include <cmath>
#include <stdexcept>

namespace sandlab {

GsoState GsoState::zero(int n) {
    GsoState s;
    s.n = n;
    s.r.assign(static_cast<std::size_t>(n - 1), 0.0);
    s.mu.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) s.mu[i].assign(static_cast<std::size_t>(i), 0.0);
    return s;
}

double ReductionParams::threshold() const { return -0.5 * std::log(delta); }

namespace {

void check_site(const GsoState& state, int k) {
    if (k < 0 || k >= state.n - 1)
        throw std::out_of_range("site index out of range");
}

// Nearest integer, ties to even (matches the exact oracle's rounding and
// keeps mu = 1/2 a fixed point of size reduction).
double round_nearest(double x) { return std::nearbyint(x); }

}  // namespace

double q_factor(const GsoState& state, int k) {
    check_site(state, k);
    return 1.0 / std::sqrt(std::exp(-2.0 * state.r[k]) +
                           state.superdiag(k) * state.superdiag(k));
}

double log_q(double r_k, double mu_k) {
    return -0.5 * std::log(std::exp(-2.0 * r_k) + mu_k * mu_k);
}

void size_reduce(GsoState& state) { size_reduce_rows(state, 1); }

void size_reduce_rows(GsoState& state, int from_row) {
    for (int i = std::max(from_row, 1); i < state.n; ++i) {
        auto& row = state.mu[i];
        for (int j = i - 1; j >= 0; --j) {
            const double c = round_nearest(row[j]);
            if (c == 0.0) continue;
            const auto& pivot = state.mu[j];
            for (int l = 0; l < j; ++l) row[l] -= c * pivot[l];
            row[j] -= c;
        }
    }
}

namespace {

// Restore full size-reducedness after a swap at site k of a state that was
// size-reduced before the swap. Only columns k and k+1 changed (plus the
// leftward cascades fixing them can trigger), and the new row k is the old,
// already reduced, row k+1; everything further right is untouched. Same
// result as size_reduce, cheaper by the skipped columns.
void size_reduce_after_swap(GsoState& state, int k) {
    for (int i = k + 1; i < state.n; ++i) {
        auto& row = state.mu[i];
        for (int j = std::min(i - 1, k + 1); j >= 0; --j) {
            const double c = round_nearest(row[j]);
            if (c == 0.0) continue;
            const auto& pivot = state.mu[j];
            for (int l = 0; l < j; ++l) row[l] -= c * pivot[l];
            row[j] -= c;
        }
    }
}

}  // namespace

std::optional<int> find_unstable(const GsoState& state,
                                 const ReductionParams& params,
                                 SplitMix64* rng) {
    const double T = params.threshold();
    const int sites = state.n - 1;
    switch (params.policy) {
    case Policy::lowest:
        for (int k = 0; k < sites; ++k)
            if (state.r[k] > T) return k;
        return std::nullopt;
    case Policy::highest:
        for (int k = sites - 1; k >= 0; --k)
            if (state.r[k] > T) return k;
        return std::nullopt;
    case Policy::random: {
        if (rng == nullptr)
            throw std::invalid_argument("random policy needs an rng");
        int count = 0;
        for (int k = 0; k < sites; ++k) count += state.r[k] > T;
        if (count == 0) return std::nullopt;
        auto pick = static_cast<std::int64_t>(rng->below(count));
        for (int k = 0; k < sites; ++k) {
            if (state.r[k] > T && pick-- == 0) return k;
        }
        return std::nullopt;  // unreachable
    }
    }
    return std::nullopt;
}

void swap_update(GsoState& state, int k) {
    check_site(state, k);
    const int n = state.n;
    const double mu = state.mu[k + 1][k];
    const double q_inv_sq = std::exp(-2.0 * state.r[k]) + mu * mu;
    const double log_q_k = -0.5 * std::log(q_inv_sq);
    const double mu_new = mu / q_inv_sq;  // Q_k^2 * mu

    if (k >= 1) state.r[k - 1] += log_q_k;
    state.r[k] -= 2.0 * log_q_k;
    if (k + 1 <= n - 2) state.r[k + 1] += log_q_k;

    // Rows k and k+1 trade their coefficients against earlier vectors.
    for (int l = 0; l < k; ++l) std::swap(state.mu[k][l], state.mu[k + 1][l]);
    state.mu[k + 1][k] = mu_new;

    // Rows below see the swapped pair through a 2x2 recombination.
    for (int l = k + 2; l < n; ++l) {
        const double a = state.mu[l][k];
        const double b = state.mu[l][k + 1];
        state.mu[l][k] = b + mu_new * (a - b * mu);
        state.mu[l][k + 1] = a - b * mu;
    }
}

RunTrace lll_reduce(GsoState& state, const ReductionParams& params,
                    SplitMix64* rng, bool record_events) {
    RunTrace trace;
    trace.initial_energy = energy(state);
    trace.final_energy = trace.initial_energy;
    const std::int64_t cap = params.max_steps > 0
                                 ? params.max_steps
                                 : default_step_cap(trace.initial_energy,
                                                    params.delta);
    size_reduce(state);
    for (;;) {
        const auto site = find_unstable(state, params, rng);
        if (!site) {
            trace.terminated = true;
            break;
        }
        if (trace.steps >= cap) break;
        const int k = *site;
        const double mu = state.mu[k + 1][k];
        const double q_inv_sq = std::exp(-2.0 * state.r[k]) + mu * mu;
        const double log_q_k = -0.5 * std::log(q_inv_sq);
        swap_update(state, k);
        size_reduce_after_swap(state, k);
        ++trace.steps;
        trace.final_energy -= 2.0 * log_q_k;
        trace.sum_log_mu_inv_sq += -2.0 * std::log(std::abs(mu));
        if (record_events) {
            trace.events.push_back({trace.steps, k, log_q_k, std::abs(mu),
                                    q_inv_sq, 2.0 * log_q_k});
        }
    }
    return trace;
}

double energy(const std::vector<double>& heights, int n) {
    double e = 0.0;
    for (int i = 0; i < n - 1; ++i)
        e += static_cast<double>((i + 1) * (n - i - 1)) * heights[i];
    return e;
}

double energy(const GsoState& state) { return energy(state.r, state.n); }

double energy_floor(int n, double T) {
    const double nd = n;
    return T / 6.0 * (nd * nd * nd - nd);
}

double log_rhf(const std::vector<double>& heights, int n) {
    double s = 0.0;
    for (int i = 0; i < n - 1; ++i)
        s += static_cast<double>(n - i - 1) * heights[i];
    return s / (static_cast<double>(n) * n);
}

double rhf(const std::vector<double>& heights, int n) {
    return std::exp(log_rhf(heights, n));
}

double rhf(const GsoState& state) { return rhf(state.r, state.n); }

std::int64_t default_step_cap(double initial_energy, double delta) {
    double cap;
    if (delta < 0.75) {
        const double min_drop = 2.0 * std::log(1.0 / std::sqrt(delta + 0.25));
        cap = 100.0 * initial_energy / min_drop;
    } else {
        cap = 100.0 * initial_energy;
    }
    if (!(cap > 1000.0)) cap = 1000.0;
    return static_cast<std::int64_t>(cap);
}

}  // namespace sandlab
