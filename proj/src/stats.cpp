#include "sandlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sandlab/input_gen.hpp"
#include "sandlab/sandpile.hpp"

namespace sandlab {

ShapeProfile average_shape(std::vector<RunShape> runs) {
    if (runs.empty()) throw std::invalid_argument("average_shape: no runs");
    std::sort(runs.begin(), runs.end(),
              [](const RunShape& a, const RunShape& b) { return a.trial < b.trial; });
    const std::size_t sites = runs.front().r.size();
    for (const auto& run : runs)
        if (run.r.size() != sites)
            throw std::invalid_argument("average_shape: mixed dimensions");

    ShapeProfile profile;
    profile.n = static_cast<int>(sites) + 1;
    profile.trials = static_cast<std::int64_t>(runs.size());
    profile.mean_r.assign(sites, 0.0);
    profile.stderr_r.assign(sites, 0.0);
    for (const auto& run : runs)
        for (std::size_t i = 0; i < sites; ++i) profile.mean_r[i] += run.r[i];
    for (auto& m : profile.mean_r) m /= static_cast<double>(runs.size());
    if (runs.size() > 1) {
        for (const auto& run : runs) {
            for (std::size_t i = 0; i < sites; ++i) {
                const double d = run.r[i] - profile.mean_r[i];
                profile.stderr_r[i] += d * d;
            }
        }
        const auto trials = static_cast<double>(runs.size());
        for (auto& s : profile.stderr_r)
            s = std::sqrt(s / (trials - 1.0) / trials);
    }
    return profile;
}

std::pair<int, int> middle_third(int n) {
    const int sites = n - 1;
    return {sites / 3, sites - sites / 3};
}

ShapeMetrics shape_metrics(const ShapeProfile& profile, double T) {
    ShapeMetrics m;
    const int sites = profile.n - 1;
    const auto [lo, hi] = middle_third(profile.n);
    double plateau = 0.0;
    for (int i = lo; i < hi; ++i) plateau += profile.mean_r[i];
    plateau /= static_cast<double>(hi - lo);
    m.plateau = plateau;
    m.threshold_gap = T - plateau;
    m.boundary_gap =
        plateau - 0.5 * (profile.mean_r.front() + profile.mean_r.back());
    auto within = [&](int i) {
        return std::abs(profile.mean_r[i] - plateau) <= 3.0 * profile.stderr_r[i];
    };
    m.onset_left = 1;
    for (int i = 0; i < sites; ++i) {
        if (within(i)) { m.onset_left = i + 1; break; }
    }
    m.onset_right = sites;
    for (int i = sites - 1; i >= 0; --i) {
        if (within(i)) { m.onset_right = i + 1; break; }
    }
    return m;
}

Histogram rhf_histogram(std::vector<std::pair<std::int64_t, double>> keyed_rhf,
                        int bins) {
    if (keyed_rhf.empty()) throw std::invalid_argument("rhf_histogram: empty");
    std::sort(keyed_rhf.begin(), keyed_rhf.end());
    Histogram h;
    h.total = static_cast<std::int64_t>(keyed_rhf.size());
    double lo = keyed_rhf.front().second, hi = lo;
    double sum = 0.0;
    for (const auto& [trial, v] : keyed_rhf) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
    }
    h.mean = sum / static_cast<double>(h.total);
    double sq = 0.0;
    for (const auto& [trial, v] : keyed_rhf) sq += (v - h.mean) * (v - h.mean);
    h.stddev = h.total > 1 ? std::sqrt(sq / static_cast<double>(h.total - 1)) : 0.0;

    if (hi == lo) {
        h.bin_edges = {lo, hi};
        h.counts = {h.total};
        return h;
    }
    h.counts.assign(bins, 0);
    h.bin_edges.resize(bins + 1);
    for (int b = 0; b <= bins; ++b)
        h.bin_edges[b] = lo + (hi - lo) * static_cast<double>(b) / bins;
    for (const auto& [trial, v] : keyed_rhf) {
        auto b = static_cast<std::int64_t>((v - lo) / (hi - lo) * bins);
        if (b >= bins) b = bins - 1;
        if (b < 0) b = 0;
        ++h.counts[b];
    }
    return h;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t ia = 0, ib = 0;
    double d = 0.0;
    while (ia < a.size() && ib < b.size()) {
        const double x = std::min(a[ia], b[ib]);
        while (ia < a.size() && a[ia] <= x) ++ia;
        while (ib < b.size() && b[ib] <= x) ++ib;
        d = std::max(d, std::abs(static_cast<double>(ia) / na -
                                 static_cast<double>(ib) / nb));
    }
    return d;
}

MixingReport mu_trace_report(const RunTrace& trace, int max_lag) {
    const auto len = static_cast<std::int64_t>(trace.events.size());
    if (len <= 10 * static_cast<std::int64_t>(max_lag))
        throw std::invalid_argument("mu_trace_report: trace too short");
    MixingReport rep;
    rep.trace_length = len;

    std::vector<double> mu_abs(trace.events.size());
    for (std::size_t i = 0; i < trace.events.size(); ++i)
        mu_abs[i] = trace.events[i].mu_abs;

    const int bins = 50;
    rep.density_edges.resize(bins + 1);
    for (int b = 0; b <= bins; ++b)
        rep.density_edges[b] = 0.5 * static_cast<double>(b) / bins;
    rep.density.assign(bins, 0.0);
    for (double v : mu_abs) {
        auto b = static_cast<int>(v / 0.5 * bins);
        if (b >= bins) b = bins - 1;
        if (b < 0) b = 0;
        rep.density[b] += 1.0;
    }
    const double bin_width = 0.5 / bins;
    for (auto& d : rep.density) d /= static_cast<double>(len) * bin_width;

    double mean = 0.0;
    for (double v : mu_abs) mean += v;
    mean /= static_cast<double>(len);
    double var = 0.0;
    for (double v : mu_abs) var += (v - mean) * (v - mean);
    var /= static_cast<double>(len);

    rep.autocorr.assign(max_lag + 1, 0.0);
    rep.autocorr[0] = 1.0;
    if (var == 0.0) {
        rep.autocorr_defined = false;
    } else {
        for (int lag = 1; lag <= max_lag; ++lag) {
            double c = 0.0;
            for (std::int64_t t = 0; t + lag < len; ++t)
                c += (mu_abs[t] - mean) * (mu_abs[t + lag] - mean);
            rep.autocorr[lag] = c / (static_cast<double>(len) * var);
        }
    }

    double m = 0.0;
    for (double v : mu_abs) m += -2.0 * std::log(v);
    m /= static_cast<double>(len);
    double s = 0.0;
    for (double v : mu_abs) {
        const double x = -2.0 * std::log(v) - m;
        s += x * x;
    }
    rep.m_hat = m;
    rep.sigma_hat = std::sqrt(s / static_cast<double>(len - 1));
    return rep;
}

Thm3Report termination_check_thm3(int n, double delta, double r_lo, double r_hi,
                                  std::int64_t trials, std::uint64_t seed) {
    Thm3Report rep;
    rep.trials = trials;
    const double T = -0.5 * std::log(delta);
    rep.energy_floor_h = energy_floor(n, T);
    GeneratorSpec spec;
    spec.kind = GeneratorKind::direct_gso;
    spec.n = n;
    spec.r_lo = r_lo;
    spec.r_hi = r_hi;
    std::int64_t not_terminated = 0;
    for (std::int64_t t = 0; t < trials; ++t) {
        auto input_rng = SplitMix64::stream(seed, 2 * t);
        auto run_rng = SplitMix64::stream(seed, 2 * t + 1);
        const GsoState gso = direct_gso_sample(spec, input_rng);
        RealConfig config = RealConfig::from_gso(gso);
        const double e0 = energy(config.heights, n);
        if (!(e0 > 10.0 * rep.energy_floor_h))
            throw std::invalid_argument(
                "termination_check_thm3: input energy must exceed 10H");
        ReductionParams params;
        params.delta = delta;
        params.max_steps = static_cast<std::int64_t>(e0 / 4.0);
        const RunTrace trace = lllsp_stabilize(config, params, run_rng);
        if (!trace.terminated) ++not_terminated;
        rep.mean_f_n_over_n +=
            trace.sum_log_mu_inv_sq / static_cast<double>(trace.steps);
        rep.mean_energy += e0;
        const double accounted = energy(config.heights, n);
        const double tracked = trace.final_energy;
        rep.max_accounting_error =
            std::max(rep.max_accounting_error, std::abs(accounted - tracked));
    }
    rep.fraction_not_terminated =
        static_cast<double>(not_terminated) / static_cast<double>(trials);
    rep.mean_f_n_over_n /= static_cast<double>(trials);
    rep.mean_energy /= static_cast<double>(trials);
    return rep;
}

Thm4Report optimal_delta_check(int n, double r_lo, double r_hi,
                               std::int64_t trials, double eta, double eps,
                               std::uint64_t seed) {
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("optimal_delta_check: need 0 < eps < 1");
    Thm4Report rep;
    rep.trials = trials;
    rep.eta = eta;
    const double p = 1.0 - eps;
    rep.d = std::log(1.0 / (0.75 + p * p / 4.0));
    GeneratorSpec spec;
    spec.kind = GeneratorKind::direct_gso;
    spec.n = n;
    spec.r_lo = r_lo;
    spec.r_hi = r_hi;
    std::int64_t terminated = 0;
    for (std::int64_t t = 0; t < trials; ++t) {
        auto input_rng = SplitMix64::stream(seed, 2 * t);
        auto run_rng = SplitMix64::stream(seed, 2 * t + 1);
        const GsoState gso = direct_gso_sample(spec, input_rng);
        RealConfig config = RealConfig::from_gso(gso);
        const double e0 = energy(config.heights, n);
        ReductionParams params;
        params.delta = 0.75;
        params.max_steps = static_cast<std::int64_t>(10.0 * e0 / rep.d);
        const RunTrace trace = lllsp_stabilize(config, params, run_rng);
        if (trace.terminated) ++terminated;
        rep.mean_steps += static_cast<double>(trace.steps);
        rep.mean_budget += static_cast<double>(params.max_steps);
    }
    rep.fraction_terminated =
        static_cast<double>(terminated) / static_cast<double>(trials);
    rep.mean_steps /= static_cast<double>(trials);
    rep.mean_budget /= static_cast<double>(trials);
    return rep;
}

}  // namespace sandlab
