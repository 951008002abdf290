#include "sandlab/limit_dist.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace sandlab {

namespace {

std::size_t box_size(int n, std::int64_t I) {
    double size = 1.0;
    for (int a = 0; a < n - 1; ++a) size *= static_cast<double>(I);
    if (size > 1e7)
        throw std::invalid_argument("offset box exceeds the 1e7 state cap");
    std::size_t s = 1;
    for (int a = 0; a < n - 1; ++a) s *= static_cast<std::size_t>(I);
    return s;
}

std::vector<std::size_t> strides(int n, std::int64_t I) {
    std::vector<std::size_t> st(static_cast<std::size_t>(n - 1), 1);
    for (int a = n - 3; a >= 0; --a)
        st[a] = st[a + 1] * static_cast<std::size_t>(I);
    return st;
}

// Exact stabilization distribution of an integer configuration: branch over
// every gamma choice of the lowest unstable site with probability 1/I.
void stabilize_distribution(const IntConfig& config,
                            const SandpileParams& params, double weight,
                            std::map<std::vector<std::int64_t>, double>& out) {
    int site = -1;
    for (int k = 0; k < config.n - 1; ++k) {
        if (config.heights[k] > params.T) {
            site = k;
            break;
        }
    }
    if (site < 0) {
        out[config.heights] += weight;
        return;
    }
    const double branch = weight / static_cast<double>(params.I);
    for (std::int64_t gamma = 1; gamma <= params.I; ++gamma) {
        IntConfig next = config;
        next.heights[site] -= 2 * gamma;
        if (site - 1 >= 0) next.heights[site - 1] += gamma;
        if (site + 1 <= config.n - 2) next.heights[site + 1] += gamma;
        stabilize_distribution(next, params, branch, out);
    }
}

}  // namespace

void push_axis(OffsetDistribution& dist, int axis) {
    const int axes = dist.n - 1;
    if (axis < 0 || axis >= axes) throw std::out_of_range("axis out of range");
    const auto st = strides(dist.n, dist.I);
    const std::size_t stride = st[axis];
    const auto I = static_cast<std::size_t>(dist.I);
    const std::size_t total = dist.size();
    const double inv_i = 1.0 / static_cast<double>(dist.I);
    // Iterate over all lines along `axis`: indices whose axis coordinate is 0.
    std::vector<double> line(I);
    for (std::size_t base = 0; base < total; ++base) {
        if ((base / stride) % I != 0) continue;
        for (std::size_t j = 0; j < I; ++j) line[j] = dist.weights[base + j * stride];
        const double reinject = line[0] * inv_i;
        for (std::size_t j = 0; j + 1 < I; ++j)
            dist.weights[base + j * stride] = line[j + 1] + reinject;
        dist.weights[base + (I - 1) * stride] = reinject;
    }
}

double total_variation(const OffsetDistribution& a,
                       const OffsetDistribution& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.weights.size(); ++i)
        s += std::abs(a.weights[i] - b.weights[i]);
    return 0.5 * s;
}

std::pair<OffsetDistribution, ConvergenceReport> parallelepiped_limit(
    int n, std::int64_t I, double tol, std::int64_t max_iters) {
    if (n < 2 || I < 1) throw std::invalid_argument("need n >= 2 and I >= 1");
    OffsetDistribution dist;
    dist.n = n;
    dist.I = I;
    const std::size_t total = box_size(n, I);
    dist.weights.assign(total, 1.0 / static_cast<double>(total));

    ConvergenceReport report;
    OffsetDistribution prev = dist;
    for (std::int64_t it = 0; it < max_iters; ++it) {
        for (int axis = 0; axis < n - 1; ++axis) push_axis(dist, axis);
        ++report.iterations;
        report.final_delta = total_variation(dist, prev);
        if (report.final_delta < tol) {
            report.converged = true;
            break;
        }
        prev = dist;
    }
    for (int axis = 0; axis < n - 1; ++axis) {
        OffsetDistribution pushed = dist;
        push_axis(pushed, axis);
        report.max_invariance_gap =
            std::max(report.max_invariance_gap, total_variation(pushed, dist));
    }
    return {std::move(dist), report};
}

double ssp_corner_density(const OffsetDistribution& dist, int n,
                          std::int64_t I, const SandpileParams& params) {
    params.validate();
    const auto st = strides(n, I);
    const auto total = dist.size();
    std::map<std::vector<std::int64_t>, double> stable_mass;
    std::vector<std::int64_t> offset(static_cast<std::size_t>(n - 1));
    for (std::size_t idx = 0; idx < total; ++idx) {
        for (int a = 0; a < n - 1; ++a)
            offset[a] = static_cast<std::int64_t>((idx / st[a]) %
                                                  static_cast<std::size_t>(I));
        // Anchor: the all-zero offset sits at (T,...,T); offset c lands at
        // T - 2 c_k + c_{k-1} + c_{k+1} on site k.
        IntConfig config{n, std::vector<std::int64_t>(n - 1, params.T)};
        for (int k = 0; k < n - 1; ++k) {
            config.heights[k] -= 2 * offset[k];
            if (k - 1 >= 0) config.heights[k] += offset[k - 1];
            if (k + 1 <= n - 2) config.heights[k] += offset[k + 1];
        }
        stabilize_distribution(config, params, dist.weights[idx], stable_mass);
    }
    double best = 0.0;
    for (const auto& [heights, mass] : stable_mass) best = std::max(best, mass);
    return best;
}

}  // namespace sandlab
