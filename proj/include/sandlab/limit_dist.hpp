// Limit distribution of the moving parallelepiped.
//
// During the descent of a far-from-stable SSP configuration, the ensemble is
// supported on a parallelepiped-shaped cluster; in the frame of that cluster
// a configuration is an offset vector in the box {0..I-1}^(n-1). Toppling a
// site acts linearly on distributions over the box: the top slice of the
// axis re-enters uniformly while everything else shifts up by one. Power
// iteration of the toppling cycle converges to the unique eigenvector of
// eigenvalue 1, the limit distribution.
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sandlab/sandpile.hpp"

namespace sandlab {

struct OffsetDistribution {
    int n = 0;          // graph size; the box has n-1 axes
    std::int64_t I = 1; // axis length
    std::vector<double> weights;  // row-major over {0..I-1}^(n-1), sums to 1

    std::size_t size() const { return weights.size(); }
};

struct ConvergenceReport {
    bool converged = false;
    std::int64_t iterations = 0;   // full T_1..T_{n-1} cycles applied
    double final_delta = 0.0;      // total-variation change of the last cycle
    double max_invariance_gap = 0.0;  // max TV gap under any single push
};

// Apply the push operator of axis `axis` (0-based) in place.
void push_axis(OffsetDistribution& dist, int axis);

double total_variation(const OffsetDistribution& a, const OffsetDistribution& b);

// Power-iterate the cycle of pushes from the uniform distribution until the
// per-cycle total-variation change falls below tol. Requires I^(n-1) <= 1e7.
std::pair<OffsetDistribution, ConvergenceReport> parallelepiped_limit(
    int n, std::int64_t I, double tol, std::int64_t max_iters = 100000);

// Steady-state probability of the all-T configuration, estimated by
// anchoring the limit distribution with its upper-right corner at (T,...,T),
// stabilizing every offset exhaustively (branching over all gamma choices
// with their probabilities), and returning the largest resulting point mass.
double ssp_corner_density(const OffsetDistribution& dist, int n,
                          std::int64_t I, const SandpileParams& params);

}  // namespace sandlab
