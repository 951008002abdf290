#pragma once

#include <cmath>
#include <cstdint>

#include "sandlab/exact.hpp"
#include "sandlab/gso.hpp"
#include "sandlab/rng.hpp"

namespace sandlab::testing {

// Random nonsingular integer basis with entries in [lo, hi].
inline IntegerBasis random_basis(int n, std::int64_t lo, std::int64_t hi,
                                 SplitMix64& rng) {
    for (;;) {
        IntegerBasis basis;
        basis.n = n;
        basis.rows.assign(n, std::vector<mpz_class>(n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                basis.rows[i][j] = static_cast<long>(rng.uniform_int(lo, hi));
        if (determinant(basis) != 0) return basis;
    }
}

inline bool close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

// Entrywise comparison of r and mu with mixed absolute/relative tolerance.
inline double max_state_error(const GsoState& got, const GsoState& want) {
    double worst = 0.0;
    for (int k = 0; k + 1 < want.n; ++k) {
        worst = std::max(worst, std::abs(got.r[k] - want.r[k]) /
                                    std::max(1.0, std::abs(want.r[k])));
    }
    for (int i = 0; i < want.n; ++i) {
        for (int j = 0; j < i; ++j) {
            worst = std::max(worst, std::abs(got.mu[i][j] - want.mu[i][j]) /
                                        std::max(1.0, std::abs(want.mu[i][j])));
        }
    }
    return worst;
}

}  // namespace sandlab::testing
