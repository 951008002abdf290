// Reproducible input sampling for all experiment kinds.
#pragma once

#include <cstdint>
#include <string>

#include "sandlab/exact.hpp"
#include "sandlab/gso.hpp"
#include "sandlab/sandpile.hpp"

namespace sandlab {

enum class GeneratorKind { knapsack, direct_gso, sandpile_uniform };

struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::knapsack;
    int n = 2;
    int bits = 20;                 // knapsack: per-entry bit size
    double r_lo = 0.0, r_hi = 1.0; // direct-gso height interval
    std::int64_t h_lo = 0, h_hi = 1;  // sandpile height interval
    std::uint64_t seed = 0;
};

// Knapsack-style basis: b_1 = (X_1, 0, ..., 0) and b_i = X_i e_1 + e_i for
// i >= 2, with X_i uniform in [2^(bits-1), 2^bits). |det| = X_1 exactly; with
// bits = 10n the determinant matches the usual experiment scale.
IntegerBasis knapsack_basis(const GeneratorSpec& spec, SplitMix64& rng);

// r_i i.i.d. uniform on [r_lo, r_hi); mu_{i,j} i.i.d. uniform on [-1/2, 1/2).
GsoState direct_gso_sample(const GeneratorSpec& spec, SplitMix64& rng);

// Heights i.i.d. uniform integers on [h_lo, h_hi].
IntConfig sandpile_input(const GeneratorSpec& spec, SplitMix64& rng);

const char* generator_kind_name(GeneratorKind kind);
GeneratorKind generator_kind_from_name(const std::string& name);

}  // namespace sandlab
