#include "sandlab/input_gen.hpp"

#include <stdexcept>

namespace sandlab {

namespace {

// Uniform integer in [2^(bits-1), 2^bits), assembled from 64-bit words so
// the result is identical for any platform given the same stream.
mpz_class random_top_bit_integer(int bits, SplitMix64& rng) {
    mpz_class x = 0;
    const int low_bits = bits - 1;
    const int words = (low_bits + 63) / 64;
    for (int w = words - 1; w >= 0; --w) {
        std::uint64_t word = rng.next();
        const int hi = std::min(64, low_bits - 64 * w);
        if (hi < 64) word &= (hi == 0) ? 0 : ((~0ULL) >> (64 - hi));
        mpz_class chunk(static_cast<unsigned long>(word >> 32));
        chunk <<= 32;
        chunk += static_cast<unsigned long>(word & 0xFFFFFFFFULL);
        x <<= std::min(64, low_bits - 64 * w);
        x += chunk;
    }
    mpz_class top = 1;
    top <<= low_bits;
    return x + top;
}

}  // namespace

IntegerBasis knapsack_basis(const GeneratorSpec& spec, SplitMix64& rng) {
    if (spec.kind != GeneratorKind::knapsack)
        throw std::invalid_argument("generator kind is not knapsack");
    if (spec.bits < 1) throw std::invalid_argument("knapsack needs bits >= 1");
    if (spec.n < 2) throw std::invalid_argument("knapsack needs n >= 2");
    IntegerBasis basis;
    basis.n = spec.n;
    basis.rows.assign(spec.n, std::vector<mpz_class>(spec.n, 0));
    for (int i = 0; i < spec.n; ++i) {
        basis.rows[i][0] = random_top_bit_integer(spec.bits, rng);
        if (i >= 1) basis.rows[i][i] = 1;
    }
    return basis;
}

GsoState direct_gso_sample(const GeneratorSpec& spec, SplitMix64& rng) {
    if (spec.kind != GeneratorKind::direct_gso)
        throw std::invalid_argument("generator kind is not direct-gso");
    if (!(spec.r_lo <= spec.r_hi))
        throw std::invalid_argument("direct-gso needs a nonempty r range");
    GsoState state = GsoState::zero(spec.n);
    for (auto& v : state.r) v = rng.uniform(spec.r_lo, spec.r_hi);
    for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < i; ++j) state.mu[i][j] = rng.uniform(-0.5, 0.5);
    return state;
}

IntConfig sandpile_input(const GeneratorSpec& spec, SplitMix64& rng) {
    if (spec.kind != GeneratorKind::sandpile_uniform)
        throw std::invalid_argument("generator kind is not sandpile-uniform");
    if (spec.h_lo > spec.h_hi)
        throw std::invalid_argument("sandpile input needs a nonempty range");
    IntConfig config{spec.n, std::vector<std::int64_t>(spec.n - 1)};
    for (auto& h : config.heights) h = rng.uniform_int(spec.h_lo, spec.h_hi);
    return config;
}

const char* generator_kind_name(GeneratorKind kind) {
    switch (kind) {
    case GeneratorKind::knapsack: return "knapsack";
    case GeneratorKind::direct_gso: return "direct-gso";
    case GeneratorKind::sandpile_uniform: return "sandpile-uniform";
    }
    return "unknown";
}

GeneratorKind generator_kind_from_name(const std::string& name) {
    if (name == "knapsack") return GeneratorKind::knapsack;
    if (name == "direct-gso") return GeneratorKind::direct_gso;
    if (name == "sandpile-uniform") return GeneratorKind::sandpile_uniform;
    throw std::invalid_argument("unknown generator kind: " + name);
}

}  // namespace sandlab
