#include <doctest.h>

#include <cmath>

#include "sandlab/input_gen.hpp"
#include "test_helpers.hpp"

using namespace sandlab;
using doctest::Approx;

TEST_CASE("knapsack basis structure and entry range") {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::knapsack;
    spec.n = 2;
    spec.bits = 4;
    auto rng = SplitMix64::stream(1, 0);
    const IntegerBasis basis = knapsack_basis(spec, rng);
    CHECK(basis.rows[0][1] == 0);
    CHECK(basis.rows[1][1] == 1);
    for (int i = 0; i < 2; ++i) {
        REQUIRE(basis.rows[i][0] >= 8);
        REQUIRE(basis.rows[i][0] < 16);
    }
    CHECK(determinant(basis) != 0);
}

TEST_CASE("knapsack determinant equals X_1 exactly") {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::knapsack;
    for (int n = 2; n <= 8; ++n) {
        spec.n = n;
        spec.bits = 10 * n;
        auto rng = SplitMix64::stream(2, n);
        const IntegerBasis basis = knapsack_basis(spec, rng);
        mpz_class det = determinant(basis);
        if (det < 0) det = -det;
        CHECK(det == basis.rows[0][0]);
        mpz_class lo = 1, hi = 1;
        lo <<= spec.bits - 1;
        hi <<= spec.bits;
        for (int i = 0; i < n; ++i) {
            REQUIRE(basis.rows[i][0] >= lo);
            REQUIRE(basis.rows[i][0] < hi);
        }
    }
}

TEST_CASE("projected knapsack energy grows linearly in bits") {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::knapsack;
    spec.n = 10;
    double mean_e[3] = {0, 0, 0};
    const int bits_grid[3] = {32, 64, 128};
    const int reps = 8;
    for (int b = 0; b < 3; ++b) {
        spec.bits = bits_grid[b];
        for (int rep = 0; rep < reps; ++rep) {
            auto rng = SplitMix64::stream(100 + rep, b);
            const GsoState state =
                gso_log_project(exact_gso(knapsack_basis(spec, rng)));
            mean_e[b] += energy(state) / reps;
        }
    }
    const double slope_lo = (mean_e[1] - mean_e[0]) / 32.0;
    const double slope_hi = (mean_e[2] - mean_e[1]) / 64.0;
    CHECK(slope_hi / slope_lo == Approx(1.0).epsilon(0.05));
}

TEST_CASE("direct gso sample ranges and degenerate interval") {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::direct_gso;
    spec.n = 6;
    spec.r_lo = 0.0;
    spec.r_hi = 0.0;
    auto rng = SplitMix64::stream(3, 0);
    const GsoState zero = direct_gso_sample(spec, rng);
    for (double v : zero.r) CHECK(v == 0.0);
    for (int i = 0; i < zero.n; ++i)
        for (int j = 0; j < i; ++j) REQUIRE(std::abs(zero.mu[i][j]) <= 0.5);

    spec.r_lo = -1.0;
    spec.r_hi = 3.0;
    double sum = 0.0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        auto draw_rng = SplitMix64::stream(4, i);
        const GsoState s = direct_gso_sample(spec, draw_rng);
        sum += s.r[0];
    }
    const double mean = sum / draws;
    const double stderr_mean = (4.0 / std::sqrt(12.0)) / std::sqrt(draws);
    CHECK(std::abs(mean - 1.0) < 3.0 * stderr_mean);
}

TEST_CASE("sandpile input ranges") {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::sandpile_uniform;
    spec.n = 5;
    spec.h_lo = 5;
    spec.h_hi = 5;
    auto rng = SplitMix64::stream(5, 0);
    const IntConfig constant = sandpile_input(spec, rng);
    for (auto h : constant.heights) CHECK(h == 5);

    spec.h_lo = 0;
    spec.h_hi = 40;
    double sum = 0.0;
    const int draws = 20000;
    for (int i = 0; i < draws; ++i) {
        auto draw_rng = SplitMix64::stream(6, i);
        const IntConfig c = sandpile_input(spec, draw_rng);
        for (auto h : c.heights) {
            REQUIRE(h >= 0);
            REQUIRE(h <= 40);
        }
        sum += static_cast<double>(c.heights[2]);
    }
    const double mean = sum / draws;
    const double stderr_mean = (41.0 / std::sqrt(12.0)) / std::sqrt(draws);
    CHECK(std::abs(mean - 20.0) < 3.0 * stderr_mean);
}

TEST_CASE("generation is deterministic given spec and stream") {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::knapsack;
    spec.n = 6;
    spec.bits = 60;
    auto rng_a = SplitMix64::stream(9, 7);
    auto rng_b = SplitMix64::stream(9, 7);
    const IntegerBasis a = knapsack_basis(spec, rng_a);
    const IntegerBasis b = knapsack_basis(spec, rng_b);
    CHECK(a.rows == b.rows);
}

TEST_CASE("generator kind names round trip") {
    for (auto kind : {GeneratorKind::knapsack, GeneratorKind::direct_gso,
                      GeneratorKind::sandpile_uniform}) {
        CHECK(generator_kind_from_name(generator_kind_name(kind)) == kind);
    }
    CHECK_THROWS_AS(generator_kind_from_name("nope"), std::invalid_argument);
}
