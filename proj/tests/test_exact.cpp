#include <doctest.h>

#include <sstream>

#include "sandlab/exact.hpp"
#include "test_helpers.hpp"

using namespace sandlab;
using doctest::Approx;

TEST_CASE("exact_gso of the identity basis") {
    IntegerBasis basis;
    basis.n = 3;
    basis.rows = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    const RationalGso gso = exact_gso(basis);
    for (int i = 0; i < 3; ++i) {
        CHECK(gso.bstar_norm_sq[i] == 1);
        for (int j = 0; j < i; ++j) CHECK(gso.mu[i][j] == 0);
    }
    const GsoState s = gso_log_project(gso);
    CHECK(s.r[0] == 0.0);
    CHECK(s.r[1] == 0.0);
}

TEST_CASE("exact_gso hand example") {
    IntegerBasis basis;
    basis.n = 2;
    basis.rows = {{1, 0}, {1, 2}};
    const RationalGso gso = exact_gso(basis);
    CHECK(gso.mu[1][0] == 1);
    CHECK(gso.bstar_norm_sq[0] == 1);
    CHECK(gso.bstar_norm_sq[1] == 4);
    const GsoState s = gso_log_project(gso);
    CHECK(s.r[0] == Approx(-std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("exact_gso rejects dependent rows") {
    IntegerBasis basis;
    basis.n = 2;
    basis.rows = {{1, 2}, {2, 4}};
    CHECK_THROWS_AS(exact_gso(basis), std::invalid_argument);
}

TEST_CASE("product of exact norms equals det squared") {
    auto rng = SplitMix64::stream(23, 0);
    for (int trial = 0; trial < 10; ++trial) {
        const IntegerBasis basis = testing::random_basis(5, -9, 9, rng);
        const RationalGso gso = exact_gso(basis);
        mpq_class prod = 1;
        for (const auto& b : gso.bstar_norm_sq) prod *= b;
        const mpz_class det = determinant(basis);
        CHECK(prod == mpq_class(det * det));
    }
}

TEST_CASE("exact_lll on the worked 2d example") {
    IntegerBasis basis;
    basis.n = 2;
    basis.rows = {{2, 0}, {1, 1}};
    const auto result = exact_lll(basis, mpq_class(7, 10));
    CHECK(result.swap_sites == std::vector<int>{0});
    CHECK(result.basis.rows[0] == std::vector<mpz_class>{1, 1});
    CHECK(result.basis.rows[1] == std::vector<mpz_class>{1, -1});
}

TEST_CASE("exact_lll leaves a reduced basis unchanged") {
    IntegerBasis basis;
    basis.n = 2;
    basis.rows = {{1, 1}, {1, -1}};
    const auto result = exact_lll(basis, mpq_class(7, 10));
    CHECK(result.swap_sites.empty());
    CHECK(result.basis.rows == basis.rows);
}

TEST_CASE("exact_lll output invariants") {
    auto rng = SplitMix64::stream(31, 0);
    const mpq_class delta(7, 10);
    for (int trial = 0; trial < 8; ++trial) {
        const IntegerBasis basis = testing::random_basis(6, -30, 30, rng);
        const mpz_class det_before = determinant(basis);
        const auto result = exact_lll(basis, delta);
        const mpz_class det_after = determinant(result.basis);
        CHECK((det_after == det_before || det_after == -det_before));
        for (int i = 0; i < 6; ++i) {
            for (int j = 0; j < i; ++j) {
                REQUIRE(2 * result.gso.mu[i][j] <= 1);
                REQUIRE(2 * result.gso.mu[i][j] >= -1);
            }
        }
        for (int k = 0; k + 1 < 6; ++k) {
            REQUIRE(delta * result.gso.bstar_norm_sq[k] <=
                    result.gso.bstar_norm_sq[k + 1]);
        }
    }
}

TEST_CASE("replaying the exact swap sequence reproduces the final state") {
    auto rng = SplitMix64::stream(47, 0);
    const mpq_class delta(7, 10);
    ReductionParams params;
    params.delta = 0.7;
    for (int trial = 0; trial < 12; ++trial) {
        const int n = 3 + static_cast<int>(rng.below(6));
        const IntegerBasis basis =
            testing::random_basis(n, -1000, 1000, rng);
        const auto exact = exact_lll(basis, delta);
        GsoState replay = gso_log_project(exact_gso(basis));
        for (const int site : exact.swap_sites) {
            size_reduce(replay);
            swap_update(replay, site);
        }
        size_reduce(replay);
        const GsoState want = gso_log_project(exact.gso);
        REQUIRE(testing::max_state_error(replay, want) <= 1e-9);
    }
}

TEST_CASE("gso-coordinate reduction matches exact reduction end to end") {
    auto rng = SplitMix64::stream(53, 0);
    ReductionParams params;
    params.delta = 0.7;
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 3 + static_cast<int>(rng.below(5));
        const IntegerBasis basis = testing::random_basis(n, -100, 100, rng);
        GsoState state = gso_log_project(exact_gso(basis));
        const RunTrace trace = lll_reduce(state, params);
        REQUIRE(trace.terminated);
        const auto exact = exact_lll(basis, mpq_class(7, 10));
        REQUIRE(exact.swap_sites.size() ==
                static_cast<std::size_t>(trace.steps));
        const GsoState want = gso_log_project(exact.gso);
        REQUIRE(testing::max_state_error(state, want) <= 1e-9);
    }
}

TEST_CASE("basis file round trip") {
    auto rng = SplitMix64::stream(61, 0);
    const IntegerBasis basis = testing::random_basis(4, -1000000, 1000000, rng);
    std::stringstream buf;
    write_basis(buf, basis);
    const IntegerBasis back = read_basis(buf);
    CHECK(back.n == basis.n);
    CHECK(back.rows == basis.rows);
}

TEST_CASE("log_mpq handles huge values") {
    mpz_class big = 1;
    big <<= 900;
    CHECK(log_mpq(mpq_class(big)) == Approx(900 * M_LN2).epsilon(1e-14));
    CHECK(log_mpq(mpq_class(1, big)) == Approx(-900 * M_LN2).epsilon(1e-14));
}
