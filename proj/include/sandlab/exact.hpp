// Exact-rational ground truth: integer bases, exact Gram-Schmidt data and an
// exact reduction loop. No floating point anywhere in this module; it exists
// to validate the double-precision GSO dynamics at small dimension and to
// project generated integer bases into GSO coordinates.
#pragma once

#include <gmpxx.h>

#include <iosfwd>
#include <string>
#include <vector>

#include "sandlab/gso.hpp"

namespace sandlab {

struct IntegerBasis {
    int n = 0;
    std::vector<std::vector<mpz_class>> rows;  // n rows, basis vectors
};

struct RationalGso {
    int n = 0;
    std::vector<std::vector<mpq_class>> mu;  // mu[i].size() == i
    std::vector<mpq_class> bstar_norm_sq;    // n entries, all positive
};

// Exact Gram-Schmidt coefficients and |b*_i|^2. Throws std::invalid_argument
// when the rows are linearly dependent.
RationalGso exact_gso(const IntegerBasis& basis);

// Exact size reduction of the basis; gso is updated in lockstep. Rounding is
// to nearest with ties to even.
void exact_size_reduce(IntegerBasis& basis, RationalGso& gso);

struct ExactLllResult {
    IntegerBasis basis;
    RationalGso gso;
    std::vector<int> swap_sites;  // 0-based, in execution order
};

// Reduction on the explicit basis with exact arithmetic: size-reduce, swap
// the lowest k with delta |b*_k|^2 > |b*_{k+1}|^2, repeat. Always terminates
// for delta < 3/4. Rational blowup makes this practical up to roughly n = 12
// with entries below ~2^128; it exists as ground truth, not for speed.
ExactLllResult exact_lll(IntegerBasis basis, const mpq_class& delta);

// Projection to double-precision GSO coordinates. r entries are computed as
// exact log differences via mantissa/exponent splitting, so arbitrarily large
// norms project without overflow.
GsoState gso_log_project(const RationalGso& gso);

// Fraction-free determinant (Bareiss); independent of the GSO path.
mpz_class determinant(const IntegerBasis& basis);

// Text format: first line n, then one row of whitespace-separated integers
// per line.
IntegerBasis read_basis(std::istream& in);
void write_basis(std::ostream& out, const IntegerBasis& basis);
IntegerBasis load_basis_file(const std::string& path);
void save_basis_file(const std::string& path, const IntegerBasis& basis);

// log of a positive rational, accurate to double precision at any magnitude.
double log_mpq(const mpq_class& q);

}  // namespace sandlab
