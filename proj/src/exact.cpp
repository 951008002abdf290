#include "sandlab/exact.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sandlab {

namespace {

mpq_class dot_zq(const std::vector<mpz_class>& a,
                 const std::vector<mpq_class>& b) {
    mpq_class s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += mpq_class(a[i]) * b[i];
    return s;
}

// Nearest integer to an exact rational, ties to even.
mpz_class round_rational(const mpq_class& q) {
    const mpz_class& num = q.get_num();
    const mpz_class& den = q.get_den();  // > 0, canonical
    mpz_class quot, rem;
    mpz_fdiv_qr(quot.get_mpz_t(), rem.get_mpz_t(), num.get_mpz_t(),
                den.get_mpz_t());
    const mpz_class twice = 2 * rem;
    if (twice > den || (twice == den && mpz_odd_p(quot.get_mpz_t())))
        quot += 1;
    return quot;
}

}  // namespace

RationalGso exact_gso(const IntegerBasis& basis) {
    const int n = basis.n;
    RationalGso gso;
    gso.n = n;
    gso.mu.resize(n);
    gso.bstar_norm_sq.resize(n);
    // bstar[i] kept as exact rational vectors during the sweep.
    std::vector<std::vector<mpq_class>> bstar(n);
    for (int i = 0; i < n; ++i) {
        gso.mu[i].resize(i);
        bstar[i].assign(basis.rows[i].begin(), basis.rows[i].end());
        for (int j = 0; j < i; ++j) {
            const mpq_class m = dot_zq(basis.rows[i], bstar[j]) /
                                gso.bstar_norm_sq[j];
            gso.mu[i][j] = m;
            for (int c = 0; c < n; ++c) bstar[i][c] -= m * bstar[j][c];
        }
        mpq_class norm_sq = 0;
        for (int c = 0; c < n; ++c) norm_sq += bstar[i][c] * bstar[i][c];
        if (norm_sq == 0)
            throw std::invalid_argument("exact_gso: rows are dependent");
        gso.bstar_norm_sq[i] = norm_sq;
    }
    return gso;
}

void exact_size_reduce(IntegerBasis& basis, RationalGso& gso) {
    const int n = basis.n;
    for (int i = 1; i < n; ++i) {
        for (int j = i - 1; j >= 0; --j) {
            const mpz_class c = round_rational(gso.mu[i][j]);
            if (c == 0) continue;
            const mpq_class cq(c);
            for (int l = 0; l < j; ++l) gso.mu[i][l] -= cq * gso.mu[j][l];
            gso.mu[i][j] -= cq;
            for (int col = 0; col < n; ++col)
                basis.rows[i][col] -= c * basis.rows[j][col];
        }
    }
}

ExactLllResult exact_lll(IntegerBasis basis, const mpq_class& delta) {
    ExactLllResult out;
    RationalGso gso = exact_gso(basis);
    for (;;) {
        exact_size_reduce(basis, gso);
        int swap_at = -1;
        for (int k = 0; k + 1 < basis.n; ++k) {
            if (delta * gso.bstar_norm_sq[k] > gso.bstar_norm_sq[k + 1]) {
                swap_at = k;
                break;
            }
        }
        if (swap_at < 0) break;
        std::swap(basis.rows[swap_at], basis.rows[swap_at + 1]);
        gso = exact_gso(basis);
        out.swap_sites.push_back(swap_at);
    }
    out.basis = std::move(basis);
    out.gso = std::move(gso);
    return out;
}

double log_mpq(const mpq_class& q) {
    long exp_num = 0, exp_den = 0;
    const double m_num = mpz_get_d_2exp(&exp_num, q.get_num().get_mpz_t());
    const double m_den = mpz_get_d_2exp(&exp_den, q.get_den().get_mpz_t());
    return std::log(std::abs(m_num)) - std::log(m_den) +
           M_LN2 * static_cast<double>(exp_num - exp_den);
}

GsoState gso_log_project(const RationalGso& gso) {
    GsoState s = GsoState::zero(gso.n);
    for (int k = 0; k + 1 < gso.n; ++k) {
        s.r[k] = 0.5 * (log_mpq(gso.bstar_norm_sq[k]) -
                        log_mpq(gso.bstar_norm_sq[k + 1]));
    }
    for (int i = 0; i < gso.n; ++i)
        for (int j = 0; j < i; ++j) s.mu[i][j] = gso.mu[i][j].get_d();
    return s;
}

mpz_class determinant(const IntegerBasis& basis) {
    const int n = basis.n;
    std::vector<std::vector<mpz_class>> a = basis.rows;
    mpz_class prev = 1;
    int sign = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (a[k][k] == 0) {
            int p = -1;
            for (int i = k + 1; i < n; ++i)
                if (a[i][k] != 0) { p = i; break; }
            if (p < 0) return 0;
            std::swap(a[k], a[p]);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i) {
            for (int j = k + 1; j < n; ++j) {
                a[i][j] = (a[k][k] * a[i][j] - a[i][k] * a[k][j]) / prev;
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    return sign > 0 ? a[n - 1][n - 1] : mpz_class(-a[n - 1][n - 1]);
}

IntegerBasis read_basis(std::istream& in) {
    IntegerBasis b;
    if (!(in >> b.n) || b.n < 1)
        throw std::runtime_error("basis file: bad dimension line");
    b.rows.assign(b.n, std::vector<mpz_class>(b.n));
    std::string tok;
    for (int i = 0; i < b.n; ++i) {
        for (int j = 0; j < b.n; ++j) {
            if (!(in >> tok))
                throw std::runtime_error("basis file: truncated");
            b.rows[i][j] = mpz_class(tok);
        }
    }
    return b;
}

void write_basis(std::ostream& out, const IntegerBasis& basis) {
    out << basis.n << '\n';
    for (const auto& row : basis.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out << ' ';
            out << row[j].get_str();
        }
        out << '\n';
    }
}

IntegerBasis load_basis_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open basis file: " + path);
    return read_basis(in);
}

void save_basis_file(const std::string& path, const IntegerBasis& basis) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write basis file: " + path);
    write_basis(out, basis);
}

}  // namespace sandlab
