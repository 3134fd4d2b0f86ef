#pragma once

#include <algorithm>
#include <vector>

#include "gsvx/core.hpp"

namespace gsvx {

/// A matrix pair {A, B} with a common column count n whose vertical stack
/// [A; B] has full column rank. All generalized-singular-value machinery in
/// this library operates on such pairs.
struct GrassmanPair {
    Matrix a;  // m x n
    Matrix b;  // p x n
    Index m = 0;
    Index p = 0;
    Index n = 0;
};

/// One generalized singular value: alpha^2 + beta^2 = 1, 1-based index into
/// the ordered spectrum.
struct GsvPair {
    double alpha = 0.0;
    double beta = 0.0;
    Index index = 0;
};

/// Ordered spectrum (alpha descending, beta ascending). `r` counts pairs with
/// alpha = 1 and `s` the interior pairs 0 < alpha < 1, so the trailing
/// n - r - s pairs have alpha = 0.
struct GsvSpectrum {
    std::vector<GsvPair> pairs;
    Index r = 0;
    Index s = 0;
};

/// Derived operators of a pair, all computed from one Hermitian
/// eigendecomposition of the stacked Gram matrix A^H A + B^H B.
struct GramOperators {
    Matrix stack_gram;           // A^H A + B^H B (n x n, Hermitian positive definite)
    Matrix stack_gram_inv;       // its inverse
    Matrix stack_gram_inv_sqrt;  // its inverse square root
    Matrix alpha_op;             // A (A^H A + B^H B)^{-1} A^H; eigenvalues are alpha_i^2
    Matrix beta_op;              // B (A^H A + B^H B)^{-1} B^H; eigenvalues are beta_i^2
    Matrix whitened_a;           // A (A^H A + B^H B)^{-1/2}; singular values are alpha_i
    Matrix whitened_b;           // B (A^H A + B^H B)^{-1/2}; singular values are beta_i (reversed)
    double cond = 1.0;           // condition number of the stacked Gram matrix
};

enum class FilterSide { Alpha, Beta };
enum class FilterVariant { OneVar, TwoVar };
// Shape regime of the block the filter truncates: tall means the block has at
// least as many rows as columns.
enum class FilterRegime { TallA, WideA, TallB, WideB };

/// Symbolic description of a 0/1 truncation filter. Production solvers only
/// use the equivalent index ranges; tests and the brute-force trace oracle
/// materialize these densely via filter_matrix().
struct FilterSpec {
    Index index = 0;
    FilterSide side = FilterSide::Alpha;
    FilterVariant variant = FilterVariant::OneVar;
    FilterRegime regime = FilterRegime::TallA;
};

inline GrassmanPair validate_gmp(const Matrix& a, const Matrix& b,
                                 double rank_tol = 1e-12) {
    if (a.cols() != b.cols())
        throw DimensionMismatch("column counts differ: A has " +
                                std::to_string(a.cols()) + ", B has " +
                                std::to_string(b.cols()));
    if (a.rows() < 1 || b.rows() < 1 || a.cols() < 1)
        throw DimensionMismatch("pair requires m >= 1, p >= 1, n >= 1");

    Matrix stack(a.rows() + b.rows(), a.cols());
    stack.topRows(a.rows()) = a;
    stack.bottomRows(b.rows()) = b;
    Eigen::BDCSVD<Matrix> svd(stack);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= rank_tol * sv(0))
        throw RankDeficient("stacked pair is numerically rank deficient: smallest/largest singular value = " +
                            std::to_string(sv(sv.size() - 1) / sv(0)));

    return GrassmanPair{a, b, a.rows(), b.rows(), a.cols()};
}

inline GramOperators gram_operators(const GrassmanPair& pair, double pd_tol = 1e-14) {
    GramOperators ops;
    ops.stack_gram = pair.a.adjoint() * pair.a + pair.b.adjoint() * pair.b;
    // Exact Hermitian symmetry keeps the eigensolver honest.
    ops.stack_gram = 0.5 * (ops.stack_gram + ops.stack_gram.adjoint()).eval();

    Eigen::SelfAdjointEigenSolver<Matrix> eig(ops.stack_gram);
    const RealVector& lambda = eig.eigenvalues();  // ascending
    const double lmax = lambda(lambda.size() - 1);
    if (lambda(0) <= pd_tol * lmax)
        throw NotPositiveDefinite("stacked Gram matrix is numerically singular; eigenvalue ratio = " +
                                  std::to_string(lambda(0) / lmax));
    ops.cond = lmax / lambda(0);

    const Matrix& q = eig.eigenvectors();
    ops.stack_gram_inv = q * lambda.cwiseInverse().asDiagonal() * q.adjoint();
    ops.stack_gram_inv_sqrt = q * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * q.adjoint();

    ops.whitened_a = pair.a * ops.stack_gram_inv_sqrt;
    ops.whitened_b = pair.b * ops.stack_gram_inv_sqrt;
    ops.alpha_op = pair.a * ops.stack_gram_inv * pair.a.adjoint();
    ops.beta_op = pair.b * ops.stack_gram_inv * pair.b.adjoint();
    ops.alpha_op = 0.5 * (ops.alpha_op + ops.alpha_op.adjoint()).eval();
    ops.beta_op = 0.5 * (ops.beta_op + ops.beta_op.adjoint()).eval();
    return ops;
}

namespace detail {

// Places `count` ones along a diagonal run starting at (row_off, col_off).
inline RealMatrix ones_block(Index rows, Index cols, Index row_off, Index col_off,
                             Index count) {
    RealMatrix f = RealMatrix::Zero(rows, cols);
    for (Index j = 0; j < count; ++j) f(row_off + j, col_off + j) = 1.0;
    return f;
}

}  // namespace detail

/// Dense materialization of a truncation filter. Alpha-side filters keep a
/// leading identity block of size `index`; beta-side filters keep a trailing
/// identity block of size n - index + 1. Index 0 (and, on the beta side,
/// n + 1) is the empty filter.
inline RealMatrix filter_matrix(const FilterSpec& spec, Index m, Index p, Index n) {
    const Index i = spec.index;
    const bool one_var = spec.variant == FilterVariant::OneVar;

    switch (spec.regime) {
        case FilterRegime::TallA: {
            if (n > m) throw DimensionMismatch("TallA regime requires n <= m");
            if (spec.side != FilterSide::Alpha)
                throw DimensionMismatch("TallA is an alpha-side regime");
            if (i < 0 || i > n) throw IndexOutOfRange("alpha filter index must be in [0, n]");
            // Square m x m with leading ones, or its n x m rectangular version.
            return one_var ? detail::ones_block(m, m, 0, 0, i)
                           : detail::ones_block(n, m, 0, 0, i);
        }
        case FilterRegime::WideA: {
            if (m >= n) throw DimensionMismatch("WideA regime requires m < n");
            if (spec.side != FilterSide::Alpha)
                throw DimensionMismatch("WideA is an alpha-side regime");
            if (i < 0 || i > m) throw IndexOutOfRange("alpha filter index must be in [0, m]");
            return one_var ? detail::ones_block(m, m, 0, 0, i)
                           : detail::ones_block(m, n, 0, 0, i);
        }
        case FilterRegime::TallB: {
            if (n > p) throw DimensionMismatch("TallB regime requires n <= p");
            if (spec.side != FilterSide::Beta)
                throw DimensionMismatch("TallB is a beta-side regime");
            if (i == 0) return one_var ? RealMatrix::Zero(p, p) : RealMatrix::Zero(n, p);
            if (i < 1 || i > n + 1) throw IndexOutOfRange("beta filter index must be in [1, n+1]");
            // Trailing block of size n - i + 1; in the rectangular version the
            // block occupies the last n columns.
            return one_var ? detail::ones_block(p, p, p - n + i - 1, p - n + i - 1, n - i + 1)
                           : detail::ones_block(n, p, i - 1, p - n + i - 1, n - i + 1);
        }
        case FilterRegime::WideB: {
            if (p >= n) throw DimensionMismatch("WideB regime requires p < n");
            if (spec.side != FilterSide::Beta)
                throw DimensionMismatch("WideB is a beta-side regime");
            if (i == 0) return one_var ? RealMatrix::Zero(p, p) : RealMatrix::Zero(p, n);
            if (i < n - p + 1 || i > n + 1)
                throw IndexOutOfRange("beta filter index must be in [n-p+1, n+1]");
            return one_var ? detail::ones_block(p, p, p - n + i - 1, p - n + i - 1, n - i + 1)
                           : detail::ones_block(p, n, p - n + i - 1, i - 1, n - i + 1);
        }
    }
    throw IndexOutOfRange("unknown filter regime");
}

namespace detail {

inline GsvSpectrum spectrum_from_alphas(std::vector<double> alphas, Index n) {
    // Pad structural zeros (fewer singular values than columns).
    alphas.resize(static_cast<std::size_t>(n), 0.0);
    std::sort(alphas.begin(), alphas.end(), std::greater<>());

    GsvSpectrum spec;
    spec.pairs.reserve(alphas.size());
    for (Index i = 0; i < n; ++i) {
        const double alpha = clamp01(alphas[static_cast<std::size_t>(i)]);
        spec.pairs.push_back(GsvPair{alpha, unit_complement(alpha), i + 1});
        if (alpha == 1.0) ++spec.r;
        else if (alpha > 0.0) ++spec.s;
    }
    return spec;
}

}  // namespace detail

/// Brute-force spectrum via one dense SVD of the whitened A block. Every
/// solver in this library is tested against it.
inline GsvSpectrum dense_gsv_oracle(const GrassmanPair& pair) {
    const GramOperators ops = gram_operators(pair);
    Eigen::BDCSVD<Matrix> svd(ops.whitened_a);
    const auto& sv = svd.singularValues();
    std::vector<double> alphas(sv.data(), sv.data() + sv.size());
    return detail::spectrum_from_alphas(std::move(alphas), pair.n);
}

}  // namespace gsvx
