#pragma once

#include <vector>

#include "gsvx/core.hpp"
#include "gsvx/grassmann_newton.hpp"  // DenseMatrix

namespace gsvx {

template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Outcome of k bidiagonalization steps: E V = U B and
/// E^H U = V B^H + residual e_k^T, with B upper bidiagonal carrying `diag`
/// and `superdiag`.
template <typename Scalar>
struct BidiagFactorization {
    DenseMatrix<Scalar> u;         // m x k, orthonormal columns
    DenseMatrix<Scalar> v;         // n x k, orthonormal columns
    RealVector diag;               // k entries, >= 0
    RealVector superdiag;          // k - 1 entries, >= 0
    DenseVector<Scalar> residual;  // n-vector; zero after a clean breakdown
    bool breakdown = false;

    Index k() const { return diag.size(); }

    RealMatrix bidiagonal() const {
        const Index kk = k();
        RealMatrix b = RealMatrix::Zero(kk, kk);
        for (Index j = 0; j < kk; ++j) {
            b(j, j) = diag(j);
            if (j + 1 < kk) b(j, j + 1) = superdiag(j);
        }
        return b;
    }
};

struct BidiagSvd {
    RealVector gamma;  // descending singular values of the small bidiagonal
    RealMatrix left;   // k x k orthogonal
    RealMatrix right;  // k x k orthogonal
};

template <typename Scalar>
struct PartialSvd {
    RealVector values;          // descending
    DenseMatrix<Scalar> left;   // m x j
    DenseMatrix<Scalar> right;  // n x j
    std::vector<bool> converged_flags;

    bool all_converged() const {
        for (bool c : converged_flags)
            if (!c) return false;
        return true;
    }
};

namespace detail {

template <typename Scalar>
void orthogonalize_against(DenseVector<Scalar>& x, const DenseMatrix<Scalar>& basis,
                           Index cols) {
    if (cols == 0) return;
    const auto b = basis.leftCols(cols);
    x.noalias() -= b * (b.adjoint() * x);
}

// The plain recurrence plus optional reorthogonalization, with extra "locked"
// bases the Krylov vectors must stay orthogonal to (deflation support for
// partial_singular; empty for the public entry point).
template <typename Scalar>
BidiagFactorization<Scalar> golub_kahan_run(const DenseMatrix<Scalar>& e,
                                            DenseVector<Scalar> v1, Index k,
                                            bool reorth, double breakdown_tol,
                                            const DenseMatrix<Scalar>& locked_u,
                                            const DenseMatrix<Scalar>& locked_v) {
    using Mat = DenseMatrix<Scalar>;
    using Vec = DenseVector<Scalar>;
    const Index m = e.rows(), n = e.cols();

    BidiagFactorization<Scalar> fact;
    fact.u = Mat(m, k);
    fact.v = Mat(n, k);
    fact.diag = RealVector(k);
    fact.superdiag = RealVector(std::max<Index>(k - 1, 0));
    fact.residual = Vec::Zero(n);

    const auto clean_v = [&](Vec& x, Index have) {
        orthogonalize_against(x, locked_v, locked_v.cols());
        orthogonalize_against(x, fact.v, have);
        orthogonalize_against(x, locked_v, locked_v.cols());
        orthogonalize_against(x, fact.v, have);
    };
    const auto clean_u = [&](Vec& x, Index have) {
        orthogonalize_against(x, locked_u, locked_u.cols());
        orthogonalize_against(x, fact.u, have);
        orthogonalize_against(x, locked_u, locked_u.cols());
        orthogonalize_against(x, fact.u, have);
    };

    const auto truncate = [&](Index steps, const Vec& residual) {
        fact.u.conservativeResize(Eigen::NoChange, steps);
        fact.v.conservativeResize(Eigen::NoChange, steps);
        fact.diag.conservativeResize(steps);
        fact.superdiag.conservativeResize(std::max<Index>(steps - 1, 0));
        fact.residual = residual;
        fact.breakdown = true;
    };

    if (locked_v.cols() > 0 || reorth) {
        orthogonalize_against(v1, locked_v, locked_v.cols());
        const double norm = v1.norm();
        if (norm <= breakdown_tol) {
            truncate(0, Vec::Zero(n));
            return fact;
        }
        v1 /= norm;
    } else {
        v1.normalize();
    }

    Vec v = v1;
    for (Index j = 0; j < k; ++j) {
        fact.v.col(j) = v;
        Vec r = e * v;
        if (j > 0) r -= fact.superdiag(j - 1) * fact.u.col(j - 1);
        if (reorth) clean_u(r, j);
        const double alpha = r.norm();
        if (alpha <= breakdown_tol) {
            // v_j maps into the exhausted left span; the truncated
            // factorization keeps the honest residual beta_{j-1} v_j.
            const double beta_prev = j > 0 ? fact.superdiag(j - 1) : 0.0;
            const Vec vres = beta_prev * v;
            truncate(j, vres);
            return fact;
        }
        fact.diag(j) = alpha;
        fact.u.col(j) = r / alpha;

        Vec p = e.adjoint() * fact.u.col(j) - alpha * v;
        if (reorth) clean_v(p, j + 1);
        const double beta = p.norm();
        if (j + 1 == k) {
            fact.residual = p;
            break;
        }
        if (beta <= breakdown_tol) {
            truncate(j + 1, p);
            return fact;
        }
        fact.superdiag(j) = beta;
        v = p / beta;
    }
    return fact;
}

}  // namespace detail

/// Golub-Kahan bidiagonalization of `e` started from `v1` (normalized
/// defensively), stopping early on breakdown. Full reorthogonalization is on
/// by default; the plain recurrence loses orthogonality quickly.
template <typename Scalar>
BidiagFactorization<Scalar> golub_kahan(const DenseMatrix<Scalar>& e,
                                        const DenseVector<Scalar>& v1, Index k,
                                        bool reorth = true) {
    if (v1.size() != e.cols()) throw DimensionMismatch("start vector length must match columns");
    if (k < 1 || k > std::min(e.rows(), e.cols()))
        throw IndexOutOfRange("step count must be in [1, min(rows, cols)]");
    const double tol = 1e-14 * spectral_norm_estimate(e);
    return detail::golub_kahan_run<Scalar>(e, v1, k, reorth, tol,
                                           DenseMatrix<Scalar>(e.rows(), 0),
                                           DenseMatrix<Scalar>(e.cols(), 0));
}

/// Dense SVD of the small k x k bidiagonal factor.
template <typename Scalar>
BidiagSvd bidiagonal_svd(const BidiagFactorization<Scalar>& fact) {
    const RealMatrix b = fact.bidiagonal();
    Eigen::JacobiSVD<RealMatrix> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return BidiagSvd{svd.singularValues(), svd.matrixU(), svd.matrixV()};
}

/// The `count` largest singular triplets of `e` by restarted Golub-Kahan
/// runs. The Krylov size grows (count + 10, then doubling) until every wanted
/// triplet passes the residual test; breakdowns lock the exactly-resolved
/// triplets and restart orthogonally to them. A single-vector Krylov space
/// sees one copy of a repeated singular value, so a converged candidate set
/// is only accepted once it is stable under one more deflated restart. A
/// partial result with false flags is returned when `max_k` is exhausted.
template <typename Scalar>
PartialSvd<Scalar> partial_singular(const DenseMatrix<Scalar>& e, Index count,
                                    double svd_tol = 1e-12, Index max_k = 0,
                                    std::uint64_t seed = 0) {
    using Mat = DenseMatrix<Scalar>;
    using Vec = DenseVector<Scalar>;
    const Index m = e.rows(), n = e.cols();
    const Index dim = std::min(m, n);
    if (count < 1 || count > dim)
        throw IndexOutOfRange("requested triplet count must be in [1, min(rows, cols)]");

    const double enorm = spectral_norm_estimate(e, 20, seed + 0x9e3779b97f4a7c15ull);
    const double breakdown_tol = 1e-14 * enorm;
    const double converge_tol = svd_tol * std::max(enorm, 1e-300);
    const Index k_cap = max_k > 0 ? std::min(max_k, dim) : dim;

    Rng rng(seed);

    struct Triplet {
        double value;
        Vec left;
        Vec right;
        double residual;
    };
    std::vector<Triplet> locked;
    Mat locked_u(m, 0), locked_v(n, 0);

    const auto lock = [&](const Triplet& t) {
        locked.push_back(t);
        locked_u.conservativeResize(Eigen::NoChange, locked_u.cols() + 1);
        locked_u.col(locked_u.cols() - 1) = t.left;
        locked_v.conservativeResize(Eigen::NoChange, locked_v.cols() + 1);
        locked_v.col(locked_v.cols() - 1) = t.right;
    };

    // Indices of the top `count` pool entries, best first.
    const auto top_indices = [&](const std::vector<Triplet>& pool) {
        std::vector<std::size_t> order(pool.size());
        for (std::size_t j = 0; j < pool.size(); ++j) order[j] = j;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return pool[a].value > pool[b].value;
        });
        if (static_cast<Index>(order.size()) > count)
            order.resize(static_cast<std::size_t>(count));
        return order;
    };

    const auto assemble = [&](const std::vector<Triplet>& pool) {
        const std::vector<std::size_t> order = top_indices(pool);
        const Index take = static_cast<Index>(order.size());
        PartialSvd<Scalar> out;
        out.values = RealVector(take);
        out.left = Mat(m, take);
        out.right = Mat(n, take);
        out.converged_flags.resize(static_cast<std::size_t>(take));
        for (Index j = 0; j < take; ++j) {
            const Triplet& t = pool[order[static_cast<std::size_t>(j)]];
            out.values(j) = t.value;
            out.left.col(j) = t.left;
            out.right.col(j) = t.right;
            out.converged_flags[static_cast<std::size_t>(j)] = t.residual <= converge_tol;
        }
        return out;
    };

    Index k = std::min(count + 10, k_cap);
    std::vector<Triplet> pool;
    // Values of the last converged candidate set, pending verification.
    RealVector pending;
    const double stability_tol = 16.0 * converge_tol;

    for (Index restarts = 0; restarts <= 4 * dim + 16; ++restarts) {
        const Index avail = dim - static_cast<Index>(locked.size());
        pool = locked;
        if (avail == 0) break;  // complement empty: the pool is complete

        // Fresh start vector orthogonal to every locked right vector.
        Vec v1(n);
        double norm = 0.0;
        do {
            v1 = rng.gaussian_matrix<Scalar>(n, 1);
            detail::orthogonalize_against(v1, locked_v, locked_v.cols());
            norm = v1.norm();
        } while (norm <= 1e-8);
        v1 /= norm;

        const Index kk = std::min(k, avail);
        const BidiagFactorization<Scalar> fact = detail::golub_kahan_run<Scalar>(
            e, v1, kk, /*reorth=*/true, breakdown_tol, locked_u, locked_v);

        if (fact.k() == 0) {
            // The start vector itself maps into the exhausted span: a null
            // direction. Lock it with value zero so restarts cannot cycle.
            Triplet t;
            t.value = 0.0;
            t.right = v1;
            Vec u;
            double unorm = 0.0;
            do {
                u = rng.gaussian_matrix<Scalar>(m, 1);
                detail::orthogonalize_against(u, locked_u, locked_u.cols());
                unorm = u.norm();
            } while (unorm <= 1e-8);
            t.left = u / unorm;
            t.residual = 0.0;
            lock(t);
            pending.resize(0);
            continue;
        }

        // Left span exhausted with a non-trivial right residual, either by a
        // diagonal breakdown or by running out of left dimensions (wide
        // matrices): the augmented k x (k+1) factor [B, |p| e_k] is exactly
        // invariant, so all its triplets lock.
        const bool left_exhausted = fact.k() == avail;
        if ((fact.breakdown || left_exhausted) && fact.residual.norm() > 16.0 * breakdown_tol) {
            const Index kf = fact.k();
            RealMatrix aug = RealMatrix::Zero(kf, kf + 1);
            for (Index j = 0; j < kf; ++j) {
                aug(j, j) = fact.diag(j);
                if (j + 1 < kf) aug(j, j + 1) = fact.superdiag(j);
            }
            const double res_norm = fact.residual.norm();
            aug(kf - 1, kf) = res_norm;
            Eigen::JacobiSVD<RealMatrix> svd(aug, Eigen::ComputeFullU | Eigen::ComputeFullV);
            Mat vext(n, kf + 1);
            vext.leftCols(kf) = fact.v;
            vext.col(kf) = fact.residual / res_norm;
            for (Index j = 0; j < kf; ++j) {
                Triplet t;
                t.value = svd.singularValues()(j);
                t.left = fact.u * svd.matrixU().col(j).template cast<Scalar>();
                t.right = vext * svd.matrixV().col(j).template cast<Scalar>();
                t.residual = 0.0;
                lock(t);
            }
            pending.resize(0);
            continue;
        }

        const BidiagSvd small = bidiagonal_svd(fact);
        const double res_norm = fact.residual.norm();
        for (Index j = 0; j < fact.k(); ++j) {
            Triplet t;
            t.value = small.gamma(j);
            t.left = fact.u * small.left.col(j).template cast<Scalar>();
            t.right = fact.v * small.right.col(j).template cast<Scalar>();
            t.residual = res_norm * std::abs(small.left(fact.k() - 1, j));
            pool.push_back(std::move(t));
        }

        const std::vector<std::size_t> order = top_indices(pool);
        bool candidate_converged = static_cast<Index>(order.size()) >= std::min(count, dim);
        for (std::size_t idx : order)
            candidate_converged = candidate_converged && pool[idx].residual <= converge_tol;

        if (candidate_converged) {
            RealVector values(static_cast<Index>(order.size()));
            for (Index j = 0; j < values.size(); ++j)
                values(j) = pool[order[static_cast<std::size_t>(j)]].value;
            if (pending.size() == values.size() &&
                (pending - values).cwiseAbs().maxCoeff() <= stability_tol)
                return assemble(pool);
            // Deflate the candidates and verify against the complement; a
            // repeated singular value hiding there must surface now.
            for (std::size_t idx : order)
                if (idx >= locked.size()) lock(pool[idx]);
            pending = values;
            continue;
        }

        pending.resize(0);
        if (fact.breakdown) {
            // Exactly-resolved triplets (tiny residual) lock before restarting.
            bool any_locked = false;
            for (std::size_t idx = locked.size(); idx < pool.size(); ++idx) {
                if (pool[idx].residual <= converge_tol) {
                    lock(pool[idx]);
                    any_locked = true;
                }
            }
            if (any_locked) continue;
        }
        if (kk >= std::min(k_cap, avail)) break;  // budget exhausted
        k = std::min(2 * k, k_cap);
    }
    return assemble(pool);
}

}  // namespace gsvx
