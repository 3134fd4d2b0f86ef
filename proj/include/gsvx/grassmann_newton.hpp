#pragma once

#include <limits>
#include <vector>

#include "gsvx/core.hpp"

namespace gsvx {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Orthonormal m x i frame representing a point of the Grassmann quotient.
template <typename Scalar>
struct StiefelPoint {
    DenseMatrix<Scalar> frame;
};

/// Horizontal direction at a frame: frame^H dir = 0.
template <typename Scalar>
struct TangentVector {
    DenseMatrix<Scalar> dir;
};

struct NewtonConfig {
    double eta = 0.1;      // inexactness cap of the CG forcing term
    double rho = 0.5;      // backtracking factor
    double sigma = 1e-4;   // Armijo slope fraction
    double grad_tol = 1e-6;
    int max_outer = 100;
    int max_cg = 0;        // <= 0 scales with the problem: rows * frame width
    std::uint64_t seed = 0;
};

template <typename Scalar>
struct NewtonReport {
    StiefelPoint<Scalar> point;
    double value = 0.0;      // tr(Phi^H C Phi), twice the half-trace objective
    double grad_norm = 0.0;
    int outer_iters = 0;
    long cg_iters_total = 0;
    bool converged = false;
    std::vector<double> values;  // accepted objective values, non-decreasing
};

template <typename Scalar>
struct CgStep {
    TangentVector<Scalar> step;
    bool used_fallback = false;
    int cg_iters = 0;
};

/// Orthogonal projection onto the horizontal space at `phi`.
template <typename DerivedPhi, typename DerivedZ>
DenseMatrix<typename DerivedPhi::Scalar> tangent_project(
    const Eigen::MatrixBase<DerivedPhi>& phi, const Eigen::MatrixBase<DerivedZ>& z) {
    return z - phi * (phi.adjoint() * z);
}

/// Ambient derivative of the trace objective; project it for the Riemannian
/// gradient.
template <typename DerivedC, typename DerivedPhi>
DenseMatrix<typename DerivedC::Scalar> euclidean_gradient(
    const Eigen::MatrixBase<DerivedC>& c, const Eigen::MatrixBase<DerivedPhi>& phi) {
    return c * phi;
}

/// Projection retraction: the orthonormal frame nearest to `x`, via thin QR
/// with the triangular factor's diagonal normalized to be real positive.
template <typename Derived>
StiefelPoint<typename Derived::Scalar> retract_pi(const Eigen::MatrixBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    using Mat = DenseMatrix<Scalar>;
    const Index rows = x.rows(), cols = x.cols();
    if (rows < cols) throw DimensionMismatch("retraction needs rows >= cols");

    Eigen::HouseholderQR<Mat> qr(x.derived());
    Mat q = qr.householderQ() * Mat::Identity(rows, cols);
    Mat r = qr.matrixQR().topRows(cols).template triangularView<Eigen::Upper>();

    Eigen::JacobiSVD<Mat> svd(r);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-14 * sv(0))
        throw RankDeficientStep("retraction input is numerically rank deficient");

    for (Index j = 0; j < cols; ++j) {
        const double mag = std::abs(r(j, j));
        if (mag > 0.0) q.col(j) *= r(j, j) / mag;
    }
    return StiefelPoint<Scalar>{std::move(q)};
}

namespace detail {

// One inexact Newton direction. Works on the minimization form of the trace
// problem: operator P(Z W - C Z) with right-hand side g = P C phi, which is
// the sign-flipped version of the written Newton system and has the same
// solutions. `g`, `w` are precomputed by the caller.
template <typename Scalar>
CgStep<Scalar> newton_cg_core(const DenseMatrix<Scalar>& c,
                              const DenseMatrix<Scalar>& phi,
                              const DenseMatrix<Scalar>& g,
                              const DenseMatrix<Scalar>& w,
                              const NewtonConfig& cfg, double cnorm) {
    using Mat = DenseMatrix<Scalar>;
    const double gnorm = g.norm();
    const double eta_k = std::min(cfg.eta, gnorm);
    const long max_cg =
        cfg.max_cg > 0 ? cfg.max_cg : static_cast<long>(phi.rows() * phi.cols());

    const auto apply = [&](const Mat& z) -> Mat {
        Mat az = z * w - c * z;
        az.noalias() -= phi * (phi.adjoint() * az);
        return az;
    };

    Mat z = Mat::Zero(phi.rows(), phi.cols());
    Mat res = g;
    Mat dir = res;
    double rr = res.squaredNorm();
    // Floor keeps CG from spinning once rounding dominates the recurrence.
    const double tol = std::max(eta_k * gnorm, 64.0 * std::numeric_limits<double>::epsilon() * cnorm);
    // Smallest Rayleigh quotient certified along the CG run; the natural
    // curvature scale of the returned direction.
    double min_curvature = std::numeric_limits<double>::infinity();
    // Direction of non-positive curvature that truncated the run, if any.
    Mat escape;
    bool saw_nonpositive = false;

    CgStep<Scalar> out;
    if (gnorm > 0.0) {
        for (long it = 0; it < max_cg; ++it) {
            const Mat adir = apply(dir);
            const double dd = dir.squaredNorm();
            const double curvature = real_inner(adir, dir);
            if (curvature <= 1e-14 * cnorm * dd) {
                saw_nonpositive = true;
                escape = dir;
                break;
            }
            min_curvature = std::min(min_curvature, curvature / dd);
            const double step = rr / curvature;
            z += step * dir;
            res -= step * adir;
            ++out.cg_iters;
            const double rr_next = res.squaredNorm();
            if (std::sqrt(rr_next) <= tol) break;
            dir = res + (rr_next / rr) * dir;
            rr = rr_next;
        }
        z = tangent_project(phi, z).eval();
    }

    // Accept only if both step conditions hold by direct substitution,
    // otherwise fall back. The descent threshold is capped by the certified
    // curvature: with a small spectral gap even the exact Newton direction
    // only aligns with the gradient at curvature scale, and a cap of
    // min(eta, |grad|) would reject it outright.
    const double slack = 16.0 * std::numeric_limits<double>::epsilon() * cnorm;
    const double align = std::min(eta_k, min_curvature);
    const bool cnd1 = (apply(z) - g).norm() <= eta_k * gnorm + slack;
    const bool cnd2 =
        real_inner(g, z) >= align * z.squaredNorm() - slack * (1.0 + z.squaredNorm());
    if (!(cnd1 && cnd2)) {
        if (saw_nonpositive) {
            // Saddle region. Gradient steps flatten out at |grad|^2 progress
            // per iteration, so step along the non-positive-curvature
            // direction instead, sign-matched to the gradient and scaled to
            // an O(1) frame rotation; backtracking shortens it if too bold.
            // When the truncation happened on the first CG direction this is
            // still the projected gradient direction.
            const double overlap = real_inner(g, escape);
            const double len = 1.0 + std::sqrt(static_cast<double>(phi.cols()));
            z = escape * ((overlap < 0.0 ? -len : len) / escape.norm());
        } else {
            z = g;
        }
        out.used_fallback = true;
    }
    out.step = TangentVector<Scalar>{std::move(z)};
    return out;
}

}  // namespace detail

/// Inexact Newton direction at `phi` for the trace maximization driven by the
/// Hermitian matrix `c`. Falls back to the projected gradient when the CG
/// solve cannot certify its conditions (indefinite reduced Hessian, stalled
/// residual).
template <typename Scalar>
CgStep<Scalar> newton_cg_step(const DenseMatrix<Scalar>& c,
                              const StiefelPoint<Scalar>& phi,
                              const NewtonConfig& cfg = {}) {
    const DenseMatrix<Scalar> cphi = c * phi.frame;
    DenseMatrix<Scalar> w = phi.frame.adjoint() * cphi;
    w = (0.5 * (w + w.adjoint())).eval();
    const DenseMatrix<Scalar> g = cphi - phi.frame * w;
    return detail::newton_cg_core(c, phi.frame, g, w, cfg, c.norm());
}

/// Newton's method on the Grassmann manifold for the Ky Fan problem: maximize
/// tr(Phi^H C Phi) over orthonormal m x i frames. Returns the report even
/// when the iteration budget runs out (converged = false); only a stalled
/// line search throws.
template <typename Scalar>
NewtonReport<Scalar> newton_grassmann(const DenseMatrix<Scalar>& c, Index i,
                                      const NewtonConfig& cfg = {},
                                      const StiefelPoint<Scalar>* warm_start = nullptr) {
    using Mat = DenseMatrix<Scalar>;
    const Index m = c.rows();
    if (c.cols() != m) throw DimensionMismatch("Ky Fan matrix must be square");
    if (i < 0 || i > m) throw IndexOutOfRange("frame width must be in [0, rows]");

    NewtonReport<Scalar> rep;
    if (i == 0) {
        rep.point.frame = Mat::Zero(m, 0);
        rep.converged = true;
        return rep;
    }

    const double cnorm = c.norm();
    Mat phi;
    if (warm_start != nullptr) {
        if (warm_start->frame.rows() != m || warm_start->frame.cols() != i)
            throw DimensionMismatch("warm start has wrong shape");
        phi = retract_pi(warm_start->frame).frame;
    } else {
        Rng rng(cfg.seed);
        phi = retract_pi(rng.gaussian_matrix<Scalar>(m, i)).frame;
    }

    Mat cphi = c * phi;
    Mat w = phi.adjoint() * cphi;
    w = (0.5 * (w + w.adjoint())).eval();
    double value = w.real().trace();
    rep.values.push_back(value);

    // Rayleigh-Ritz escape: near an invariant subspace the gradient vanishes
    // whether or not the subspace is the dominant one. If the deflated
    // complement holds a direction with a larger Rayleigh quotient than the
    // smallest Ritz value inside the frame, swapping it in strictly increases
    // the objective; "no such direction" certifies the Ky Fan optimum.
    Rng swap_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const double swap_gain = std::max(1e-11 * cnorm, 1e-14);
    const auto try_swap = [&]() -> bool {
        if (i >= m) return false;
        Eigen::SelfAdjointEigenSolver<Mat> ritz(w);
        const double inside_min = ritz.eigenvalues()(0);

        Vec v = swap_rng.gaussian_matrix<Scalar>(m, 1);
        v -= phi * (phi.adjoint() * v).eval();
        if (v.norm() <= 1e-12) return false;
        v.normalize();
        // Shifted power iteration (C + |C| I stays positive semidefinite) with
        // an early exit as soon as the quotient certifies an improvement.
        bool found = false;
        for (int it = 0; it < 128; ++it) {
            Vec cv = c * v;
            const double quotient = real_inner(cv, v);
            if (quotient > inside_min + swap_gain) {
                found = true;
                break;
            }
            cv += cnorm * v;
            cv -= phi * (phi.adjoint() * cv).eval();
            const double norm = cv.norm();
            if (norm <= 1e-300) return false;
            v = cv / norm;
        }
        if (!found) return false;

        Mat next(m, i);
        next.leftCols(i - 1) = phi * ritz.eigenvectors().rightCols(i - 1);
        next.col(i - 1) = v;
        phi = retract_pi(next).frame;
        cphi = c * phi;
        w = phi.adjoint() * cphi;
        w = (0.5 * (w + w.adjoint())).eval();
        value = w.real().trace();
        rep.values.push_back(value);
        return true;
    };

    int stagnant = 0;
    while (true) {
        const Mat g = cphi - phi * w;
        rep.grad_norm = g.norm();
        if (rep.grad_norm <= cfg.grad_tol) {
            if (rep.outer_iters < cfg.max_outer && try_swap()) {
                ++rep.outer_iters;
                continue;
            }
            rep.converged = true;
            break;
        }
        if (rep.outer_iters >= cfg.max_outer) break;

        CgStep<Scalar> cg = detail::newton_cg_core(c, phi, g, w, cfg, cnorm);
        rep.cg_iters_total += cg.cg_iters;
        const Mat& z = cg.step.dir;

        // Armijo on the minimized half-trace; slope is negative by the
        // descent-compatibility condition.
        const double slope = -real_inner(g, z);
        const double h0 = -0.5 * value;
        double t = 1.0;
        bool accepted = false;
        Mat cand, cand_cphi, cand_w;
        double cand_value = 0.0;
        for (int l = 0; l <= 60; ++l, t *= cfg.rho) {
            cand = retract_pi((phi + t * z).eval()).frame;
            cand_cphi = c * cand;
            cand_w = cand.adjoint() * cand_cphi;
            cand_w = (0.5 * (cand_w + cand_w.adjoint())).eval();
            cand_value = cand_w.real().trace();
            if (-0.5 * cand_value <= h0 + cfg.sigma * t * slope) {
                accepted = true;
                break;
            }
        }
        if (!accepted)
            throw LineSearchStalled("no acceptable step within 60 halvings");

        const double progress = cand_value - value;
        phi = std::move(cand);
        cphi = std::move(cand_cphi);
        w = std::move(cand_w);
        value = cand_value;
        rep.values.push_back(value);
        ++rep.outer_iters;

        // A saddle plateau starves the line search of progress long before
        // the gradient test can fire; hand over to the swap escape.
        if (progress <= 1e-13 * (1.0 + std::abs(value))) {
            if (++stagnant >= 2 && rep.outer_iters < cfg.max_outer) {
                if (try_swap()) ++rep.outer_iters;
                stagnant = 0;
            }
        } else {
            stagnant = 0;
        }
    }

    rep.point.frame = std::move(phi);
    rep.value = value;
    return rep;
}

}  // namespace gsvx
