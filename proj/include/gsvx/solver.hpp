#pragma once

#include <map>
#include <numbers>
#include <optional>

#include "gsvx/gmp.hpp"
#include "gsvx/grassmann_newton.hpp"
#include "gsvx/lanczos.hpp"

namespace gsvx {

enum class Method { OneVarNewton, TwoVarBidiag, DenseOracle };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::OneVarNewton: return "one-var";
        case Method::TwoVarBidiag: return "two-var";
        case Method::DenseOracle: return "oracle";
    }
    return "?";
}

struct SolveRequest {
    GrassmanPair pair;
    Index index = 1;
    Method method = Method::TwoVarBidiag;
    NewtonConfig newton;
    double svd_tol = 1e-12;
    Index max_k = 0;
};

/// Inner-solver cost counters; structural zeros leave them untouched.
struct SolveStats {
    int solves = 0;
    int alpha_solves = 0;
    int beta_solves = 0;
    long newton_outer = 0;
    long newton_cg = 0;
};

struct SweepConfig {
    Method method = Method::TwoVarBidiag;
    NewtonConfig newton;
    double svd_tol = 1e-12;
    Index max_k = 0;
};

struct SweepResult {
    std::vector<std::pair<Index, GsvPair>> computed;   // ascending by index
    std::optional<Index> crossing_index;               // argmin |theta|
    std::vector<std::pair<Index, double>> theta;       // radians, per computed index
    SolveStats stats;
};

namespace detail {

inline double ky_fan(const Matrix& op, Index width, const NewtonConfig& cfg,
                     const StiefelPoint<Complex>* warm, SolveStats* stats) {
    const NewtonReport<Complex> rep = newton_grassmann(op, width, cfg, warm);
    if (stats != nullptr) {
        stats->newton_outer += rep.outer_iters;
        stats->newton_cg += rep.cg_iters_total;
    }
    if (!rep.converged)
        throw NotConverged("Ky Fan solve did not converge at frame width " +
                           std::to_string(width));
    return rep.value;
}

// Difference of two adjacent Ky Fan values; the narrower solve is warm
// started from the leading columns of the wider solution frame.
inline double ky_fan_difference(const Matrix& op, Index width,
                                const NewtonConfig& cfg, SolveStats* stats) {
    const NewtonReport<Complex> wide = newton_grassmann(op, width, cfg);
    if (stats != nullptr) {
        stats->newton_outer += wide.outer_iters;
        stats->newton_cg += wide.cg_iters_total;
    }
    if (!wide.converged)
        throw NotConverged("Ky Fan solve did not converge at frame width " +
                           std::to_string(width));
    double narrow_value = 0.0;
    if (width > 1) {
        const StiefelPoint<Complex> warm{wide.point.frame.leftCols(width - 1)};
        narrow_value = ky_fan(op, width - 1, cfg, &warm, stats);
    }
    const double diff = wide.value - narrow_value;
    if (diff < -1e-10)
        throw InconsistentSolves("Ky Fan difference is negative beyond round-off: " +
                                 std::to_string(diff));
    return clamp01(diff);
}

inline double nth_singular_value(const Matrix& mat, Index nth, double svd_tol,
                                 Index max_k, std::uint64_t seed) {
    const PartialSvd<Complex> out = partial_singular(mat, nth, svd_tol, max_k, seed);
    if (out.values.size() < nth || !out.converged_flags[static_cast<std::size_t>(nth - 1)])
        throw NotConverged("partial SVD did not converge for value " + std::to_string(nth));
    return clamp01(out.values(nth - 1));
}

}  // namespace detail

/// alpha_i by the one-variable route: difference of adjacent Ky Fan values of
/// the m x m alpha operator.
inline double alpha_one_var(const GramOperators& ops, Index i, const NewtonConfig& cfg = {},
                            SolveStats* stats = nullptr) {
    const Index m = ops.alpha_op.rows();
    const Index n = ops.stack_gram.rows();
    if (i < 1 || i > std::min(m, n))
        throw IndexOutOfRange("alpha index must be in [1, min(m, n)]");
    return std::sqrt(detail::ky_fan_difference(ops.alpha_op, i, cfg, stats));
}

inline double alpha_one_var(const GrassmanPair& pair, Index i, const NewtonConfig& cfg = {}) {
    return alpha_one_var(gram_operators(pair), i, cfg);
}

/// beta_i by the one-variable route: the trailing filter selects the top
/// n - i + 1 frame of the p x p beta operator.
inline double beta_one_var(const GramOperators& ops, Index i, const NewtonConfig& cfg = {},
                           SolveStats* stats = nullptr) {
    const Index p = ops.beta_op.rows();
    const Index n = ops.stack_gram.rows();
    if (i < 1 || i > n || n - i + 1 > p)
        throw IndexOutOfRange("beta index must satisfy n - p + 1 <= i <= n");
    return std::sqrt(detail::ky_fan_difference(ops.beta_op, n - i + 1, cfg, stats));
}

inline double beta_one_var(const GrassmanPair& pair, Index i, const NewtonConfig& cfg = {}) {
    return beta_one_var(gram_operators(pair), i, cfg);
}

/// alpha_i by the two-variable route: i-th largest singular value of the
/// whitened A block.
inline double alpha_two_var(const GramOperators& ops, Index i, double svd_tol = 1e-12,
                            Index max_k = 0, std::uint64_t seed = 0) {
    const Index m = ops.alpha_op.rows();
    const Index n = ops.stack_gram.rows();
    if (i < 1 || i > std::min(m, n))
        throw IndexOutOfRange("alpha index must be in [1, min(m, n)]");
    return detail::nth_singular_value(ops.whitened_a, i, svd_tol, max_k, seed);
}

inline double alpha_two_var(const GrassmanPair& pair, Index i, double svd_tol = 1e-12,
                            Index max_k = 0) {
    return alpha_two_var(gram_operators(pair), i, svd_tol, max_k);
}

/// beta_i by the two-variable route: the trailing sums single out the
/// (n - i + 1)-th largest singular value of the whitened B block, so only
/// largest-side extraction is ever needed.
inline double beta_two_var(const GramOperators& ops, Index i, double svd_tol = 1e-12,
                           Index max_k = 0, std::uint64_t seed = 0) {
    const Index p = ops.beta_op.rows();
    const Index n = ops.stack_gram.rows();
    if (i < 1 || i > n || n - i + 1 > std::min(p, n))
        throw IndexOutOfRange("beta index must satisfy n - p + 1 <= i <= n");
    return detail::nth_singular_value(ops.whitened_b, n - i + 1, svd_tol, max_k, seed);
}

inline double beta_two_var(const GrassmanPair& pair, Index i, double svd_tol = 1e-12,
                           Index max_k = 0) {
    return beta_two_var(gram_operators(pair), i, svd_tol, max_k);
}

/// Routes index i to the matching formulation: alpha side for i <= floor(n/2),
/// beta side above, structural zeros short-circuited without any solve.
inline GsvPair dispatch_index(const GramOperators& ops, Index i, Method method,
                              const NewtonConfig& newton = {}, double svd_tol = 1e-12,
                              Index max_k = 0, SolveStats* stats = nullptr) {
    const Index m = ops.alpha_op.rows();
    const Index p = ops.beta_op.rows();
    const Index n = ops.stack_gram.rows();
    if (i < 1 || i > n) throw InvalidIndex("index must be in [1, n]");

    if (m < n && i > m) return GsvPair{0.0, 1.0, i};
    if (p < n && i <= n - p) return GsvPair{1.0, 0.0, i};

    const auto dense_sv = [&](const Matrix& mat, Index nth) {
        Eigen::BDCSVD<Matrix> svd(mat);
        return clamp01(svd.singularValues()(nth - 1));
    };

    const Index half = n / 2;
    if (i <= half) {
        double alpha = 0.0;
        switch (method) {
            case Method::OneVarNewton: alpha = alpha_one_var(ops, i, newton, stats); break;
            case Method::TwoVarBidiag: alpha = alpha_two_var(ops, i, svd_tol, max_k, newton.seed); break;
            case Method::DenseOracle: alpha = dense_sv(ops.whitened_a, i); break;
        }
        if (stats != nullptr) {
            ++stats->solves;
            ++stats->alpha_solves;
        }
        return GsvPair{alpha, unit_complement(alpha), i};
    }
    double beta = 0.0;
    switch (method) {
        case Method::OneVarNewton: beta = beta_one_var(ops, i, newton, stats); break;
        case Method::TwoVarBidiag: beta = beta_two_var(ops, i, svd_tol, max_k, newton.seed); break;
        case Method::DenseOracle: beta = dense_sv(ops.whitened_b, n - i + 1); break;
    }
    if (stats != nullptr) {
        ++stats->solves;
        ++stats->beta_solves;
    }
    return GsvPair{unit_complement(beta), beta, i};
}

inline GsvPair dispatch(const SolveRequest& req, SolveStats* stats = nullptr) {
    if (req.index < 1 || req.index > req.pair.n)
        throw InvalidIndex("index must be in [1, n]");
    const GramOperators ops = gram_operators(req.pair);
    return dispatch_index(ops, req.index, req.method, req.newton, req.svd_tol, req.max_k,
                          stats);
}

/// Antisymmetric angular distance in radians: 0 means equal significance,
/// +pi/4 none in the second data set, -pi/4 none in the first. Exactly
/// antisymmetric under swapping the pair components.
inline double angular_distance(const GsvPair& gp) {
    constexpr double quarter = std::numbers::pi / 4.0;
    if (gp.alpha == gp.beta) return 0.0;
    if (gp.alpha > gp.beta) return std::atan2(gp.alpha, gp.beta) - quarter;
    return -(std::atan2(gp.beta, gp.alpha) - quarter);
}

/// Partial spectrum march: alpha_1 and beta_n first, then the beta side
/// downward (or the alpha side upward) until the computed value crosses
/// sqrt(2)/2, one index past the crossing. The crossing index is the argmin
/// of |theta| over everything computed, ties toward the larger index.
inline SweepResult sweep(const GramOperators& ops, const SweepConfig& cfg = {}) {
    const Index n = ops.stack_gram.rows();
    const double cross = std::sqrt(0.5);
    SweepResult out;
    std::map<Index, GsvPair> computed;

    const auto solve = [&](Index i) -> const GsvPair& {
        auto it = computed.find(i);
        if (it == computed.end())
            it = computed.emplace(i, dispatch_index(ops, i, cfg.method, cfg.newton,
                                                    cfg.svd_tol, cfg.max_k, &out.stats))
                     .first;
        return it->second;
    };

    const GsvPair& head = solve(1);
    const GsvPair& tail = solve(n);

    if (head.alpha <= cross) {
        if (n >= 2) solve(2);  // one index past the crossing at the head
    } else if (tail.beta <= cross) {
        if (n >= 2) solve(n - 1);
    } else {
        const Index half = n / 2;
        bool crossed = false;
        for (Index i = n - 1; i >= half + 1; --i) {
            if (solve(i).beta <= cross) {
                crossed = true;
                break;
            }
        }
        if (!crossed) {
            // Whole beta side above the crossing: mirror onto the alpha side.
            for (Index j = 2; j <= half; ++j) {
                if (solve(j).alpha <= cross) break;
            }
        }
    }

    double best = std::numeric_limits<double>::infinity();
    Index best_index = 0;
    for (const auto& [i, gp] : computed) {
        const double th = angular_distance(gp);
        out.computed.emplace_back(i, gp);
        out.theta.emplace_back(i, th);
        if (std::abs(th) <= best) {
            best = std::abs(th);
            best_index = i;
        }
    }
    if (best_index > 0) out.crossing_index = best_index;
    return out;
}

inline SweepResult sweep(const GrassmanPair& pair, const SweepConfig& cfg = {}) {
    return sweep(gram_operators(pair), cfg);
}

}  // namespace gsvx
