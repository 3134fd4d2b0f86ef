#pragma once

#include <array>
#include <chrono>
#include <future>
#include <string>

#include "gsvx/solver.hpp"

namespace gsvx {

/// Random pair with exactly known spectrum, built as A = U* S_A W,
/// B = V* S_B W with orthonormal U*, V* and a condition-guarded Gaussian W.
struct PlantedGmp {
    GrassmanPair pair;
    RealVector alpha_star;  // descending
    RealVector beta_star;   // ascending
    std::uint64_t seed = 0;
};

struct ErrorReport {
    double err1 = 0.0;  // max relative alpha error over the leading half
    double err2 = 0.0;  // max relative beta error over the trailing half
    double err3 = 0.0;  // min relative alpha error
    double err4 = 0.0;  // min relative beta error
    double wall_time_s = 0.0;
    std::array<Index, 3> sizes{0, 0, 0};
    Method method = Method::TwoVarBidiag;
    bool absolute_fallback = false;  // a planted value below 1e-300 forced absolute errors
};

struct DatasetComparison {
    std::string id;
    std::vector<std::pair<Index, GsvPair>> pairs;
    std::vector<std::pair<Index, double>> theta;
    std::optional<Index> equal_significance_index;
    std::vector<FilterSpec> filters_touched;
    SolveStats stats;
};

struct ComparisonReport {
    DatasetComparison first;
    DatasetComparison second;
};

inline PlantedGmp generate_random_gmp(Index m, Index p, Index n, std::uint64_t seed) {
    if (n < 1 || n > m || n > p)
        throw InvalidDims("generator requires 1 <= n <= m and n <= p");

    Rng rng(seed);
    RealVector alpha(n);
    for (Index j = 0; j < n; ++j) alpha(j) = rng.uniform();
    std::sort(alpha.data(), alpha.data() + n, std::greater<>());
    RealVector beta(n);
    for (Index j = 0; j < n; ++j) beta(j) = unit_complement(alpha(j));

    const auto orthonormal = [&](Index rows) {
        const RealMatrix g = rng.gaussian_matrix<double>(rows, n);
        Eigen::HouseholderQR<RealMatrix> qr(g);
        return RealMatrix(qr.householderQ() * RealMatrix::Identity(rows, n));
    };
    const RealMatrix u = orthonormal(m);
    const RealMatrix v = orthonormal(p);

    RealMatrix w(n, n);
    while (true) {
        w = rng.gaussian_matrix<double>(n, n);
        Eigen::JacobiSVD<RealMatrix> svd(w);
        const auto& sv = svd.singularValues();
        if (sv(n - 1) > 0.0 && sv(0) / sv(n - 1) <= 1e6) break;
    }

    PlantedGmp out;
    out.alpha_star = alpha;
    out.beta_star = beta;
    out.seed = seed;
    out.pair.a = (u * alpha.asDiagonal() * w).cast<Complex>();
    out.pair.b = (v * beta.asDiagonal() * w).cast<Complex>();
    out.pair.m = m;
    out.pair.p = p;
    out.pair.n = n;
    return out;
}

/// Same spectrum, complex entries: unit-modulus diagonal phases on both sides
/// leave every generalized singular value untouched.
inline PlantedGmp with_random_phases(const PlantedGmp& planted, std::uint64_t seed) {
    Rng rng(seed);
    const auto phases = [&](Index size) {
        Vector d(size);
        for (Index j = 0; j < size; ++j) {
            const double angle = 2.0 * std::numbers::pi * rng.uniform();
            d(j) = Complex(std::cos(angle), std::sin(angle));
        }
        return d;
    };
    const Vector left_a = phases(planted.pair.m);
    const Vector left_b = phases(planted.pair.p);
    const Vector right = phases(planted.pair.n);

    PlantedGmp out = planted;
    out.pair.a = left_a.asDiagonal() * planted.pair.a * right.asDiagonal();
    out.pair.b = left_b.asDiagonal() * planted.pair.b * right.asDiagonal();
    return out;
}

inline ErrorReport error_metrics(const PlantedGmp& planted,
                                 const std::vector<GsvPair>& computed) {
    const Index n = planted.pair.n;
    std::vector<const GsvPair*> by_index(static_cast<std::size_t>(n), nullptr);
    for (const auto& gp : computed)
        if (gp.index >= 1 && gp.index <= n) by_index[static_cast<std::size_t>(gp.index - 1)] = &gp;
    for (Index i = 0; i < n; ++i)
        if (by_index[static_cast<std::size_t>(i)] == nullptr)
            throw MissingIndices("computed spectrum misses index " + std::to_string(i + 1));

    ErrorReport rep;
    rep.sizes = {planted.pair.m, planted.pair.p, n};
    const Index half = n / 2;

    const auto relative = [&rep](double got, double star) {
        if (std::abs(star) < 1e-300) {
            rep.absolute_fallback = true;
            return std::abs(got - star);
        }
        return std::abs(got - star) / std::abs(star);
    };

    double max_a = 0.0, min_a = std::numeric_limits<double>::infinity();
    for (Index i = 1; i <= half; ++i) {
        const double err = relative(by_index[static_cast<std::size_t>(i - 1)]->alpha,
                                    planted.alpha_star(i - 1));
        max_a = std::max(max_a, err);
        min_a = std::min(min_a, err);
    }
    double max_b = 0.0, min_b = std::numeric_limits<double>::infinity();
    for (Index i = half + 1; i <= n; ++i) {
        const double err = relative(by_index[static_cast<std::size_t>(i - 1)]->beta,
                                    planted.beta_star(i - 1));
        max_b = std::max(max_b, err);
        min_b = std::min(min_b, err);
    }
    rep.err1 = half > 0 ? max_a : 0.0;
    rep.err3 = half > 0 ? min_a : 0.0;
    rep.err2 = max_b;
    rep.err4 = min_b;
    return rep;
}

/// Full-spectrum solve of one planted pair with one method, timed.
inline ErrorReport benchmark_entry(const PlantedGmp& planted, Method method,
                                   const NewtonConfig& newton = {}, double svd_tol = 1e-12,
                                   Index max_k = 0) {
    const auto start = std::chrono::steady_clock::now();
    const GramOperators ops = gram_operators(planted.pair);
    std::vector<GsvPair> computed;
    computed.reserve(static_cast<std::size_t>(planted.pair.n));
    for (Index i = 1; i <= planted.pair.n; ++i)
        computed.push_back(dispatch_index(ops, i, method, newton, svd_tol, max_k));
    const auto stop = std::chrono::steady_clock::now();

    ErrorReport rep = error_metrics(planted, computed);
    rep.method = method;
    rep.wall_time_s = std::chrono::duration<double>(stop - start).count();
    return rep;
}

/// Table-style benchmark: one planted pair per size (seeded by size position),
/// every method on the same pair. Entries may run concurrently.
inline std::vector<ErrorReport> benchmark(const std::vector<std::array<Index, 3>>& sizes,
                                          const std::vector<Method>& methods,
                                          std::uint64_t seed, const NewtonConfig& newton = {},
                                          double svd_tol = 1e-12, Index max_k = 0,
                                          int jobs = 1) {
    const auto run_size = [&](std::size_t idx) {
        const auto& size = sizes[idx];
        const PlantedGmp planted =
            generate_random_gmp(size[0], size[1], size[2], seed + 1000003 * idx);
        std::vector<ErrorReport> entries;
        entries.reserve(methods.size());
        for (Method method : methods)
            entries.push_back(benchmark_entry(planted, method, newton, svd_tol, max_k));
        return entries;
    };

    std::vector<std::vector<ErrorReport>> grouped(sizes.size());
    if (jobs > 1) {
        std::vector<std::future<std::vector<ErrorReport>>> futures;
        futures.reserve(sizes.size());
        for (std::size_t idx = 0; idx < sizes.size(); ++idx)
            futures.push_back(std::async(std::launch::async, run_size, idx));
        for (std::size_t idx = 0; idx < sizes.size(); ++idx) grouped[idx] = futures[idx].get();
    } else {
        for (std::size_t idx = 0; idx < sizes.size(); ++idx) grouped[idx] = run_size(idx);
    }

    std::vector<ErrorReport> out;
    for (auto& entries : grouped)
        for (auto& rep : entries) out.push_back(std::move(rep));
    return out;
}

namespace detail {

inline DatasetComparison compare_one(const GrassmanPair& pair, std::string id,
                                     const SweepConfig& cfg) {
    const SweepResult res = sweep(pair, cfg);
    DatasetComparison out;
    out.id = std::move(id);
    out.pairs = res.computed;
    out.theta = res.theta;
    out.equal_significance_index = res.crossing_index;
    out.stats = res.stats;

    const Index m = pair.m, p = pair.p, n = pair.n;
    const Index half = n / 2;
    const FilterVariant variant =
        cfg.method == Method::OneVarNewton ? FilterVariant::OneVar : FilterVariant::TwoVar;
    for (const auto& [i, gp] : res.computed) {
        const bool structural = (m < n && i > m) || (p < n && i <= n - p);
        if (structural) continue;
        if (i <= half)
            out.filters_touched.push_back(FilterSpec{
                i, FilterSide::Alpha, variant, n <= m ? FilterRegime::TallA : FilterRegime::WideA});
        else
            out.filters_touched.push_back(FilterSpec{
                i, FilterSide::Beta, variant, n <= p ? FilterRegime::TallB : FilterRegime::WideB});
    }
    return out;
}

}  // namespace detail

/// Two-dataset comparison: partial sweeps on both pairs, angular-distance
/// profiles and the equal-significance index for each.
inline ComparisonReport compare_datasets(const GrassmanPair& ds1, const GrassmanPair& ds2,
                                         const SweepConfig& cfg = {},
                                         const std::string& id1 = "first",
                                         const std::string& id2 = "second") {
    if (ds1.n != ds2.n)
        throw DimensionMismatch("dataset pairs must share the column count");
    ComparisonReport rep;
    rep.first = detail::compare_one(ds1, id1, cfg);
    rep.second = detail::compare_one(ds2, id2, cfg);
    return rep;
}

}  // namespace gsvx
