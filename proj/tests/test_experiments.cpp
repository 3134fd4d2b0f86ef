#include <doctest.h>

#include "gsvx/experiments.hpp"
#include "test_util.hpp"

using namespace gsvx;
namespace gt = gsvx::testing;

TEST_CASE("generator is deterministic for a fixed seed") {
    const PlantedGmp one = generate_random_gmp(12, 10, 6, 42);
    const PlantedGmp two = generate_random_gmp(12, 10, 6, 42);
    CHECK(one.pair.a == two.pair.a);
    CHECK(one.pair.b == two.pair.b);
    CHECK(one.alpha_star == two.alpha_star);

    const PlantedGmp other = generate_random_gmp(12, 10, 6, 43);
    CHECK(one.pair.a != other.pair.a);
}

TEST_CASE("generator plants the exact spectrum") {
    const PlantedGmp planted = generate_random_gmp(5, 4, 3, 7);
    const GsvSpectrum spec = dense_gsv_oracle(planted.pair);
    for (Index i = 0; i < 3; ++i) {
        CHECK(std::abs(spec.pairs[static_cast<std::size_t>(i)].alpha - planted.alpha_star(i)) <= 1e-12);
        CHECK(std::abs(planted.alpha_star(i) * planted.alpha_star(i) +
                       planted.beta_star(i) * planted.beta_star(i) - 1.0) <= 1e-15);
    }
    // Descending alphas, ascending betas by construction.
    for (Index i = 1; i < 3; ++i) {
        CHECK(planted.alpha_star(i) <= planted.alpha_star(i - 1));
        CHECK(planted.beta_star(i) >= planted.beta_star(i - 1));
    }
}

TEST_CASE("generated pairs validate and stay well conditioned") {
    const PlantedGmp planted = generate_random_gmp(100, 80, 20, 11);
    const GrassmanPair validated = validate_gmp(planted.pair.a, planted.pair.b);
    CHECK(validated.n == 20);
    const GramOperators ops = gram_operators(validated);
    CHECK(std::isfinite(ops.cond));
}

TEST_CASE("generator round-trips through the oracle at large sizes") {
    for (const auto [m, p, n, seed] : {std::tuple<Index, Index, Index, std::uint64_t>{60, 50, 25, 3},
                                       {200, 160, 60, 4},
                                       {1000, 800, 300, 5}}) {
        const PlantedGmp planted = generate_random_gmp(m, p, n, seed);
        const GsvSpectrum spec = dense_gsv_oracle(planted.pair);
        double worst = 0.0;
        for (Index i = 0; i < n; ++i)
            worst = std::max(worst, std::abs(spec.pairs[static_cast<std::size_t>(i)].alpha -
                                             planted.alpha_star(i)));
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("random phases preserve the planted spectrum") {
    const PlantedGmp real_pair = generate_random_gmp(20, 16, 8, 23);
    const PlantedGmp complex_pair = with_random_phases(real_pair, 99);
    CHECK(complex_pair.pair.a.imag().norm() > 0.0);
    const GsvSpectrum spec = dense_gsv_oracle(complex_pair.pair);
    for (Index i = 0; i < 8; ++i)
        CHECK(std::abs(spec.pairs[static_cast<std::size_t>(i)].alpha - real_pair.alpha_star(i)) <= 1e-12);
}

TEST_CASE("generator rejects unsupported shapes") {
    CHECK_THROWS_AS(generate_random_gmp(3, 8, 5, 1), InvalidDims);
    CHECK_THROWS_AS(generate_random_gmp(8, 3, 5, 1), InvalidDims);
    CHECK_THROWS_AS(generate_random_gmp(8, 8, 0, 1), InvalidDims);
}

TEST_CASE("error metrics vanish on the exact spectrum") {
    const PlantedGmp planted = generate_random_gmp(10, 9, 4, 31);
    std::vector<GsvPair> exact;
    for (Index i = 1; i <= 4; ++i)
        exact.push_back(GsvPair{planted.alpha_star(i - 1), planted.beta_star(i - 1), i});
    const ErrorReport rep = error_metrics(planted, exact);
    CHECK(rep.err1 == 0.0);
    CHECK(rep.err2 == 0.0);
    CHECK(rep.err3 == 0.0);
    CHECK(rep.err4 == 0.0);
    CHECK(rep.sizes == std::array<Index, 3>{10, 9, 4});
}

TEST_CASE("error metrics compute plain relative errors") {
    PlantedGmp planted = generate_random_gmp(6, 5, 2, 33);
    planted.alpha_star(0) = 0.8;
    planted.beta_star(0) = unit_complement(0.8);
    std::vector<GsvPair> computed{
        GsvPair{0.81, unit_complement(0.81), 1},
        GsvPair{planted.alpha_star(1), planted.beta_star(1), 2},
    };
    const ErrorReport rep = error_metrics(planted, computed);
    CHECK(rep.err1 == doctest::Approx(0.0125).epsilon(1e-12));
    CHECK(rep.err3 == doctest::Approx(0.0125).epsilon(1e-12));
    CHECK(rep.err2 == 0.0);
}

TEST_CASE("error metrics demand full index coverage") {
    const PlantedGmp planted = generate_random_gmp(6, 5, 3, 35);
    std::vector<GsvPair> partial{GsvPair{0.5, unit_complement(0.5), 1}};
    CHECK_THROWS_AS(error_metrics(planted, partial), MissingIndices);
}

TEST_CASE("benchmark runs every size and method") {
    const std::vector<std::array<Index, 3>> sizes{{30, 25, 12}, {40, 32, 16}};
    const std::vector<Method> methods{Method::OneVarNewton, Method::TwoVarBidiag};
    const std::vector<ErrorReport> reports = benchmark(sizes, methods, 17);
    REQUIRE(reports.size() == 4);
    for (const auto& rep : reports) {
        CHECK(rep.err1 <= 1e-8);
        CHECK(rep.err2 <= 1e-8);
        CHECK(rep.err3 <= rep.err1);
        CHECK(rep.err4 <= rep.err2);
        CHECK(rep.wall_time_s >= 0.0);
        CHECK_FALSE(rep.absolute_fallback);
    }
    CHECK(benchmark({}, methods, 17).empty());
}

TEST_CASE("parallel benchmark entries match the sequential ones") {
    const std::vector<std::array<Index, 3>> sizes{{20, 18, 8}, {24, 20, 10}};
    const std::vector<Method> methods{Method::TwoVarBidiag};
    const std::vector<ErrorReport> seq = benchmark(sizes, methods, 5);
    const std::vector<ErrorReport> par = benchmark(sizes, methods, 5, {}, 1e-12, 0, 2);
    REQUIRE(seq.size() == par.size());
    for (std::size_t j = 0; j < seq.size(); ++j) {
        CHECK(seq[j].err1 == par[j].err1);
        CHECK(seq[j].err2 == par[j].err2);
    }
}

TEST_CASE("identical datasets have all-zero angular profiles") {
    const Matrix a = gt::random_complex(15, 6, 77);
    const GrassmanPair pair = validate_gmp(a, a);
    const ComparisonReport rep = compare_datasets(pair, pair);
    for (const auto& [i, th] : rep.first.theta) CHECK(std::abs(th) <= 1e-8);
    REQUIRE(rep.first.equal_significance_index.has_value());
    REQUIRE(rep.second.equal_significance_index.has_value());
    CHECK(*rep.first.equal_significance_index == *rep.second.equal_significance_index);
}

TEST_CASE("comparison finds the planted equal-significance genelet") {
    // Gene-expression-like shape: many rows, few arrays.
    const PlantedGmp ds1 = generate_random_gmp(60, 60, 12, 101);
    const PlantedGmp ds2 = generate_random_gmp(60, 60, 12, 102);
    const ComparisonReport rep = compare_datasets(ds1.pair, ds2.pair, {}, "one", "two");

    for (const auto* cmp : {&rep.first, &rep.second}) {
        const GsvSpectrum oracle =
            dense_gsv_oracle(cmp == &rep.first ? ds1.pair : ds2.pair);
        double best = std::numeric_limits<double>::infinity();
        Index best_i = 0;
        for (const auto& gp : oracle.pairs) {
            const double th = std::abs(angular_distance(gp));
            if (th <= best) {
                best = th;
                best_i = gp.index;
            }
        }
        REQUIRE(cmp->equal_significance_index.has_value());
        CHECK(*cmp->equal_significance_index == best_i);
        // Cost bound: at most 2 (indices past the crossing + 2) solves.
        Index past = 0;
        for (const auto& [i, gp] : cmp->pairs)
            if (i > *cmp->equal_significance_index) ++past;
        CHECK(cmp->stats.solves <= 2 * (past + 2));
        CHECK_FALSE(cmp->filters_touched.empty());
    }
}

TEST_CASE("swapping the matrices reverses and negates the profile") {
    const PlantedGmp planted = generate_random_gmp(40, 40, 10, 55);
    GrassmanPair swapped;
    swapped.a = planted.pair.b;
    swapped.b = planted.pair.a;
    swapped.m = planted.pair.p;
    swapped.p = planted.pair.m;
    swapped.n = planted.pair.n;

    // Dense profiles: theta'(i) = -theta(n + 1 - i) and the equal-significance
    // genelet is the same physical direction under the reversed ordering.
    const GsvSpectrum direct = dense_gsv_oracle(planted.pair);
    const GsvSpectrum reversed = dense_gsv_oracle(swapped);
    const Index n = planted.pair.n;
    for (Index i = 1; i <= n; ++i) {
        const double th = angular_distance(direct.pairs[static_cast<std::size_t>(i - 1)]);
        const double th_rev =
            angular_distance(reversed.pairs[static_cast<std::size_t>(n - i)]);
        CHECK(std::abs(th + th_rev) <= 1e-10);
    }

    const ComparisonReport fwd = compare_datasets(planted.pair, planted.pair);
    const ComparisonReport bwd = compare_datasets(swapped, swapped);
    REQUIRE(fwd.first.equal_significance_index.has_value());
    REQUIRE(bwd.first.equal_significance_index.has_value());
    CHECK(*bwd.first.equal_significance_index ==
          n + 1 - *fwd.first.equal_significance_index);
}

TEST_CASE("comparison rejects mismatched column counts") {
    const GrassmanPair a = gt::random_pair(10, 9, 4, 1);
    const GrassmanPair b = gt::random_pair(10, 9, 5, 2);
    CHECK_THROWS_AS(compare_datasets(a, b), DimensionMismatch);
}
