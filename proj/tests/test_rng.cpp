#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <vector>

#include "augbagg/rng.hpp"
#include "augbagg/stats.hpp"

using namespace augbagg;

TEST_CASE("same seed reproduces the stream", "[rng]") {
    Rng a(12345), b(12345);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("derive_seed is order-free and stream-separating", "[rng]") {
    const std::uint64_t s1 = derive_seed(7, 0);
    const std::uint64_t s2 = derive_seed(7, 1);
    REQUIRE(s1 != s2);
    REQUIRE(derive_seed(7, 0) == s1); // pure function of (seed, stream)
    REQUIRE(derive_seed(7, 1, 2) == derive_seed(derive_seed(7, 1), 2));

    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(derive_seed(99, i));
    REQUIRE(seen.size() == 10000);
}

TEST_CASE("uniform stays in [0,1) and looks uniform", "[rng]") {
    Rng rng(3);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    REQUIRE_THAT(sum / 100000, Catch::Matchers::WithinAbs(0.5, 0.005));
}

TEST_CASE("normal has the right first two moments", "[rng]") {
    Rng rng(4);
    std::vector<double> draws(200000);
    for (auto& d : draws) d = rng.normal();
    REQUIRE_THAT(mean(draws), Catch::Matchers::WithinAbs(0.0, 0.01));
    REQUIRE_THAT(sample_variance(draws), Catch::Matchers::WithinAbs(1.0, 0.02));
}

TEST_CASE("uniform_index is in range and unbiased-ish", "[rng]") {
    Rng rng(5);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 70000; ++i) {
        const auto k = rng.uniform_index(7);
        REQUIRE(k < 7);
        counts[static_cast<std::size_t>(k)]++;
    }
    for (int c : counts) REQUIRE_THAT(static_cast<double>(c) / 70000, Catch::Matchers::WithinAbs(1.0 / 7, 0.01));
    REQUIRE_THROWS_AS(rng.uniform_index(0), argument_error);
}

TEST_CASE("sample_without_replacement returns k distinct sorted indices", "[rng]") {
    Rng rng(6);
    for (int trial = 0; trial < 200; ++trial) {
        const auto sample = rng.sample_without_replacement(10, 4);
        REQUIRE(sample.size() == 4);
        for (std::size_t i = 0; i + 1 < sample.size(); ++i) REQUIRE(sample[i] < sample[i + 1]);
        for (int v : sample) {
            REQUIRE(v >= 0);
            REQUIRE(v < 10);
        }
    }
    REQUIRE_THROWS_AS(rng.sample_without_replacement(3, 4), argument_error);

    // marginal inclusion probability k/n
    Rng rng2(7);
    int hits = 0;
    const int trials = 40000;
    for (int trial = 0; trial < trials; ++trial) {
        const auto sample = rng2.sample_without_replacement(8, 3);
        for (int v : sample) {
            if (v == 0) ++hits;
        }
    }
    REQUIRE_THAT(static_cast<double>(hits) / trials, Catch::Matchers::WithinAbs(3.0 / 8, 0.01));
}

TEST_CASE("shuffle produces a permutation", "[rng]") {
    Rng rng(8);
    std::vector<int> values{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    rng.shuffle(values);
    std::vector<int> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 10; ++i) REQUIRE(sorted[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("binomial helpers agree with hand values", "[rng]") {
    // P(X <= 1), X ~ Bin(3, 0.5): (1 + 3)/8
    REQUIRE_THAT(binomial_cdf(1, 3, 0.5), Catch::Matchers::WithinAbs(0.5, 1e-12));
    REQUIRE_THAT(binomial_upper_tail(2, 3, 0.5), Catch::Matchers::WithinAbs(0.5, 1e-12));
    REQUIRE_THAT(sign_test_pvalue(3, 3), Catch::Matchers::WithinAbs(0.125, 1e-12));

    const auto [lo, hi] = binomial_count_interval(200, 0.05, 0.99);
    REQUIRE(lo >= 2);
    REQUIRE(hi <= 21);
    REQUIRE(lo < hi);
    // central interval mass is at least the confidence level
    double mass = 0.0;
    const auto pmf = binomial_pmf_table(200, 0.05);
    for (int k = lo; k <= hi; ++k) mass += pmf[static_cast<std::size_t>(k)];
    REQUIRE(mass >= 0.99);

    const auto [cl, ch] = clopper_pearson(10, 200, 0.99);
    REQUIRE(cl > 0.0);
    REQUIRE(ch < 1.0);
    REQUIRE(cl < 0.05);
    REQUIRE(ch > 0.05);
}

TEST_CASE("normal_cdf matches reference values", "[rng]") {
    REQUIRE_THAT(normal_cdf(0.0), Catch::Matchers::WithinAbs(0.5, 1e-12));
    REQUIRE_THAT(normal_cdf(1.96), Catch::Matchers::WithinAbs(0.9750021048517795, 1e-10));
    REQUIRE_THAT(normal_cdf(-1.6448536269514722), Catch::Matchers::WithinAbs(0.05, 1e-10));
}
