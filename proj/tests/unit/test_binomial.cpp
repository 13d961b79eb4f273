#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "oracle.hpp"
#include "qsafe/binomial.hpp"

using namespace qsafe;

namespace {

ConfidenceLevel cl(double value) { return ConfidenceLevel(value); }

} // namespace

TEST_CASE("probability and confidence reject out-of-range values") {
    CHECK_THROWS_AS(Probability(-0.1), std::domain_error);
    CHECK_THROWS_AS(Probability(1.5), std::domain_error);
    CHECK_THROWS_AS(Probability(std::nan("")), std::domain_error);
    CHECK_NOTHROW(Probability(0.0));
    CHECK_NOTHROW(Probability(1.0));
    CHECK_THROWS_AS(ConfidenceLevel(0.0), std::domain_error);
    CHECK_THROWS_AS(ConfidenceLevel(1.0), std::domain_error);
    CHECK(ConfidenceLevel(0.95).alpha() == doctest::Approx(0.05));
}

TEST_CASE("binom_cdf examples") {
    CHECK(binom_cdf(20, 20, Probability(0.3)) == 1.0);
    CHECK(binom_cdf(0, 10, Probability(0.1)) == doctest::Approx(std::pow(0.9, 10)).epsilon(1e-13));
    // 16 of the 32 equally likely outcomes have at most 2 successes.
    CHECK(binom_cdf(2, 5, Probability(0.5)) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK_THROWS_AS((void)binom_cdf(11, 10, Probability(0.5)), std::invalid_argument);
    CHECK_THROWS_AS((void)binom_cdf(0, 0, Probability(0.5)), std::invalid_argument);
}

TEST_CASE("binom_cdf agrees with the brute-force oracle") {
    const double ps[] = {1e-6, 0.001, 0.013, 0.2, 0.5, 0.77, 0.999};
    for (Count n = 1; n <= 120; n += 7) {
        for (Count k = 0; k <= n; ++k) {
            for (const double p : ps) {
                const long double expected = oracle::cdf(k, n, p);
                if (expected < 1e-300L) continue;
                const double got = binom_cdf(k, n, Probability(p));
                INFO("k=" << k << " n=" << n << " p=" << p);
                CHECK(std::fabs(got - static_cast<double>(expected)) <= 1e-10 * static_cast<double>(expected));
            }
        }
    }
}

TEST_CASE("binom_cdf at the worked-example scale matches frozen reference values") {
    // Reference: scipy.stats.binom.cdf.
    CHECK(binom_cdf(149, 100000, Probability(0.002)) == doctest::Approx(9.547055082732282e-05).epsilon(1e-10));
    CHECK(binom_cdf(64, 100000, Probability(0.001)) == doctest::Approx(7.751748058219486e-05).epsilon(1e-10));
    CHECK(binom_cdf(130, 100000, Probability(0.0015)) == doctest::Approx(0.05305304809146107).epsilon(1e-10));
}

TEST_CASE("cp_upper examples") {
    CHECK(cp_upper(0, 10, cl(0.95)) == doctest::Approx(1.0 - std::pow(0.05, 0.1)).epsilon(1e-12));
    CHECK(cp_upper(148, 100000, cl(0.9999)) <= 0.002);
    CHECK(cp_upper(50, 50, cl(0.99)) == 1.0);
}

TEST_CASE("cp_upper matches frozen reference values at n = 100000") {
    // Reference: scipy.stats.beta.ppf(cl, k + 1, n - k).
    const ConfidenceLevel c = cl(0.9999);
    CHECK(cp_upper(149, 100000, c) == doctest::Approx(0.0019982711074854206).epsilon(1e-11));
    CHECK(cp_upper(150, 100000, c) == doctest::Approx(0.0020097808362245615).epsilon(1e-11));
    CHECK(cp_upper(64, 100000, c) == doctest::Approx(0.0009931908827269357).epsilon(1e-11));
    CHECK(cp_upper(65, 100000, c) == doctest::Approx(0.0010054802288946326).epsilon(1e-11));
    CHECK(cp_upper(130, 100000, c) == doctest::Approx(0.0017785629088164195).epsilon(1e-11));
    CHECK(cp_upper(200, 100000, c) == doctest::Approx(0.002579741794395299).epsilon(1e-11));
}

TEST_CASE("cp_lower examples") {
    const double l = cp_lower(85, 200, cl(0.9999));
    CHECK(l == doctest::Approx(0.2985595682107503).epsilon(1e-11));
    CHECK(l >= 0.29);
    CHECK(l <= 0.31);
    CHECK(cp_lower(85, 200, cl(0.99995)) == doctest::Approx(0.2932086303020036).epsilon(1e-11));
    CHECK(cp_lower(0, 100, cl(0.9)) == 0.0);
    CHECK(cp_lower(10, 10, cl(0.95)) == doctest::Approx(std::pow(0.05, 0.1)).epsilon(1e-12));
}

TEST_CASE("cp_upper root is consistent with the oracle CDF") {
    for (const double c : {0.9, 0.99, 0.9999}) {
        for (Count n = 1; n <= 50; ++n) {
            for (Count k = 0; k < n; ++k) {
                const double u = cp_upper(k, n, cl(c));
                const long double at_root = oracle::cdf(k, n, u);
                INFO("k=" << k << " n=" << n << " cl=" << c);
                CHECK(std::fabs(static_cast<double>(at_root) - (1.0 - c)) <= 1e-9);
                CHECK(std::fabs(u - static_cast<double>(oracle::cp_upper(k, n, c))) <= 1e-12);
            }
        }
    }
}

TEST_CASE("duality of cp_lower and cp_upper for n <= 200") {
    for (const double c : {0.9, 0.99, 0.9999}) {
        for (Count n = 1; n <= 200; ++n) {
            for (Count k = 0; k <= n; ++k) {
                const double lower = cp_lower(k, n, cl(c));
                const double upper = cp_upper(n - k, n, cl(c));
                if (std::fabs(lower - (1.0 - upper)) > 1e-12) {
                    FAIL("duality k=" << k << " n=" << n << " cl=" << c << " lower=" << lower
                                      << " 1-upper=" << 1.0 - upper);
                }
            }
        }
    }
}

TEST_CASE("cp bounds are monotone") {
    SUBCASE("strictly increasing in k") {
        for (Count k = 0; k + 1 < 300; ++k) {
            CHECK(cp_upper(k, 300, cl(0.99)) < cp_upper(k + 1, 300, cl(0.99)));
            CHECK(cp_lower(k, 300, cl(0.99)) < cp_lower(k + 1, 300, cl(0.99)));
        }
    }
    SUBCASE("non-increasing upper and non-decreasing lower in n") {
        for (Count n = 5; n < 400; ++n) {
            CHECK(cp_upper(5, n + 1, cl(0.95)) <= cp_upper(5, n, cl(0.95)));
            CHECK(cp_lower(5, n + 1, cl(0.95)) <= cp_lower(5, n, cl(0.95)));
        }
    }
    SUBCASE("strictly increasing in cl for the upper bound, decreasing for the lower") {
        double previous_upper = 0.0;
        double previous_lower = 1.0;
        for (const double c : {0.5, 0.8, 0.9, 0.95, 0.99, 0.999, 0.9999, 0.99999}) {
            const double upper = cp_upper(12, 1000, cl(c));
            const double lower = cp_lower(12, 1000, cl(c));
            CHECK(upper > previous_upper);
            CHECK(lower < previous_lower);
            previous_upper = upper;
            previous_lower = lower;
        }
    }
}

TEST_CASE("max_acceptable_failures examples") {
    CHECK(max_acceptable_failures(100000, cl(0.9999), Probability(0.002)) == Count{149});
    CHECK(max_acceptable_failures(100000, cl(0.9999), Probability(0.001)) == Count{64});
    CHECK_FALSE(max_acceptable_failures(10, cl(0.9999), Probability(1e-6)).has_value());
    CHECK_THROWS_AS((void)max_acceptable_failures(10, cl(0.9), Probability(0.0)), std::invalid_argument);
}

TEST_CASE("max_acceptable_failures brackets the threshold") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        const Count n = std::uniform_int_distribution<Count>(1, 200000)(rng);
        const double c = std::uniform_real_distribution<double>(0.5, 0.9999)(rng);
        const double t = std::exp(std::uniform_real_distribution<double>(std::log(1e-5), std::log(0.9))(rng));
        const auto k = max_acceptable_failures(n, cl(c), Probability(t));
        INFO("n=" << n << " cl=" << c << " t=" << t);
        if (!k) {
            CHECK(cp_upper(0, n, cl(c)) > t);
            continue;
        }
        CHECK(cp_upper(*k, n, cl(c)) <= t);
        if (*k < n) CHECK(cp_upper(*k + 1, n, cl(c)) > t);
    }
}

TEST_CASE("min_sample_size examples") {
    CHECK(min_sample_size(Probability(0.0), cl(0.95), Probability(0.01)) == Count{299});
    CHECK(1.0 - std::pow(0.05, 1.0 / 299) <= 0.01);
    CHECK(1.0 - std::pow(0.05, 1.0 / 298) > 0.01);
    CHECK_FALSE(min_sample_size(Probability(0.002), cl(0.9999), Probability(0.002)).has_value());

    const auto n = min_sample_size(Probability(0.0013), cl(0.9999), Probability(0.002));
    REQUIRE(n.has_value());
    CHECK(cp_upper(expected_count(Probability(0.0013), *n), *n, cl(0.9999)) <= 0.002);
    CHECK(cp_upper(expected_count(Probability(0.0013), *n - 1), *n - 1, cl(0.9999)) > 0.002);
}

TEST_CASE("min_sample_size respects the cap") {
    CHECK_FALSE(min_sample_size(Probability(0.0), cl(0.95), Probability(0.01), 100).has_value());
    CHECK(min_sample_size(Probability(0.0), cl(0.95), Probability(0.01), 299) == Count{299});
}

TEST_CASE("approximate intervals are flagged as non-conservative") {
    CHECK(is_conservative(IntervalMethod::ClopperPearson));
    CHECK_FALSE(is_conservative(IntervalMethod::Wilson));
    CHECK_FALSE(is_conservative(IntervalMethod::Normal));
    CHECK(interval_method_from_string("wald") == IntervalMethod::Normal);
    CHECK_FALSE(interval_method_from_string("beta").has_value());
}

TEST_CASE("approximate intervals behave sensibly") {
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-10));
    for (Count k : {0u, 3u, 50u, 99u}) {
        const double w_hi = wilson_upper(k, 100, cl(0.95));
        const double w_lo = wilson_lower(k, 100, cl(0.95));
        CHECK(w_lo <= static_cast<double>(k) / 100.0);
        CHECK(w_hi >= static_cast<double>(k) / 100.0);
        CHECK(normal_upper(k, 100, cl(0.95)) <= 1.0);
        CHECK(normal_lower(k, 100, cl(0.95)) >= 0.0);
    }
    // The exact interval is wider than Wilson for small counts.
    CHECK(cp_upper(2, 100, cl(0.95)) > wilson_upper(2, 100, cl(0.95)));
}
