#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "urabound/sysmodel.hpp"

using namespace urabound;
using sysmodel::SystemConfig;

namespace {

SystemConfig desk_config() {
    SystemConfig c;
    c.ka = 4;
    c.n = 16;
    c.k = 8;
    c.p = 1.2;
    c.p_prime = 1.0;
    c.eps_target = 1e-2;
    return c;
}

}  // namespace

TEST_CASE("Eb/N0 conversion round trip and worked values") {
    for (double db : {-3.0, 0.0, 1.7, 6.25}) {
        const double p = sysmodel::ebn0_db_to_power(db, 30000, 100);
        CHECK(sysmodel::power_to_ebn0_db(p, 30000, 100) == doctest::Approx(db).epsilon(1e-12));
    }
    CHECK(sysmodel::ebn0_db_to_power(0.0, 30000, 100) ==
          doctest::Approx(2.0 * 100.0 / 30000.0).epsilon(1e-12));
    CHECK(sysmodel::power_to_ebn0_db(0.01, 30000, 100) ==
          doctest::Approx(10.0 * std::log10(1.5)).epsilon(1e-12));
}

TEST_CASE("config validation") {
    auto c = desk_config();
    CHECK_NOTHROW(c.validate());
    c.p_prime = c.p;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = desk_config();
    c.eps_target = 1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = desk_config();
    c.ka = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("channel sample is the exact sum of its parts") {
    auto c = desk_config();
    for (std::uint64_t idx = 0; idx < 32; ++idx) {
        const auto s = sysmodel::sample_channel_output(c, 7, idx);
        for (std::size_t j = 0; j < c.n; ++j) {
            // Same assembly order as the sampler: codewords, then noise.
            double sum = 0.0;
            for (const auto& cw : s.codewords) sum += cw[j];
            sum += s.noise[j];
            CHECK(s.y[j] == sum);
        }
    }
}

TEST_CASE("channel sample reproducibility") {
    auto c = desk_config();
    const auto a = sysmodel::sample_channel_output(c, 42, 3);
    const auto b = sysmodel::sample_channel_output(c, 42, 3);
    CHECK(a.y == b.y);
    CHECK(a.noise == b.noise);
    CHECK(a.codewords == b.codewords);
    const auto other = sysmodel::sample_channel_output(c, 43, 3);
    CHECK(a.y != other.y);
}

TEST_CASE("degenerate ka = 0 leaves pure noise") {
    auto c = desk_config();
    c.ka = 0;
    c.n = 8;
    std::vector<double> pool;
    for (std::uint64_t idx = 0; idx < 12500; ++idx) {
        const auto s = sysmodel::sample_channel_output(c, 5, idx);
        CHECK(s.y == s.noise);
        pool.insert(pool.end(), s.y.begin(), s.y.end());
    }
    // 1e5 values; variance 1 within 3 standard errors (se ~ sqrt(2/N)).
    const double v = testutil::variance(pool);
    CHECK(std::fabs(v - 1.0) <= 3.0 * std::sqrt(2.0 / static_cast<double>(pool.size())));
}

TEST_CASE("per-dimension variance of y matches 1 + ka p'") {
    auto c = desk_config();
    c.ka = 4;
    c.p_prime = 1.0;
    c.p = 1.2;
    c.n = 8;
    std::vector<double> pool;
    for (std::uint64_t idx = 0; idx < 12500; ++idx) {
        const auto s = sysmodel::sample_channel_output(c, 11, idx);
        pool.insert(pool.end(), s.y.begin(), s.y.end());
    }
    const double expected = 1.0 + c.ka_p_prime();
    const double se = expected * std::sqrt(2.0 / static_cast<double>(pool.size()));
    CHECK(std::fabs(testutil::variance(pool) - expected) <= 3.0 * se);
}

TEST_CASE("marginal sampler moments") {
    auto c = desk_config();
    c.n = 16;
    const auto draws = sysmodel::sample_y_marginal(c, 6000, 9);
    CHECK(draws.size() == 6000);
    CHECK(draws.front().size() == c.n);
    std::vector<double> pool;
    for (const auto& d : draws) pool.insert(pool.end(), d.begin(), d.end());
    const double expected = c.y_variance();
    const double n_tot = static_cast<double>(pool.size());
    CHECK(std::fabs(testutil::mean(pool)) <= 3.0 * std::sqrt(expected / n_tot));
    CHECK(std::fabs(testutil::variance(pool) - expected) <=
          3.0 * expected * std::sqrt(2.0 / n_tot));

    const auto one = sysmodel::sample_y_marginal(c, 1, 9);
    CHECK(one.size() == 1);
    CHECK(one.front().size() == c.n);
    CHECK(one.front() == draws.front());
}

TEST_CASE("marginal of summed channel agrees with the direct marginal (KS)") {
    auto c = desk_config();
    c.n = 4;
    std::vector<double> from_channel, direct;
    for (std::uint64_t idx = 0; idx < 2500; ++idx) {
        const auto s = sysmodel::sample_channel_output(c, 21, idx);
        from_channel.insert(from_channel.end(), s.y.begin(), s.y.end());
        const auto m = sysmodel::sample_y_marginal_one(c, 22, idx);
        direct.insert(direct.end(), m.begin(), m.end());
    }
    CHECK(testutil::ks_two_sample_pass(from_channel, direct));
}
