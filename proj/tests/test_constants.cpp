#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "urabound/constants.hpp"
#include "urabound/rng.hpp"

using namespace urabound;
using namespace urabound::constants;

namespace {

sysmodel::SystemConfig config_sigma2(std::uint32_t n, double sigma2) {
    // ka p' chosen so 1 + ka p' equals the requested variance.
    sysmodel::SystemConfig c;
    c.ka = 4;
    c.n = n;
    c.k = 8;
    c.p_prime = (sigma2 - 1.0) / 4.0;
    c.p = c.p_prime * 1.25;
    return c;
}

}  // namespace

TEST_CASE("v_star arithmetic") {
    CHECK(v_star(0.0, 0.0) == 1.0);
    CHECK(v_star(0.2, 0.0) == doctest::Approx(1.2).epsilon(1e-15));
    CHECK(v_star(0.2, 0.5) == doctest::Approx(1.45).epsilon(1e-15));
    CHECK_THROWS_AS(v_star(-0.1, 0.0), std::domain_error);
    CHECK_THROWS_AS(v_star(0.0, -0.1), std::domain_error);
}

TEST_CASE("rank-1 second moment") {
    // All vectors equal a * e1: top eigenvalue a^2.
    std::vector<std::vector<double>> vecs(16, std::vector<double>(5, 0.0));
    for (auto& v : vecs) v[0] = 3.0;
    CHECK(top_eigenvalue_second_moment(vecs, false, 100, 1) ==
          doctest::Approx(9.0).epsilon(1e-9));

    // All-zero vectors: 0, not an error.
    std::vector<std::vector<double>> zeros(8, std::vector<double>(5, 0.0));
    CHECK(top_eigenvalue_second_moment(zeros, false, 100, 1) == 0.0);
}

TEST_CASE("two-point residuals give K_E = a") {
    // Residuals +/- a e1 with equal frequency: centered covariance a^2.
    std::vector<std::vector<double>> vecs(10, std::vector<double>(4, 0.0));
    for (std::size_t i = 0; i < vecs.size(); ++i) vecs[i][0] = (i % 2 == 0) ? 2.5 : -2.5;
    const double lam = top_eigenvalue_second_moment(vecs, true, 100, 3);
    CHECK(std::sqrt(lam) == doctest::Approx(2.5).epsilon(1e-9));

    // Centering removes constants.
    for (auto& v : vecs) v[1] += 7.0;
    const double lam2 = top_eigenvalue_second_moment(vecs, true, 100, 3);
    CHECK(std::sqrt(lam2) == doctest::Approx(2.5).epsilon(1e-9));
}

TEST_CASE("power iteration agrees with a dense eigensolver oracle") {
    for (std::uint32_t trial = 0; trial < 5; ++trial) {
        const std::size_t n = 24, count = 200;
        std::vector<std::vector<double>> vecs(count, std::vector<double>(n));
        Rng rng(100 + trial, 0x5A, 0);
        for (auto& v : vecs)
            for (auto& x : v) x = rng.next_gaussian() * (1.0 + 0.5 * rng.next_unit());

        std::vector<double> moment(n * n, 0.0);
        for (const auto& v : vecs)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) moment[i * n + j] += v[i] * v[j];
        for (auto& m : moment) m /= static_cast<double>(count);

        const double oracle = testutil::jacobi_top_eigenvalue(moment, n);
        const double got = top_eigenvalue_second_moment(vecs, false, 500, 7 + trial);
        CHECK(std::fabs(got - oracle) <= 1e-6 * std::max(1.0, std::fabs(oracle)));
    }
}

TEST_CASE("monotonicity: reinforcing the top direction never lowers the estimate") {
    const std::size_t n = 8;
    std::vector<std::vector<double>> vecs(64, std::vector<double>(n));
    Rng rng(17, 0x5B, 0);
    for (auto& v : vecs)
        for (auto& x : v) x = rng.next_gaussian();
    const double base = top_eigenvalue_second_moment(vecs, false, 400, 5);

    // Recover (a scaled copy of) the top eigenvector by one extra pass.
    std::vector<double> moment(n * n, 0.0);
    for (const auto& v : vecs)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) moment[i * n + j] += v[i] * v[j];
    // Power-iterate the dense moment to get the direction.
    std::vector<double> dir(n, 1.0);
    for (int it = 0; it < 200; ++it) {
        std::vector<double> next(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) next[i] += moment[i * n + j] * dir[j];
        double norm = 0.0;
        for (double x : next) norm += x * x;
        norm = std::sqrt(norm);
        for (std::size_t i = 0; i < n; ++i) dir[i] = next[i] / norm;
    }
    const double scale = std::sqrt(base * static_cast<double>(vecs.size() + 1));
    std::vector<double> extra(n);
    for (std::size_t i = 0; i < n; ++i) extra[i] = scale * dir[i];
    vecs.push_back(extra);
    const double grown = top_eigenvalue_second_moment(vecs, false, 400, 5);
    CHECK(grown >= base - 1e-12);
}

TEST_CASE("analytic score J* estimate at sigma^2 = 5") {
    const auto cfg = config_sigma2(64, 5.0);
    const auto model = diffusion::ScoreModel::analytic(64, 5.0);
    EstimateOptions opts;
    opts.n_samples = 100000;
    opts.seed = 3;
    const double j = estimate_J(model, cfg, opts);
    CHECK(std::fabs(j - 0.2) <= 0.05 * 0.2);
}

TEST_CASE("J estimate is invariant to worker count") {
    const auto cfg = config_sigma2(16, 3.0);
    const auto model = diffusion::ScoreModel::analytic(16, 3.0);
    EstimateOptions a;
    a.n_samples = 5000;
    a.seed = 9;
    a.threads = 1;
    EstimateOptions b = a;
    b.threads = 4;
    CHECK(estimate_J(model, cfg, a) == estimate_J(model, cfg, b));

    // Streaming regeneration matches the cached path bit for bit.
    EstimateOptions c = a;
    c.cache_budget_doubles = 0;
    CHECK(estimate_J(model, cfg, a) == estimate_J(model, cfg, c));
}

TEST_CASE("zero score model gives {0, 0, 1}") {
    const auto cfg = config_sigma2(12, 2.0);
    const auto model =
        diffusion::ScoreModel::linear(12, 0.0, std::vector<double>(12, 0.0), 1, 0.5);
    EstimateOptions opts;
    opts.n_samples = 2000;
    opts.seed = 5;
    const auto c = estimate_constants(model, cfg, opts);
    CHECK(c.j_star == 0.0);
    CHECK(c.k_e == 0.0);
    CHECK(c.v_star == 1.0);
}

TEST_CASE("self-consistent denoiser has zero mismatch") {
    const auto cfg = config_sigma2(12, 5.0);
    const auto model = diffusion::ScoreModel::analytic(12, 5.0);
    EstimateOptions opts;
    opts.n_samples = 2000;
    opts.seed = 6;

    // D built as y + s from the same model.
    const double ke = estimate_K_E(
        [&](const std::vector<double>& y) { return diffusion::denoise(model, y); }, model, cfg,
        opts);
    CHECK(ke <= 1e-12);

    // Constant offset is removed by centering.
    const double ke_offset = estimate_K_E(
        [&](const std::vector<double>& y) {
            auto d = diffusion::denoise(model, y);
            for (auto& v : d) v += 3.25;
            return d;
        },
        model, cfg, opts);
    CHECK(ke_offset <= 1e-9);

    // A denoiser that deviates linearly from the score rule is detected.
    const double ke_bad = estimate_K_E(
        [&](const std::vector<double>& y) {
            auto d = diffusion::denoise(model, y);
            for (auto& v : d) v *= 1.1;
            return d;
        },
        model, cfg, opts);
    CHECK(ke_bad > 0.01);
}

TEST_CASE("K_E eigenvalue convention switch") {
    const auto cfg = config_sigma2(8, 4.0);
    const auto model = diffusion::ScoreModel::analytic(8, 4.0);
    EstimateOptions opts;
    opts.n_samples = 1500;
    opts.seed = 8;
    auto bad = [&](const std::vector<double>& y) {
        auto d = diffusion::denoise(model, y);
        for (auto& v : d) v *= 1.2;
        return d;
    };
    const double ke_sqrt = estimate_K_E(bad, model, cfg, opts);
    opts.k_e_as_eigenvalue = true;
    const double ke_eig = estimate_K_E(bad, model, cfg, opts);
    CHECK(ke_eig == doctest::Approx(ke_sqrt * ke_sqrt).epsilon(1e-9));
}

TEST_CASE("estimate option validation") {
    const auto cfg = config_sigma2(8, 2.0);
    const auto model = diffusion::ScoreModel::analytic(8, 2.0);
    EstimateOptions opts;
    opts.n_samples = 1;
    CHECK_THROWS_AS(estimate_J(model, cfg, opts), std::invalid_argument);
    CHECK_THROWS_AS(estimate_K_E(model, cfg, opts), std::invalid_argument);
    const auto small = diffusion::ScoreModel::analytic(4, 2.0);
    opts.n_samples = 100;
    CHECK_THROWS_AS(estimate_J(small, cfg, opts), std::invalid_argument);
}
