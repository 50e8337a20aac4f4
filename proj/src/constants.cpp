#include "urabound/constants.hpp"

#include <cmath>
#include <stdexcept>

#include "urabound/parallel.hpp"
#include "urabound/rng.hpp"

namespace urabound::constants {

namespace {

constexpr std::size_t kChunk = 1024;  // fixed; keeps reductions schedule-independent

// Power iteration on A v = (1/N) sum_k g_k (g_k . v), where produce(k) yields
// g_k (possibly recomputed every pass). Deterministic: chunk partial sums are
// reduced in chunk order.
double power_iteration(std::size_t count, std::size_t dim, std::uint32_t max_iters,
                       std::uint64_t seed, unsigned threads,
                       const std::function<void(std::size_t, std::vector<double>&)>& produce) {
    if (count < 2) throw std::invalid_argument("power iteration: need at least 2 samples");
    if (max_iters < 1) throw std::invalid_argument("power iteration: iters must be >= 1");

    std::vector<double> v(dim);
    Rng rng(seed, stream_tag::kPowerIter, 0);
    for (auto& x : v) x = rng.next_gaussian();
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;

    const std::size_t n_chunks = (count + kChunk - 1) / kChunk;
    std::vector<std::vector<double>> partial(n_chunks);
    const double inv_n = 1.0 / static_cast<double>(count);

    double lambda_prev = 0.0;
    for (std::uint32_t it = 0; it < max_iters; ++it) {
        parallel_chunks(count, kChunk, threads, [&](std::size_t c, std::size_t b, std::size_t e) {
            auto& acc = partial[c];
            acc.assign(dim, 0.0);
            std::vector<double> g(dim);
            for (std::size_t k = b; k < e; ++k) {
                produce(k, g);
                double dot = 0.0;
                for (std::size_t j = 0; j < dim; ++j) dot += g[j] * v[j];
                for (std::size_t j = 0; j < dim; ++j) acc[j] += g[j] * dot;
            }
        });
        std::vector<double> w(dim, 0.0);
        for (std::size_t c = 0; c < n_chunks; ++c)
            for (std::size_t j = 0; j < dim; ++j) w[j] += partial[c][j];
        for (auto& x : w) x *= inv_n;

        double lambda = 0.0;
        for (std::size_t j = 0; j < dim; ++j) lambda += v[j] * w[j];
        double wnorm = 0.0;
        for (double x : w) wnorm += x * x;
        wnorm = std::sqrt(wnorm);
        if (wnorm == 0.0) return 0.0;  // all samples zero (or orthogonal collapse)
        for (std::size_t j = 0; j < dim; ++j) v[j] = w[j] / wnorm;

        if (it > 0 && std::fabs(lambda - lambda_prev) <= 1e-9 * std::max(1.0, std::fabs(lambda)))
            return lambda;
        lambda_prev = lambda;
    }
    return lambda_prev;
}

}  // namespace

double v_star(double j_star, double k_e) {
    if (j_star < 0.0 || k_e < 0.0) throw std::domain_error("v_star: inputs must be >= 0");
    return 1.0 + j_star + k_e * k_e;
}

double top_eigenvalue_second_moment(const std::vector<std::vector<double>>& vectors, bool center,
                                    std::uint32_t max_iters, std::uint64_t seed) {
    if (vectors.size() < 2) throw std::invalid_argument("top_eigenvalue: need >= 2 vectors");
    const std::size_t dim = vectors.front().size();
    std::vector<double> mean(dim, 0.0);
    if (center) {
        for (const auto& r : vectors)
            for (std::size_t j = 0; j < dim; ++j) mean[j] += r[j];
        for (auto& m : mean) m /= static_cast<double>(vectors.size());
    }
    return power_iteration(vectors.size(), dim, max_iters, seed, 1,
                           [&](std::size_t k, std::vector<double>& g) {
                               for (std::size_t j = 0; j < dim; ++j)
                                   g[j] = vectors[k][j] - mean[j];
                           });
}

double estimate_J(const diffusion::ScoreModel& model, const sysmodel::SystemConfig& config,
                  const EstimateOptions& opts) {
    if (opts.n_samples < 2) throw std::invalid_argument("estimate_J: need N >= 2");
    if (model.n != config.n) throw std::invalid_argument("estimate_J: model/config dim mismatch");
    const std::size_t n = config.n;

    const bool cached = opts.n_samples * n <= opts.cache_budget_doubles;
    if (cached) {
        std::vector<std::vector<double>> scores(opts.n_samples);
        parallel_chunks(opts.n_samples, kChunk, opts.threads,
                        [&](std::size_t, std::size_t b, std::size_t e) {
                            for (std::size_t k = b; k < e; ++k)
                                scores[k] = diffusion::score(
                                    model, sysmodel::sample_y_marginal_one(config, opts.seed, k));
                        });
        return power_iteration(opts.n_samples, n, opts.max_iters, opts.seed, opts.threads,
                               [&](std::size_t k, std::vector<double>& g) { g = scores[k]; });
    }
    return power_iteration(opts.n_samples, n, opts.max_iters, opts.seed, opts.threads,
                           [&](std::size_t k, std::vector<double>& g) {
                               g = diffusion::score(
                                   model, sysmodel::sample_y_marginal_one(config, opts.seed, k));
                           });
}

double estimate_K_E(const diffusion::DenoiserFn& denoiser, const diffusion::ScoreModel& model,
                    const sysmodel::SystemConfig& config, const EstimateOptions& opts) {
    if (opts.n_samples < 2) throw std::invalid_argument("estimate_K_E: need N >= 2");
    if (model.n != config.n) throw std::invalid_argument("estimate_K_E: model/config dim mismatch");
    const std::size_t n = config.n;

    auto residual = [&](std::size_t k) {
        const auto y = sysmodel::sample_y_marginal_one(config, opts.seed, k);
        auto d = denoiser(y);
        const auto s = diffusion::score(model, y);
        for (std::size_t j = 0; j < n; ++j) d[j] -= y[j] + s[j];
        return d;
    };

    const bool cached = opts.n_samples * n <= opts.cache_budget_doubles;
    std::vector<std::vector<double>> cache;
    if (cached) {
        cache.resize(opts.n_samples);
        parallel_chunks(opts.n_samples, kChunk, opts.threads,
                        [&](std::size_t, std::size_t b, std::size_t e) {
                            for (std::size_t k = b; k < e; ++k) cache[k] = residual(k);
                        });
    }
    auto get = [&](std::size_t k, std::vector<double>& g) {
        if (cached) g = cache[k];
        else g = residual(k);
    };

    // Pass 1: mean (chunk partials reduced in order).
    const std::size_t n_chunks = (opts.n_samples + kChunk - 1) / kChunk;
    std::vector<std::vector<double>> partial(n_chunks);
    parallel_chunks(opts.n_samples, kChunk, opts.threads,
                    [&](std::size_t c, std::size_t b, std::size_t e) {
                        auto& acc = partial[c];
                        acc.assign(n, 0.0);
                        std::vector<double> g(n);
                        for (std::size_t k = b; k < e; ++k) {
                            get(k, g);
                            for (std::size_t j = 0; j < n; ++j) acc[j] += g[j];
                        }
                    });
    std::vector<double> mean(n, 0.0);
    for (std::size_t c = 0; c < n_chunks; ++c)
        for (std::size_t j = 0; j < n; ++j) mean[j] += partial[c][j];
    for (auto& m : mean) m /= static_cast<double>(opts.n_samples);

    const double lambda = power_iteration(opts.n_samples, n, opts.max_iters, opts.seed,
                                          opts.threads, [&](std::size_t k, std::vector<double>& g) {
                                              get(k, g);
                                              for (std::size_t j = 0; j < n; ++j) g[j] -= mean[j];
                                          });
    const double lam = std::max(0.0, lambda);
    return opts.k_e_as_eigenvalue ? lam : std::sqrt(lam);
}

double estimate_K_E(const diffusion::ScoreModel& model, const sysmodel::SystemConfig& config,
                    const EstimateOptions& opts) {
    return estimate_K_E(diffusion::pipeline_denoiser(model), model, config, opts);
}

DenoiserConstants estimate_constants(const diffusion::ScoreModel& model,
                                     const sysmodel::SystemConfig& config,
                                     const EstimateOptions& opts) {
    DenoiserConstants c;
    c.j_star = estimate_J(model, config, opts);
    c.k_e = estimate_K_E(model, config, opts);
    c.v_star = v_star(c.j_star, c.k_e);
    c.sample_count = opts.n_samples;
    c.power_iters = opts.max_iters;
    c.seed = opts.seed;
    return c;
}

}  // namespace urabound::constants
