// Empirical estimation of the denoiser constants J*, K_E and v*.
#ifndef URABOUND_CONSTANTS_HPP
#define URABOUND_CONSTANTS_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "urabound/diffusion.hpp"
#include "urabound/sysmodel.hpp"

namespace urabound::constants {

struct DenoiserConstants {
    double j_star = 0.0;
    double k_e = 0.0;
    double v_star = 1.0;
    std::size_t sample_count = 0;
    std::uint32_t power_iters = 0;
    std::uint64_t seed = 0;
};

struct EstimateOptions {
    std::size_t n_samples = 100000;
    std::uint32_t max_iters = 100;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    // Vectors are cached when n_samples * n fits this many doubles; beyond
    // it they are regenerated from their counter streams each iteration.
    std::size_t cache_budget_doubles = std::size_t{1} << 26;
    // K_E convention: sqrt of the top eigenvalue of the centered covariance
    // (standard-deviation convention). The raw-eigenvalue alternative is
    // kept behind this switch.
    bool k_e_as_eigenvalue = false;
};

// v* = 1 + J* + K_E^2. Throws on negative inputs.
double v_star(double j_star, double k_e);

// Top eigenvalue of (1/N) sum_k s^(k) s^(k)T where s^(k) is the model score
// at the k-th marginal draw. Matrix-free power iteration; the n x n moment
// matrix is never materialized (n can be 30000). All-zero scores return 0.
double estimate_J(const diffusion::ScoreModel& model, const sysmodel::SystemConfig& config,
                  const EstimateOptions& opts);

// K_E from the centered covariance of the mismatch residual
// E(y) = D(y) - (y + s_theta(y)) for an explicit denoiser D.
double estimate_K_E(const diffusion::DenoiserFn& denoiser, const diffusion::ScoreModel& model,
                    const sysmodel::SystemConfig& config, const EstimateOptions& opts);

// Default pipeline form: D is the model's own denoiser (see
// diffusion::pipeline_denoiser).
double estimate_K_E(const diffusion::ScoreModel& model, const sysmodel::SystemConfig& config,
                    const EstimateOptions& opts);

DenoiserConstants estimate_constants(const diffusion::ScoreModel& model,
                                     const sysmodel::SystemConfig& config,
                                     const EstimateOptions& opts);

// Top eigenvalue of (1/N) sum_k v^(k) v^(k)T for explicit vectors, optionally
// after centering. Exposed for synthetic-residual tests and shared by the
// estimators above when vectors fit in memory.
double top_eigenvalue_second_moment(const std::vector<std::vector<double>>& vectors,
                                    bool center, std::uint32_t max_iters, std::uint64_t seed);

}  // namespace urabound::constants

#endif
