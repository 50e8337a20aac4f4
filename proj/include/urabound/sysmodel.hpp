// System configuration and the Gaussian multiple-access channel sampler.
#ifndef URABOUND_SYSMODEL_HPP
#define URABOUND_SYSMODEL_HPP

#include <cstdint>
#include <vector>

namespace urabound::sysmodel {

// Channel / code parameters.
//
// Energy-per-bit convention used throughout: Eb/N0 = n*P / (2k), i.e. the
// real-channel normalization. The conversion helpers below are the only
// place the convention appears.
struct SystemConfig {
    std::uint32_t ka = 1;      // active users
    std::uint32_t n = 1;       // blocklength (channel uses)
    std::uint32_t k = 1;       // payload bits per user; codebook size M = 2^k
    double p = 1.0;            // power constraint per symbol
    double p_prime = 0.5;      // random-coding power, strictly below p
    double eps_target = 1e-3;  // target per-user error
    std::uint64_t seed = 1;

    // Throws std::invalid_argument when any invariant fails.
    void validate() const;

    double log_m() const;        // ln M = k ln 2
    double m_real() const;       // M as a double (exact for k <= 1023)
    double ka_p_prime() const;   // ka * p_prime, the sum-signal power
    double y_variance() const;   // 1 + ka * p_prime, per-dimension variance of y
};

double ebn0_db_to_power(double ebn0_db, std::uint32_t n, std::uint32_t k);
double power_to_ebn0_db(double p, std::uint32_t n, std::uint32_t k);

// One realization of the channel: K_a codewords, the noise, and their sum.
struct ChannelSample {
    std::vector<std::vector<double>> codewords;  // ka vectors of length n, N(0, P')
    std::vector<double> noise;                   // length n, N(0, 1)
    std::vector<double> y;                       // sum of codewords plus noise
    std::uint64_t seed = 0;
    std::uint64_t index = 0;
};

// Deterministic in (config, seed, index); index selects an independent draw
// so parallel callers can enumerate samples without sharing state.
ChannelSample sample_channel_output(const SystemConfig& config, std::uint64_t seed,
                                    std::uint64_t index = 0);

// i.i.d. draws from the y-marginal N(0, (1 + ka p') I_n); the training and
// estimation distribution for the score model.
std::vector<std::vector<double>> sample_y_marginal(const SystemConfig& config, std::size_t count,
                                                   std::uint64_t seed);

// Single marginal draw, stream (seed, index); used by streaming estimators.
std::vector<double> sample_y_marginal_one(const SystemConfig& config, std::uint64_t seed,
                                          std::uint64_t index);

}  // namespace urabound::sysmodel

#endif
