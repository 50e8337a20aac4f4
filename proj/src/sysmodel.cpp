#include "urabound/sysmodel.hpp"

#include <cmath>
#include <stdexcept>

#include "urabound/rng.hpp"

namespace urabound::sysmodel {

void SystemConfig::validate() const {
    if (ka < 1) throw std::invalid_argument("config: ka must be >= 1");
    if (n < 1) throw std::invalid_argument("config: n must be >= 1");
    if (k < 1) throw std::invalid_argument("config: k must be >= 1");
    if (!(p > 0.0)) throw std::invalid_argument("config: p must be > 0");
    if (!(p_prime > 0.0) || !(p_prime < p))
        throw std::invalid_argument("config: require 0 < p_prime < p");
    if (!(eps_target > 0.0) || !(eps_target < 1.0))
        throw std::invalid_argument("config: eps_target must be in (0,1)");
}

double SystemConfig::log_m() const { return static_cast<double>(k) * std::log(2.0); }

double SystemConfig::m_real() const { return std::ldexp(1.0, static_cast<int>(k)); }

double SystemConfig::ka_p_prime() const { return static_cast<double>(ka) * p_prime; }

double SystemConfig::y_variance() const { return 1.0 + ka_p_prime(); }

double ebn0_db_to_power(double ebn0_db, std::uint32_t n, std::uint32_t k) {
    if (n < 1 || k < 1) throw std::invalid_argument("ebn0_db_to_power: n, k must be >= 1");
    return (2.0 * static_cast<double>(k) / static_cast<double>(n)) *
           std::pow(10.0, ebn0_db / 10.0);
}

double power_to_ebn0_db(double p, std::uint32_t n, std::uint32_t k) {
    if (n < 1 || k < 1) throw std::invalid_argument("power_to_ebn0_db: n, k must be >= 1");
    if (!(p > 0.0)) throw std::invalid_argument("power_to_ebn0_db: p must be > 0");
    return 10.0 * std::log10(static_cast<double>(n) * p / (2.0 * static_cast<double>(k)));
}

ChannelSample sample_channel_output(const SystemConfig& config, std::uint64_t seed,
                                    std::uint64_t index) {
    // ka = 0 is tolerated here (y = Z) so tests can probe the noise floor.
    const std::size_t n = config.n;
    const double sqrt_pp = std::sqrt(config.p_prime);

    ChannelSample out;
    out.seed = seed;
    out.index = index;
    out.codewords.resize(config.ka);
    out.y.assign(n, 0.0);

    Rng rng(seed, stream_tag::kChannel, index);
    for (std::uint32_t i = 0; i < config.ka; ++i) {
        auto& c = out.codewords[i];
        c.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            c[j] = sqrt_pp * rng.next_gaussian();
            out.y[j] += c[j];
        }
    }
    out.noise.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        out.noise[j] = rng.next_gaussian();
        out.y[j] += out.noise[j];
    }
    return out;
}

std::vector<double> sample_y_marginal_one(const SystemConfig& config, std::uint64_t seed,
                                          std::uint64_t index) {
    const double sd = std::sqrt(config.y_variance());
    Rng rng(seed, stream_tag::kMarginal, index);
    std::vector<double> y(config.n);
    for (auto& v : y) v = sd * rng.next_gaussian();
    return y;
}

std::vector<std::vector<double>> sample_y_marginal(const SystemConfig& config, std::size_t count,
                                                   std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("sample_y_marginal: count must be >= 1");
    std::vector<std::vector<double>> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(sample_y_marginal_one(config, seed, i));
    return out;
}

}  // namespace urabound::sysmodel
