// Log-domain special functions shared by all bound terms.
#ifndef URABOUND_NUMERICS_HPP
#define URABOUND_NUMERICS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "urabound/log_prob.hpp"

namespace urabound::numerics {

// ln C(n, k) for integer arguments. Exact-symmetric: the value for k and
// n-k is bitwise identical. Throws std::domain_error when k > n.
double log_binomial(std::uint64_t n, std::uint64_t k);

// ln C(n, k) where the population n may be far beyond 2^64 (e.g. a codebook
// of size 2^200 passed as a double). Uses a k-term log product, which stays
// accurate where the lgamma difference would cancel catastrophically.
// Requires k representable alongside n (k <= n) and modest k.
double log_binomial_real(double n, std::uint64_t k);

// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x)/Gamma(a).
// Lower series for x < a+1, modified-Lentz continued fraction otherwise,
// both assembled in log scale so shapes up to 1e5+ survive.
double reg_upper_gamma(double shape, double x);

// ln Q(a, x); usable directly in log-domain assembly (q0 needs Q at shape
// n = 30000 where the linear value underflows).
double log_reg_upper_gamma(double shape, double x);

// Regularized lower incomplete gamma P(a, x) = 1 - Q(a, x).
double reg_lower_gamma(double shape, double x);

// ln sum exp(x_i), overflow-free. Throws std::domain_error on empty input.
double log_sum_exp(std::span<const double> terms);
double log_sum_exp(double a, double b);

inline double log_sum_exp(const std::vector<double>& terms) {
    return log_sum_exp(std::span<const double>(terms));
}

}  // namespace urabound::numerics

#endif
