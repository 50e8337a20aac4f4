#include "urabound/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace urabound::numerics {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// ln of the lower series sum S with P(a,x) = exp(a ln x - x - lgamma(a+1)) * S.
double lower_series_sum(double a, double x) {
    double sum = 1.0;
    double term = 1.0;
    for (int k = 1; k < 4'000'000; ++k) {
        term *= x / (a + static_cast<double>(k));
        sum += term;
        if (term < sum * 1e-17) return sum;
    }
    throw std::runtime_error("reg_gamma: lower series failed to converge");
}

// Continued fraction h with Q(a,x) = exp(a ln x - x - lgamma(a)) * h
// (modified Lentz).
double upper_cf(double a, double x) {
    constexpr double kTiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / (b == 0.0 ? kTiny : b);
    double h = d;
    for (int i = 1; i < 4'000'000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) return h;
    }
    throw std::runtime_error("reg_gamma: continued fraction failed to converge");
}

double log_lower_gamma(double a, double x) {
    return a * std::log(x) - x - std::lgamma(a + 1.0) + std::log(lower_series_sum(a, x));
}

}  // namespace

double log_binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) throw std::domain_error("log_binomial: k > n");
    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(k);
    // Grouping the two lower terms first keeps the result bitwise symmetric
    // under k <-> n-k.
    const double lo = std::lgamma(kd + 1.0) + std::lgamma(nd - kd + 1.0);
    return std::lgamma(nd + 1.0) - lo;
}

double log_binomial_real(double n, std::uint64_t k) {
    if (!(n >= 0.0) || !std::isfinite(n)) throw std::domain_error("log_binomial_real: bad n");
    const double kd = static_cast<double>(k);
    if (kd > n) throw std::domain_error("log_binomial_real: k > n");
    if (k == 0) return 0.0;
    // Sum of ln(n - i) avoids the lgamma(n+1) - lgamma(n-k+1) cancellation
    // that destroys all precision once n is astronomically large.
    double s = 0.0;
    for (std::uint64_t i = 0; i < k; ++i) s += std::log(n - static_cast<double>(i));
    return s - std::lgamma(kd + 1.0);
}

double log_reg_upper_gamma(double shape, double x) {
    if (!(shape > 0.0)) throw std::domain_error("reg_upper_gamma: shape must be > 0");
    if (!(x >= 0.0)) throw std::domain_error("reg_upper_gamma: x must be >= 0");
    if (x == 0.0) return 0.0;  // Q(a, 0) = 1
    if (x < shape + 1.0) {
        const double p = std::exp(log_lower_gamma(shape, x));
        if (p >= 1.0) return std::log(std::numeric_limits<double>::min());
        return std::log1p(-p);
    }
    return shape * std::log(x) - x - std::lgamma(shape) + std::log(upper_cf(shape, x));
}

double reg_upper_gamma(double shape, double x) {
    return std::exp(log_reg_upper_gamma(shape, x));
}

double reg_lower_gamma(double shape, double x) {
    if (!(shape > 0.0)) throw std::domain_error("reg_lower_gamma: shape must be > 0");
    if (!(x >= 0.0)) throw std::domain_error("reg_lower_gamma: x must be >= 0");
    if (x == 0.0) return 0.0;
    if (x < shape + 1.0) return std::exp(log_lower_gamma(shape, x));
    return 1.0 - reg_upper_gamma(shape, x);
}

double log_sum_exp(std::span<const double> terms) {
    if (terms.empty()) throw std::domain_error("log_sum_exp: empty input");
    double m = kNegInf;
    for (double t : terms) m = std::max(m, t);
    if (std::isinf(m) && m < 0.0) return kNegInf;  // all terms are exactly zero
    double s = 0.0;
    for (double t : terms) s += std::exp(t - m);
    return m + std::log(s);
}

double log_sum_exp(double a, double b) {
    const double terms[2] = {a, b};
    return log_sum_exp(std::span<const double>(terms, 2));
}

}  // namespace urabound::numerics
