// Probability values carried in natural-log scale.
//
// Codebook sizes reach 2^200, so every probability-like quantity in the
// bound pipeline stays in log scale until final output.
#ifndef URABOUND_LOG_PROB_HPP
#define URABOUND_LOG_PROB_HPP

#include <algorithm>
#include <cmath>
#include <limits>

namespace urabound {

struct LogProb {
    // ln of the value; -inf encodes exactly zero. May transiently exceed 0
    // before clamping.
    double log_value = -std::numeric_limits<double>::infinity();

    static LogProb zero() { return LogProb{}; }
    static LogProb one() { return LogProb{0.0}; }
    static LogProb from_log(double lv) { return LogProb{lv}; }
    static LogProb from_linear(double p) { return LogProb{p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity()}; }

    // Clamp to a valid probability (<= 1).
    LogProb clamped() const { return LogProb{std::min(log_value, 0.0)}; }

    double linear() const { return std::exp(log_value); }
    bool is_zero() const { return std::isinf(log_value) && log_value < 0.0; }

    friend bool operator<(LogProb a, LogProb b) { return a.log_value < b.log_value; }
    friend bool operator==(LogProb a, LogProb b) { return a.log_value == b.log_value; }
};

inline LogProb min(LogProb a, LogProb b) { return a < b ? a : b; }

}  // namespace urabound

#endif
