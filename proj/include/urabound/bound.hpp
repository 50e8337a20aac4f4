// Evaluation of the diffusion-denoiser random-coding achievability bound:
// q0 (change of measure), q1(t) (pairwise kernel + Gallager rho-trick),
// q2(t) (information-density tail), assembly, and the required-Eb/N0 solver.
#ifndef URABOUND_BOUND_HPP
#define URABOUND_BOUND_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "urabound/log_prob.hpp"
#include "urabound/sysmodel.hpp"

namespace urabound::bound {

// Pairwise error kernels (all in log scale, per ordered pair of subsets):
//   Split            exp(-1/(2tP'+16v*)) (1+tP'/(8v*))^-n; the three-way
//                    MGF split across noise/score/mismatch, default
//   GaussianAverage  (1+tP'/(4v*))^{-n/2}; closed-form average of
//                    exp(-|h|^2/(16v*)) over h ~ N(0, 2tP' I)
//   Baseline         (1+tP'/2)^{-n/2}; no-denoiser Chernoff comparison
enum class PairwiseKernel { Split, GaussianAverage, Baseline };

// Raw keeps both quadratic terms of the information density unhalved;
// Canonical applies the standard Gaussian log-likelihood normalization.
enum class InfoDensityVariant { Raw, Canonical };

// Mass multiplying e^{-psi} in q2: the full binomial product, or the
// half-exponent form exp{n(tR1+R2)/2}.
enum class Q2MassForm { Product, Half };

const char* kernel_name(PairwiseKernel k);
const char* idens_name(InfoDensityVariant v);
const char* q2_mass_name(Q2MassForm f);

struct McOptions {
    std::size_t samples = 10000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::size_t subset_budget = 100000;    // exact enumeration cap
    std::size_t pool_size = 16;            // candidate pool, statistics path
    std::size_t pool_subset_budget = 200;  // enumeration cap within the pool
    enum class Path { Auto, Full, Fast } path = Path::Auto;
};

struct BoundOptions {
    PairwiseKernel kernel = PairwiseKernel::Split;
    InfoDensityVariant idens = InfoDensityVariant::Raw;
    Q2MassForm q2_mass = Q2MassForm::Product;
    bool enable_q1 = true;
    bool enable_q2 = true;
    // Skip the q2 Monte Carlo when the q1 contribution (t/ka)*q1 is already
    // below this fraction of eps_target; only ever loosens the bound.
    double q2_skip_factor = 1e-2;
    // Stop the t-loop once three consecutive contributions are decreasing
    // and below this fraction of eps_target.
    double tail_skip_factor = 1e-3;
    McOptions mc;
};

// --- q0 ----------------------------------------------------------------

// log of (1/M) C(ka,2) + ka Q(n, nP/P').
LogProb q0_term(const sysmodel::SystemConfig& config);

// --- q1 ----------------------------------------------------------------

// Single-pair error kernel in log scale (before binomials and rho-trick).
LogProb pairwise_bound(std::uint32_t t, double p_prime, double v_star, std::uint32_t n,
                       PairwiseKernel kernel = PairwiseKernel::Split);

struct Q1Result {
    LogProb value;  // clamped to <= 1
    double rho0 = 0.0;
    double rho1 = 0.0;
};

// Tightest value over (rho0, rho1) in [0,1]^2 of
//   rho1 ln C(ka,t) + rho0 rho1 [ln C(M-ka,t) + log kernel].
// The objective is bilinear, so the optimum sits on a corner; the grid
// cross-check lives in the test suite.
Q1Result q1_term(const sysmodel::SystemConfig& config, std::uint32_t t, double v_star,
                 PairwiseKernel kernel = PairwiseKernel::Split);

// --- information density / q2 -------------------------------------------

struct InfoDensitySample {
    double i_t = 0.0;
    std::uint32_t t = 0;
    double log_term = 0.0;  // (n/2) ln(1 + P' t)
    double quad1 = 0.0;     // |y - c(S0^c)|^2 / (1 + P' t) at the minimizer
    double quad2 = 0.0;     // |y - c(S0) - c(S0^c)|^2 (= |Z|^2 identically)
    std::uint64_t seed = 0;
    bool exact = true;      // false when the greedy subset heuristic was used
};

// One draw, literal vector arithmetic over a ChannelSample. Exact subset
// enumeration while C(ka, t) <= subset_budget, then the sorted-marginal
// greedy heuristic (flagged; it can only over-estimate I_t).
InfoDensitySample sample_information_density(const sysmodel::SystemConfig& config,
                                             std::uint32_t t, std::uint64_t seed,
                                             std::uint64_t index = 0,
                                             std::size_t subset_budget = 100000,
                                             InfoDensityVariant variant =
                                                 InfoDensityVariant::Raw);

struct Q2Result {
    LogProb value;                // clamped to <= 1
    double psi = 0.0;             // witness threshold
    double r1 = 0.0, r2 = 0.0;    // ln C(M-ka,t)/(nt), ln C(ka,t)/n
    double mc_halfwidth = 0.0;    // 1.96 * binomial SE of P_hat at the witness
    std::size_t mc_samples = 0;
    bool exact = true;            // subset minimization exact on all draws
    bool evaluated = true;
};

// inf over psi of P_hat[I_t <= psi] + mass * e^{-psi}, psi scanned over the
// sorted sample values plus a normal-approximation stationary point.
Q2Result q2_term(const sysmodel::SystemConfig& config, std::uint32_t t,
                 const BoundOptions& opts);

// The raw I_t Monte Carlo draws behind q2 (diagnostics; lets tests compare
// the vector and statistics sampling paths distributionally).
struct InfoDensityDraws {
    std::vector<double> values;
    bool exact = true;
    bool available = true;
};
InfoDensityDraws info_density_mc_values(const sysmodel::SystemConfig& config, std::uint32_t t,
                                        const BoundOptions& opts);

// --- assembly -------------------------------------------------------------

struct PerTTerm {
    std::uint32_t t = 0;
    LogProb q1;
    double rho0 = 0.0, rho1 = 0.0;
    Q2Result q2;                  // q2.evaluated == false when skipped
    LogProb contribution;         // (t/ka) * min(q1, q2)
};

struct BoundBreakdown {
    LogProb q0;
    std::vector<PerTTerm> per_t;
    double eps_total = 1.0;            // linear, clamped to <= 1
    double eps_log = 0.0;              // ln of the unclamped sum
    std::uint32_t truncated_from = 0;  // first skipped t (0 = none skipped)
    PairwiseKernel kernel = PairwiseKernel::Split;
    InfoDensityVariant idens = InfoDensityVariant::Raw;
    Q2MassForm q2_mass = Q2MassForm::Product;
    double v_star_used = 1.0;
};

// Caches the standardized Monte Carlo statistics per t, so sweeping power
// with common random numbers re-prices the same draws instead of redrawing.
class BoundEvaluator {
  public:
    BoundEvaluator(sysmodel::SystemConfig shape, BoundOptions opts);
    ~BoundEvaluator();
    BoundEvaluator(BoundEvaluator&&) noexcept;
    BoundEvaluator& operator=(BoundEvaluator&&) noexcept;

    // Evaluates the bound at (p, p_prime) with the given v*.
    BoundBreakdown evaluate(double p, double p_prime, double v_star);

    // q2(t) alone at the given power (shares the evaluator's draws).
    Q2Result q2(std::uint32_t t, double p_prime);

    const BoundOptions& options() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    friend InfoDensityDraws info_density_mc_values(const sysmodel::SystemConfig&, std::uint32_t,
                                                   const BoundOptions&);
};

// One-shot evaluation at the config's own (p, p_prime).
BoundBreakdown epsilon_bound(const sysmodel::SystemConfig& config, double v_star,
                             const BoundOptions& opts);

// No-denoiser comparison curve: the same assembly with the baseline kernel.
BoundBreakdown baseline_epsilon_bound(const sysmodel::SystemConfig& config,
                                      const BoundOptions& opts);

// --- required Eb/N0 --------------------------------------------------------

struct SolverOptions {
    double lo_db = -2.0;
    double hi_db = 12.0;
    double tol_db = 0.01;
    std::vector<double> p_prime_ratios = {0.80, 0.85, 0.90, 0.95, 0.99};
};

struct RequiredEbn0Result {
    double ebn0_db = 0.0;
    double best_p_prime = 0.0;
    BoundBreakdown witness;
};

// Thrown when neither endpoint brackets the target.
struct BracketFailure : std::runtime_error {
    double eps_lo, eps_hi;
    BracketFailure(double lo, double hi);
};

// Bisection on Eb/N0 (dB) to tol_db; at each power the best P' over the
// ratio grid is used. Returns the smallest bracketed Eb/N0 with
// eps <= target. Deterministic: all evaluations share one random universe.
RequiredEbn0Result required_ebn0(const sysmodel::SystemConfig& shape, double target_eps,
                                 double v_star, const SolverOptions& solver,
                                 const BoundOptions& opts);

}  // namespace urabound::bound

#endif
