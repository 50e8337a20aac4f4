// Discrete-time diffusion machinery: variance schedule, forward corruption,
// denoising-score-matching training of a small score head, and the
// single-step denoiser used by the bound pipeline.
#ifndef URABOUND_DIFFUSION_HPP
#define URABOUND_DIFFUSION_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "urabound/sysmodel.hpp"

namespace urabound::diffusion {

struct BetaSpec {
    enum class Kind { Constant, Linear };
    Kind kind = Kind::Constant;
    double b0 = 0.1;  // constant value, or start of the linear ramp
    double b1 = 0.1;  // end of the linear ramp

    static BetaSpec constant(double b) { return {Kind::Constant, b, b}; }
    static BetaSpec linear(double b0, double b1) { return {Kind::Linear, b0, b1}; }
};

struct DiffusionSchedule {
    std::uint32_t t_count = 0;        // number of levels T
    std::vector<double> betas;        // beta_1..beta_T, betas[l-1]
    std::vector<double> alpha_bars;   // alpha_bars[l] = prod_{s<=l}(1-beta_s); [0] = 1
    std::uint32_t l_star = 0;         // working level, in [1, T]

    double alpha_bar(std::uint32_t l) const { return alpha_bars.at(l); }
    double alpha_bar_lstar() const { return alpha_bars.at(l_star); }
};

DiffusionSchedule build_schedule(std::uint32_t t_count, const BetaSpec& spec);

// Default schedule for the bound pipeline: T = 100 constant-beta levels with
// alpha_bar_T = ka p' / (1 + ka p') and l* = T. At that level a unit-variance
// clean signal plus the schedule noise, rescaled by sqrt(1 + ka p'), carries
// exactly the channel split: sum-signal variance ka p', noise variance 1.
DiffusionSchedule default_schedule(const sysmodel::SystemConfig& config,
                                   std::uint32_t t_count = 100);

// Forward corruption x_l = sqrt(abar_l) x0 + sqrt(1-abar_l) eps.
struct ForwardSample {
    std::vector<double> x_l;
    std::vector<double> eps;
};
ForwardSample forward_sample(const std::vector<double>& x0, std::uint32_t level,
                             const DiffusionSchedule& sched, std::uint64_t seed,
                             std::uint64_t index = 0);

// Exact score of N(0, sigma2 I): -y / sigma2.
std::vector<double> analytic_gaussian_score(const std::vector<double>& y, double sigma2);

enum class ModelKind { AnalyticGaussian, Linear, Mlp };

std::string model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

// Trained (or analytic) score head plus the diffusion level it lives at.
//
// Parameterizations:
//   analytic  score-native: s(y) = -y / sigma2.
//   linear    score-native: s(y) = a*y + b (scalar a, bias vector b).
//   mlp       noise-native: eps_hat(y) = W2 tanh(W1 y + c1) + c2, one hidden
//             layer; score derived as -eps_hat / sqrt(1 - abar_{l*}).
struct ScoreModel {
    ModelKind kind = ModelKind::AnalyticGaussian;
    std::uint32_t n = 0;
    std::uint32_t l_star = 0;
    double alpha_bar_lstar = 1.0;
    std::uint64_t seed = 0;

    double sigma2 = 1.0;                // analytic kind
    double slope = 0.0;                 // linear kind
    std::vector<double> bias;           // linear kind, length n
    std::uint32_t hidden = 0;           // mlp kind
    std::vector<double> w1, b1, w2, b2; // mlp kind (row-major)

    static ScoreModel analytic(std::uint32_t n, double sigma2, std::uint32_t l_star = 0,
                               double alpha_bar_lstar = 1.0);
    static ScoreModel linear(std::uint32_t n, double slope, std::vector<double> bias,
                             std::uint32_t l_star, double alpha_bar_lstar);
};

// s_theta(y), evaluated at raw y.
std::vector<double> score(const ScoreModel& model, const std::vector<double>& y);

// Single-step rule D(y) = y + s_theta(y).
std::vector<double> denoise(const ScoreModel& model, const std::vector<double>& y);

// The denoiser the constants pipeline measures. Score-native kinds use
// the y + s rule; the noise-native mlp uses its own x0-prediction form
// D(y) = y - sqrt(1-abar) eps_hat(y), which differs from y + s_theta(y)
// by the (1-abar) factor and so carries a nonzero mismatch residual.
using DenoiserFn = std::function<std::vector<double>(const std::vector<double>&)>;
DenoiserFn pipeline_denoiser(const ScoreModel& model);

// Reverse ancestral sampling from level `from_level` down to 0; optional,
// not used by the bound pipeline.
std::vector<double> denoise_multistep(const ScoreModel& model, const DiffusionSchedule& sched,
                                      const std::vector<double>& x_from, std::uint32_t from_level,
                                      std::uint64_t seed);

struct TrainOptions {
    std::uint32_t epochs = 5;
    double step_size = 0.05;
    std::uint32_t batch = 32;
    std::uint64_t seed = 1;
    std::uint32_t hidden = 64;     // mlp only
    double lr_decay = 0.0;         // step_size / (1 + lr_decay * epoch)
    // The y-marginal is centered by construction; at large n a free bias is
    // mostly sampling noise that inflates the measured J*. Freeze it here.
    bool fit_bias = true;
};

struct TrainReport {
    double final_loss = 0.0;
    std::vector<double> loss_trace;  // mean per-dimension loss per epoch
    std::size_t sample_count = 0;
    std::uint64_t seed = 0;
    // Loss trace non-increasing after a 10-epoch smoothing window; advisory.
    bool smoothed_monotone = true;
};

// Minimizes the noise-prediction objective E||eps - eps_hat(x_l)||^2 at the
// fixed level l_star over the provided samples, by plain SGD with manual
// gradients. Deterministic given options.seed.
std::pair<ScoreModel, TrainReport> train_score(ModelKind kind,
                                               const std::vector<std::vector<double>>& samples,
                                               const DiffusionSchedule& sched,
                                               std::uint32_t l_star, const TrainOptions& opts);

// Mean per-dimension noise-prediction loss of a model over fresh forward
// corruptions of the samples (one per sample, stream (seed, index)).
double evaluate_noise_loss(const ScoreModel& model,
                           const std::vector<std::vector<double>>& samples,
                           const DiffusionSchedule& sched, std::uint32_t l_star,
                           std::uint64_t seed);

// Checkpoint serialization (JSON; bit-exact round trip).
std::string save_checkpoint(const ScoreModel& model);
ScoreModel load_checkpoint(const std::string& json_text);
void save_checkpoint_file(const ScoreModel& model, const std::string& path);
ScoreModel load_checkpoint_file(const std::string& path);

}  // namespace urabound::diffusion

#endif
