#include "urabound/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "urabound/rng.hpp"

namespace urabound::diffusion {

namespace {

void check_level(std::uint32_t l, std::uint32_t t_count) {
    if (l < 1 || l > t_count) throw std::domain_error("diffusion: level out of range");
}

double sqrt_one_minus(double alpha_bar) {
    const double v = 1.0 - alpha_bar;
    if (!(v > 0.0)) throw std::domain_error("diffusion: alpha_bar at l* must be < 1");
    return std::sqrt(v);
}

// eps_hat(x) for any kind; score-native kinds convert through the standard
// chain eps = -sqrt(1-abar) * s.
std::vector<double> noise_prediction(const ScoreModel& model, const std::vector<double>& x) {
    if (x.size() != model.n) throw std::invalid_argument("score model: dimension mismatch");
    switch (model.kind) {
        case ModelKind::AnalyticGaussian: {
            const double c = sqrt_one_minus(model.alpha_bar_lstar) / model.sigma2;
            std::vector<double> out(x.size());
            for (std::size_t j = 0; j < x.size(); ++j) out[j] = c * x[j];
            return out;
        }
        case ModelKind::Linear: {
            const double c = -sqrt_one_minus(model.alpha_bar_lstar);
            std::vector<double> out(x.size());
            for (std::size_t j = 0; j < x.size(); ++j)
                out[j] = c * (model.slope * x[j] + model.bias[j]);
            return out;
        }
        case ModelKind::Mlp: {
            const std::size_t n = model.n, h = model.hidden;
            std::vector<double> hid(h);
            for (std::size_t i = 0; i < h; ++i) {
                double acc = model.b1[i];
                const double* row = model.w1.data() + i * n;
                for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
                hid[i] = std::tanh(acc);
            }
            std::vector<double> out(n);
            for (std::size_t j = 0; j < n; ++j) {
                double acc = model.b2[j];
                const double* row = model.w2.data() + j * h;
                for (std::size_t i = 0; i < h; ++i) acc += row[i] * hid[i];
                out[j] = acc;
            }
            return out;
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace

DiffusionSchedule build_schedule(std::uint32_t t_count, const BetaSpec& spec) {
    if (t_count < 1) throw std::domain_error("build_schedule: T must be >= 1");
    DiffusionSchedule s;
    s.t_count = t_count;
    s.betas.resize(t_count);
    s.alpha_bars.resize(t_count + 1);
    s.alpha_bars[0] = 1.0;
    for (std::uint32_t l = 1; l <= t_count; ++l) {
        double beta = spec.b0;
        if (spec.kind == BetaSpec::Kind::Linear && t_count > 1)
            beta = spec.b0 + (spec.b1 - spec.b0) * static_cast<double>(l - 1) /
                                 static_cast<double>(t_count - 1);
        if (!(beta > 0.0) || !(beta < 1.0))
            throw std::domain_error("build_schedule: beta must lie in (0,1)");
        s.betas[l - 1] = beta;
        s.alpha_bars[l] = s.alpha_bars[l - 1] * (1.0 - beta);
    }
    s.l_star = t_count;
    return s;
}

DiffusionSchedule default_schedule(const sysmodel::SystemConfig& config, std::uint32_t t_count) {
    const double abar_target = config.ka_p_prime() / config.y_variance();
    const double beta = 1.0 - std::pow(abar_target, 1.0 / static_cast<double>(t_count));
    auto s = build_schedule(t_count, BetaSpec::constant(beta));
    s.l_star = t_count;
    return s;
}

ForwardSample forward_sample(const std::vector<double>& x0, std::uint32_t level,
                             const DiffusionSchedule& sched, std::uint64_t seed,
                             std::uint64_t index) {
    check_level(level, sched.t_count);
    const double abar = sched.alpha_bar(level);
    const double ca = std::sqrt(abar);
    const double ce = std::sqrt(1.0 - abar);
    Rng rng(seed, stream_tag::kForward, index);
    ForwardSample out;
    out.eps.resize(x0.size());
    out.x_l.resize(x0.size());
    for (std::size_t j = 0; j < x0.size(); ++j) {
        out.eps[j] = rng.next_gaussian();
        out.x_l[j] = ca * x0[j] + ce * out.eps[j];
    }
    return out;
}

std::vector<double> analytic_gaussian_score(const std::vector<double>& y, double sigma2) {
    if (!(sigma2 > 0.0)) throw std::domain_error("analytic_gaussian_score: sigma2 must be > 0");
    std::vector<double> s(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) s[j] = -y[j] / sigma2;
    return s;
}

std::string model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::AnalyticGaussian: return "analytic-gaussian";
        case ModelKind::Linear: return "linear";
        case ModelKind::Mlp: return "mlp";
    }
    throw std::logic_error("unreachable");
}

ModelKind model_kind_from_name(const std::string& name) {
    if (name == "analytic-gaussian" || name == "analytic") return ModelKind::AnalyticGaussian;
    if (name == "linear") return ModelKind::Linear;
    if (name == "mlp") return ModelKind::Mlp;
    throw std::invalid_argument("unknown model kind: " + name);
}

ScoreModel ScoreModel::analytic(std::uint32_t n, double sigma2, std::uint32_t l_star,
                                double alpha_bar_lstar) {
    if (!(sigma2 > 0.0)) throw std::domain_error("ScoreModel::analytic: sigma2 must be > 0");
    ScoreModel m;
    m.kind = ModelKind::AnalyticGaussian;
    m.n = n;
    m.l_star = l_star;
    m.alpha_bar_lstar = alpha_bar_lstar;
    m.sigma2 = sigma2;
    return m;
}

ScoreModel ScoreModel::linear(std::uint32_t n, double slope, std::vector<double> bias,
                              std::uint32_t l_star, double alpha_bar_lstar) {
    if (bias.size() != n) throw std::invalid_argument("ScoreModel::linear: bias length != n");
    ScoreModel m;
    m.kind = ModelKind::Linear;
    m.n = n;
    m.l_star = l_star;
    m.alpha_bar_lstar = alpha_bar_lstar;
    m.slope = slope;
    m.bias = std::move(bias);
    return m;
}

std::vector<double> score(const ScoreModel& model, const std::vector<double>& y) {
    if (y.size() != model.n) throw std::invalid_argument("score model: dimension mismatch");
    switch (model.kind) {
        case ModelKind::AnalyticGaussian:
            return analytic_gaussian_score(y, model.sigma2);
        case ModelKind::Linear: {
            std::vector<double> s(y.size());
            for (std::size_t j = 0; j < y.size(); ++j) s[j] = model.slope * y[j] + model.bias[j];
            return s;
        }
        case ModelKind::Mlp: {
            auto eps = noise_prediction(model, y);
            const double c = -1.0 / sqrt_one_minus(model.alpha_bar_lstar);
            for (auto& v : eps) v *= c;
            return eps;
        }
    }
    throw std::logic_error("unreachable");
}

std::vector<double> denoise(const ScoreModel& model, const std::vector<double>& y) {
    auto s = score(model, y);
    for (std::size_t j = 0; j < y.size(); ++j) s[j] += y[j];
    return s;
}

DenoiserFn pipeline_denoiser(const ScoreModel& model) {
    if (model.kind == ModelKind::Mlp) {
        const double c = sqrt_one_minus(model.alpha_bar_lstar);
        return [model, c](const std::vector<double>& y) {
            auto eps = noise_prediction(model, y);
            std::vector<double> out(y.size());
            for (std::size_t j = 0; j < y.size(); ++j) out[j] = y[j] - c * eps[j];
            return out;
        };
    }
    return [model](const std::vector<double>& y) { return denoise(model, y); };
}

std::vector<double> denoise_multistep(const ScoreModel& model, const DiffusionSchedule& sched,
                                      const std::vector<double>& x_from, std::uint32_t from_level,
                                      std::uint64_t seed) {
    check_level(from_level, sched.t_count);
    Rng rng(seed, stream_tag::kAncestral, 0);
    std::vector<double> x = x_from;
    for (std::uint32_t l = from_level; l >= 1; --l) {
        const double beta = sched.betas[l - 1];
        const double abar = sched.alpha_bar(l);
        const double abar_prev = sched.alpha_bar(l - 1);
        const auto eps = noise_prediction(model, x);
        const double mean_scale = 1.0 / std::sqrt(1.0 - beta);
        const double eps_scale = beta / std::sqrt(1.0 - abar);
        const double post_var = (1.0 - abar_prev) / (1.0 - abar) * beta;
        const double noise_sd = (l > 1) ? std::sqrt(post_var) : 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            double m = mean_scale * (x[j] - eps_scale * eps[j]);
            x[j] = m + (noise_sd > 0.0 ? noise_sd * rng.next_gaussian() : 0.0);
        }
    }
    return x;
}

namespace {

struct LinearParams {
    double alpha = 0.0;            // noise-head slope
    std::vector<double> beta;      // noise-head bias
};

struct MlpParams {
    std::vector<double> w1, b1, w2, b2;
};

void init_mlp(MlpParams& p, std::uint32_t n, std::uint32_t h, std::uint64_t seed) {
    Rng rng(seed, stream_tag::kTrainInit, 0);
    const double lim1 = std::sqrt(6.0 / static_cast<double>(n + h));
    const double lim2 = lim1;
    p.w1.resize(static_cast<std::size_t>(h) * n);
    p.b1.assign(h, 0.0);
    p.w2.resize(static_cast<std::size_t>(n) * h);
    p.b2.assign(n, 0.0);
    for (auto& w : p.w1) w = lim1 * (2.0 * rng.next_unit() - 1.0);
    for (auto& w : p.w2) w = lim2 * (2.0 * rng.next_unit() - 1.0);
}

std::vector<std::size_t> epoch_order(std::size_t count, std::uint64_t seed, std::uint32_t epoch) {
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed, stream_tag::kTrainShuffle, epoch);
    for (std::size_t i = count; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

// Window-10 moving average non-increasing up to Monte Carlo jitter in the
// per-epoch losses (fresh noise draws each epoch). Advisory flag only.
bool smoothed_monotone(const std::vector<double>& trace, std::size_t window) {
    if (trace.size() <= window) return true;
    std::vector<double> ma;
    for (std::size_t i = 0; i + window <= trace.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = i; j < i + window; ++j) s += trace[j];
        ma.push_back(s / static_cast<double>(window));
    }
    for (std::size_t i = 1; i < ma.size(); ++i)
        if (ma[i] > ma[i - 1] * 1.01 + 1e-12) return false;
    return true;
}

}  // namespace

std::pair<ScoreModel, TrainReport> train_score(ModelKind kind,
                                               const std::vector<std::vector<double>>& samples,
                                               const DiffusionSchedule& sched,
                                               std::uint32_t l_star, const TrainOptions& opts) {
    if (samples.size() < 2) throw std::invalid_argument("train_score: need at least 2 samples");
    check_level(l_star, sched.t_count);
    if (opts.epochs < 1 || opts.batch < 1 || !(opts.step_size > 0.0))
        throw std::invalid_argument("train_score: hyperparameters must be positive");
    if (kind == ModelKind::AnalyticGaussian)
        throw std::invalid_argument("train_score: analytic kind is not trainable");

    const std::size_t n = samples.front().size();
    for (const auto& s : samples)
        if (s.size() != n) throw std::invalid_argument("train_score: ragged sample set");

    const double abar = sched.alpha_bar(l_star);
    const double ca = std::sqrt(abar);
    const double ce = std::sqrt(1.0 - abar);
    if (!(ce > 0.0)) throw std::domain_error("train_score: alpha_bar at l* must be < 1");

    LinearParams lin;
    lin.beta.assign(n, 0.0);
    MlpParams mlp;
    if (kind == ModelKind::Mlp) init_mlp(mlp, static_cast<std::uint32_t>(n), opts.hidden, opts.seed);

    TrainReport report;
    report.sample_count = samples.size();
    report.seed = opts.seed;

    std::vector<double> x_l(n), eps(n), resid(n);
    // mlp scratch
    std::vector<double> hid, dpre, g_w1, g_b1, g_w2, g_b2;
    if (kind == ModelKind::Mlp) {
        hid.resize(opts.hidden);
        dpre.resize(opts.hidden);
        g_w1.resize(mlp.w1.size());
        g_b1.resize(mlp.b1.size());
        g_w2.resize(mlp.w2.size());
        g_b2.resize(mlp.b2.size());
    }
    double g_alpha = 0.0;
    std::vector<double> g_beta(kind == ModelKind::Linear ? n : 0, 0.0);

    // Tail-averaged iterates (Polyak-Ruppert over the last half of the
    // epochs) are what the model keeps; this removes the SGD noise floor
    // that the score conversion would otherwise amplify by 1/sqrt(1-abar).
    const std::uint32_t avg_start = opts.epochs - std::max<std::uint32_t>(1, opts.epochs / 2);
    std::size_t avg_count = 0;
    double avg_alpha = 0.0;
    std::vector<double> avg_beta(kind == ModelKind::Linear ? n : 0, 0.0);
    MlpParams avg_mlp;
    if (kind == ModelKind::Mlp) {
        avg_mlp.w1.assign(mlp.w1.size(), 0.0);
        avg_mlp.b1.assign(mlp.b1.size(), 0.0);
        avg_mlp.w2.assign(mlp.w2.size(), 0.0);
        avg_mlp.b2.assign(mlp.b2.size(), 0.0);
    }

    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::uint32_t epoch = 0; epoch < opts.epochs; ++epoch) {
        const double lr = opts.step_size / (1.0 + opts.lr_decay * static_cast<double>(epoch));
        const auto order = epoch_order(samples.size(), opts.seed, epoch);
        double epoch_loss = 0.0;
        std::size_t in_batch = 0;

        auto apply_update = [&](std::size_t batch_n) {
            const double scale = lr / static_cast<double>(batch_n);
            if (kind == ModelKind::Linear) {
                lin.alpha -= scale * g_alpha;
                if (opts.fit_bias)
                    for (std::size_t j = 0; j < n; ++j) lin.beta[j] -= scale * g_beta[j];
                g_alpha = 0.0;
                std::fill(g_beta.begin(), g_beta.end(), 0.0);
            } else {
                for (std::size_t i = 0; i < mlp.w1.size(); ++i) mlp.w1[i] -= scale * g_w1[i];
                for (std::size_t i = 0; i < mlp.b1.size(); ++i) mlp.b1[i] -= scale * g_b1[i];
                for (std::size_t i = 0; i < mlp.w2.size(); ++i) mlp.w2[i] -= scale * g_w2[i];
                for (std::size_t i = 0; i < mlp.b2.size(); ++i) mlp.b2[i] -= scale * g_b2[i];
                std::fill(g_w1.begin(), g_w1.end(), 0.0);
                std::fill(g_b1.begin(), g_b1.end(), 0.0);
                std::fill(g_w2.begin(), g_w2.end(), 0.0);
                std::fill(g_b2.begin(), g_b2.end(), 0.0);
            }
            if (epoch >= avg_start) {
                ++avg_count;
                if (kind == ModelKind::Linear) {
                    avg_alpha += lin.alpha;
                    for (std::size_t j = 0; j < n; ++j) avg_beta[j] += lin.beta[j];
                } else {
                    for (std::size_t i = 0; i < avg_mlp.w1.size(); ++i) avg_mlp.w1[i] += mlp.w1[i];
                    for (std::size_t i = 0; i < avg_mlp.b1.size(); ++i) avg_mlp.b1[i] += mlp.b1[i];
                    for (std::size_t i = 0; i < avg_mlp.w2.size(); ++i) avg_mlp.w2[i] += mlp.w2[i];
                    for (std::size_t i = 0; i < avg_mlp.b2.size(); ++i) avg_mlp.b2[i] += mlp.b2[i];
                }
            }
        };

        for (std::size_t step = 0; step < order.size(); ++step) {
            const auto& x0 = samples[order[step]];
            Rng rng(opts.seed, stream_tag::kForward,
                    static_cast<std::uint64_t>(epoch) * samples.size() + step);
            for (std::size_t j = 0; j < n; ++j) {
                eps[j] = rng.next_gaussian();
                x_l[j] = ca * x0[j] + ce * eps[j];
            }

            double loss = 0.0;
            if (kind == ModelKind::Linear) {
                for (std::size_t j = 0; j < n; ++j) {
                    const double pred = lin.alpha * x_l[j] + lin.beta[j];
                    resid[j] = pred - eps[j];
                    loss += resid[j] * resid[j];
                }
                for (std::size_t j = 0; j < n; ++j) {
                    const double gj = 2.0 * inv_n * resid[j];
                    g_alpha += gj * x_l[j];
                    g_beta[j] += gj;
                }
            } else {
                const std::size_t h = opts.hidden;
                for (std::size_t i = 0; i < h; ++i) {
                    double acc = mlp.b1[i];
                    const double* row = mlp.w1.data() + i * n;
                    for (std::size_t j = 0; j < n; ++j) acc += row[j] * x_l[j];
                    hid[i] = std::tanh(acc);
                }
                for (std::size_t j = 0; j < n; ++j) {
                    double acc = mlp.b2[j];
                    const double* row = mlp.w2.data() + j * h;
                    for (std::size_t i = 0; i < h; ++i) acc += row[i] * hid[i];
                    resid[j] = acc - eps[j];
                    loss += resid[j] * resid[j];
                }
                std::fill(dpre.begin(), dpre.end(), 0.0);
                for (std::size_t j = 0; j < n; ++j) {
                    const double gj = 2.0 * inv_n * resid[j];
                    double* row = g_w2.data() + j * h;
                    const double* w2row = mlp.w2.data() + j * h;
                    for (std::size_t i = 0; i < h; ++i) {
                        row[i] += gj * hid[i];
                        dpre[i] += w2row[i] * gj;
                    }
                    g_b2[j] += gj;
                }
                for (std::size_t i = 0; i < h; ++i) {
                    const double di = dpre[i] * (1.0 - hid[i] * hid[i]);
                    double* row = g_w1.data() + i * n;
                    for (std::size_t j = 0; j < n; ++j) row[j] += di * x_l[j];
                    g_b1[i] += di;
                }
            }
            epoch_loss += loss * inv_n;
            if (++in_batch == opts.batch) {
                apply_update(in_batch);
                in_batch = 0;
            }
        }
        if (in_batch > 0) apply_update(in_batch);

        epoch_loss /= static_cast<double>(samples.size());
        if (!std::isfinite(epoch_loss))
            throw std::runtime_error("train_score: loss diverged (non-finite)");
        report.loss_trace.push_back(epoch_loss);
    }
    report.final_loss = report.loss_trace.back();
    report.smoothed_monotone = smoothed_monotone(report.loss_trace, 10);

    const double inv_avg = 1.0 / static_cast<double>(avg_count);
    ScoreModel model;
    model.n = static_cast<std::uint32_t>(n);
    model.l_star = l_star;
    model.alpha_bar_lstar = abar;
    model.seed = opts.seed;
    if (kind == ModelKind::Linear) {
        model.kind = ModelKind::Linear;
        model.slope = -(avg_alpha * inv_avg) / ce;
        model.bias.resize(n);
        for (std::size_t j = 0; j < n; ++j) model.bias[j] = -(avg_beta[j] * inv_avg) / ce;
    } else {
        model.kind = ModelKind::Mlp;
        model.hidden = opts.hidden;
        model.w1 = std::move(avg_mlp.w1);
        model.b1 = std::move(avg_mlp.b1);
        model.w2 = std::move(avg_mlp.w2);
        model.b2 = std::move(avg_mlp.b2);
        for (auto& v : model.w1) v *= inv_avg;
        for (auto& v : model.b1) v *= inv_avg;
        for (auto& v : model.w2) v *= inv_avg;
        for (auto& v : model.b2) v *= inv_avg;
    }
    return {std::move(model), std::move(report)};
}

double evaluate_noise_loss(const ScoreModel& model,
                           const std::vector<std::vector<double>>& samples,
                           const DiffusionSchedule& sched, std::uint32_t l_star,
                           std::uint64_t seed) {
    if (samples.empty()) throw std::invalid_argument("evaluate_noise_loss: no samples");
    check_level(l_star, sched.t_count);
    const double abar = sched.alpha_bar(l_star);
    const double ca = std::sqrt(abar);
    const double ce = std::sqrt(1.0 - abar);
    const std::size_t n = samples.front().size();
    std::vector<double> x_l(n), eps(n);
    double total = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        Rng rng(seed, stream_tag::kForward, i);
        for (std::size_t j = 0; j < n; ++j) {
            eps[j] = rng.next_gaussian();
            x_l[j] = ca * samples[i][j] + ce * eps[j];
        }
        const auto pred = noise_prediction(model, x_l);
        double loss = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = pred[j] - eps[j];
            loss += d * d;
        }
        total += loss / static_cast<double>(n);
    }
    return total / static_cast<double>(samples.size());
}

std::string save_checkpoint(const ScoreModel& model) {
    nlohmann::json j;
    j["kind"] = model_kind_name(model.kind);
    j["n"] = model.n;
    j["l_star"] = model.l_star;
    j["alpha_bar_lstar"] = model.alpha_bar_lstar;
    j["seed"] = model.seed;
    std::vector<double> params;
    switch (model.kind) {
        case ModelKind::AnalyticGaussian:
            params = {model.sigma2};
            break;
        case ModelKind::Linear:
            params.push_back(model.slope);
            params.insert(params.end(), model.bias.begin(), model.bias.end());
            break;
        case ModelKind::Mlp:
            j["hidden"] = model.hidden;
            params.insert(params.end(), model.w1.begin(), model.w1.end());
            params.insert(params.end(), model.b1.begin(), model.b1.end());
            params.insert(params.end(), model.w2.begin(), model.w2.end());
            params.insert(params.end(), model.b2.begin(), model.b2.end());
            break;
    }
    j["params"] = params;
    return j.dump(2) + "\n";
}

ScoreModel load_checkpoint(const std::string& json_text) {
    const auto j = nlohmann::json::parse(json_text);
    ScoreModel m;
    m.kind = model_kind_from_name(j.at("kind").get<std::string>());
    m.n = j.at("n").get<std::uint32_t>();
    m.l_star = j.at("l_star").get<std::uint32_t>();
    m.alpha_bar_lstar = j.at("alpha_bar_lstar").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    const auto params = j.at("params").get<std::vector<double>>();
    switch (m.kind) {
        case ModelKind::AnalyticGaussian:
            if (params.size() != 1) throw std::invalid_argument("checkpoint: bad param count");
            m.sigma2 = params[0];
            break;
        case ModelKind::Linear:
            if (params.size() != static_cast<std::size_t>(m.n) + 1)
                throw std::invalid_argument("checkpoint: bad param count");
            m.slope = params[0];
            m.bias.assign(params.begin() + 1, params.end());
            break;
        case ModelKind::Mlp: {
            m.hidden = j.at("hidden").get<std::uint32_t>();
            const std::size_t n = m.n, h = m.hidden;
            if (params.size() != 2 * n * h + h + n)
                throw std::invalid_argument("checkpoint: bad param count");
            auto it = params.begin();
            m.w1.assign(it, it + static_cast<std::ptrdiff_t>(h * n));
            it += static_cast<std::ptrdiff_t>(h * n);
            m.b1.assign(it, it + static_cast<std::ptrdiff_t>(h));
            it += static_cast<std::ptrdiff_t>(h);
            m.w2.assign(it, it + static_cast<std::ptrdiff_t>(n * h));
            it += static_cast<std::ptrdiff_t>(n * h);
            m.b2.assign(it, it + static_cast<std::ptrdiff_t>(n));
            break;
        }
    }
    return m;
}

void save_checkpoint_file(const ScoreModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << save_checkpoint(model);
}

ScoreModel load_checkpoint_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_checkpoint(ss.str());
}

}  // namespace urabound::diffusion
