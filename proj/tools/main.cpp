// urabound command-line front end.
//
// Subcommands: train, constants, curve-ka, curve-eps, eval, selftest, replay.
// Every command resolves its settings (config file plus flag overrides) into
// a RunManifest written next to the outputs; `replay <manifest>` re-executes
// a recorded run and reproduces the data files byte for byte.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "urabound/bound.hpp"
#include "urabound/config_file.hpp"
#include "urabound/constants.hpp"
#include "urabound/curve.hpp"
#include "urabound/diffusion.hpp"
#include "urabound/manifest.hpp"
#include "urabound/numerics.hpp"
#include "urabound/parallel.hpp"
#include "urabound/sysmodel.hpp"

using nlohmann::json;
using namespace urabound;

namespace {

struct CliError : std::runtime_error {
    int code;
    CliError(int c, const std::string& what) : std::runtime_error(what), code(c) {}
};

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CliError(2, "config: cannot write output file " + path);
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CliError(2, "config: cannot read file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// --- JSON <-> settings ------------------------------------------------------

json config_to_json(const sysmodel::SystemConfig& c) {
    return json{{"ka", c.ka},           {"n", c.n},
                {"k", c.k},             {"p", c.p},
                {"p_prime", c.p_prime}, {"eps_target", c.eps_target},
                {"seed", c.seed}};
}

sysmodel::SystemConfig config_from_json(const json& j) {
    sysmodel::SystemConfig c;
    c.ka = j.at("ka").get<std::uint32_t>();
    c.n = j.at("n").get<std::uint32_t>();
    c.k = j.at("k").get<std::uint32_t>();
    c.p = j.at("p").get<double>();
    c.p_prime = j.at("p_prime").get<double>();
    c.eps_target = j.at("eps_target").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

json bound_opts_to_json(const bound::BoundOptions& o) {
    return json{{"kernel", bound::kernel_name(o.kernel)},
                {"idens", bound::idens_name(o.idens)},
                {"q2_mass", bound::q2_mass_name(o.q2_mass)},
                {"enable_q1", o.enable_q1},
                {"enable_q2", o.enable_q2},
                {"q2_skip_factor", o.q2_skip_factor},
                {"tail_skip_factor", o.tail_skip_factor},
                {"mc_samples", o.mc.samples},
                {"mc_seed", o.mc.seed},
                {"subset_budget", o.mc.subset_budget},
                {"pool_size", o.mc.pool_size},
                {"pool_subset_budget", o.mc.pool_subset_budget},
                {"path", o.mc.path == bound::McOptions::Path::Auto
                             ? "auto"
                             : (o.mc.path == bound::McOptions::Path::Full ? "full" : "fast")}};
}

bound::BoundOptions bound_opts_from_json(const json& j) {
    bound::BoundOptions o;
    const std::string kern = j.at("kernel").get<std::string>();
    o.kernel = kern == "split"      ? bound::PairwiseKernel::Split
               : kern == "gaussavg" ? bound::PairwiseKernel::GaussianAverage
                                    : bound::PairwiseKernel::Baseline;
    o.idens = j.at("idens").get<std::string>() == "raw"
                  ? bound::InfoDensityVariant::Raw
                  : bound::InfoDensityVariant::Canonical;
    o.q2_mass = j.at("q2_mass").get<std::string>() == "product" ? bound::Q2MassForm::Product
                                                                : bound::Q2MassForm::Half;
    o.enable_q1 = j.at("enable_q1").get<bool>();
    o.enable_q2 = j.at("enable_q2").get<bool>();
    o.q2_skip_factor = j.at("q2_skip_factor").get<double>();
    o.tail_skip_factor = j.at("tail_skip_factor").get<double>();
    o.mc.samples = j.at("mc_samples").get<std::size_t>();
    o.mc.seed = j.at("mc_seed").get<std::uint64_t>();
    o.mc.subset_budget = j.at("subset_budget").get<std::size_t>();
    o.mc.pool_size = j.at("pool_size").get<std::size_t>();
    o.mc.pool_subset_budget = j.at("pool_subset_budget").get<std::size_t>();
    const std::string path = j.at("path").get<std::string>();
    o.mc.path = path == "auto"   ? bound::McOptions::Path::Auto
                : path == "full" ? bound::McOptions::Path::Full
                                 : bound::McOptions::Path::Fast;
    return o;
}

void finish_manifest(const std::string& command, json params,
                     const std::vector<std::string>& outputs, double runtime_ms,
                     const std::string& manifest_path) {
    manifest::RunManifest m;
    m.command = command;
    m.params = std::move(params);
    m.params.erase("runtime_ms");  // the sealed body stays runtime-free
    m.outputs = outputs;
    manifest::seal(m);
    m.params["runtime_ms"] = std::round(runtime_ms);
    m.write(manifest_path);
}

// --- command runners (shared by the flag parser and replay) -----------------

void run_train(const json& params) {
    const auto cfg = config_from_json(params.at("config"));
    cfg.validate();
    const auto kind = diffusion::model_kind_from_name(params.at("model").get<std::string>());
    const std::size_t n_samples = params.at("samples").get<std::size_t>();
    const std::string out = params.at("out").get<std::string>();
    const auto t0 = now_ms();

    const auto sched = diffusion::default_schedule(cfg, params.at("levels").get<std::uint32_t>());

    diffusion::ScoreModel model;
    diffusion::TrainReport report;
    if (kind == diffusion::ModelKind::AnalyticGaussian) {
        // No training: emit the exact score of the configured y-marginal.
        model = diffusion::ScoreModel::analytic(cfg.n, cfg.y_variance(), sched.l_star,
                                                sched.alpha_bar_lstar());
        model.seed = params.at("seed").get<std::uint64_t>();
        report.sample_count = 0;
        report.seed = model.seed;
    } else {
        if (n_samples < 2) throw CliError(2, "config: --samples must be >= 2");
        const auto samples =
            sysmodel::sample_y_marginal(cfg, n_samples, params.at("seed").get<std::uint64_t>());
        diffusion::TrainOptions topts;
        topts.epochs = params.at("epochs").get<std::uint32_t>();
        topts.step_size = params.at("step_size").get<double>();
        topts.lr_decay = params.at("lr_decay").get<double>();
        topts.batch = params.at("batch").get<std::uint32_t>();
        topts.hidden = params.at("hidden").get<std::uint32_t>();
        topts.fit_bias = params.value("fit_bias", true);
        topts.seed = params.at("seed").get<std::uint64_t>();
        auto trained = diffusion::train_score(kind, samples, sched, sched.l_star, topts);
        model = std::move(trained.first);
        report = std::move(trained.second);
    }

    diffusion::save_checkpoint_file(model, out);
    json rep;
    rep["final_loss"] = report.final_loss;
    rep["loss_trace"] = report.loss_trace;
    rep["sample_count"] = report.sample_count;
    rep["seed"] = report.seed;
    rep["smoothed_monotone"] = report.smoothed_monotone;
    write_file(out + ".report.json", rep.dump(2) + "\n");
    finish_manifest("train", params, {out, out + ".report.json"}, now_ms() - t0,
                    out + ".manifest.json");
}

void run_constants(const json& params) {
    const auto cfg = config_from_json(params.at("config"));
    cfg.validate();
    const std::string ckpt_path = params.at("checkpoint").get<std::string>();
    const std::string out = params.at("out").get<std::string>();
    const auto t0 = now_ms();

    const auto model = diffusion::load_checkpoint_file(ckpt_path);
    if (model.n != cfg.n)
        throw CliError(2, "config: checkpoint dimension " + std::to_string(model.n) +
                              " does not match config n " + std::to_string(cfg.n));

    constants::EstimateOptions opts;
    opts.n_samples = params.at("n_samples").get<std::size_t>();
    if (opts.n_samples < 5 * static_cast<std::size_t>(cfg.n))
        std::fprintf(stderr,
                     "warning: n_samples < 5n; the empirical top eigenvalue is inflated by "
                     "dimensional sampling noise (Marchenko-Pastur), J*/K_E will read high\n");
    opts.max_iters = params.at("power_iters").get<std::uint32_t>();
    opts.seed = params.at("seed").get<std::uint64_t>();
    opts.threads = params.at("threads").get<unsigned>();
    opts.k_e_as_eigenvalue = params.at("ke_convention").get<std::string>() == "eig";

    const std::string denoiser_kind = params.at("denoiser").get<std::string>();
    constants::DenoiserConstants c;
    c.j_star = constants::estimate_J(model, cfg, opts);
    if (denoiser_kind == "native") {
        c.k_e = constants::estimate_K_E(model, cfg, opts);
    } else if (denoiser_kind == "score") {
        c.k_e = constants::estimate_K_E(
            [&](const std::vector<double>& y) { return diffusion::denoise(model, y); }, model,
            cfg, opts);
    } else if (denoiser_kind.rfind("multistep:", 0) == 0) {
        const auto steps = static_cast<std::uint32_t>(
            std::stoul(denoiser_kind.substr(std::string("multistep:").size())));
        const auto sched = diffusion::default_schedule(cfg);
        if (steps < 1 || steps > sched.t_count)
            throw CliError(2, "config: multistep level out of range");
        c.k_e = constants::estimate_K_E(
            [&, steps](const std::vector<double>& y) {
                return diffusion::denoise_multistep(model, sched, y, steps, opts.seed);
            },
            model, cfg, opts);
    } else {
        throw CliError(2, "config: unknown denoiser kind " + denoiser_kind);
    }
    c.v_star = constants::v_star(c.j_star, c.k_e);
    c.sample_count = opts.n_samples;
    c.power_iters = opts.max_iters;
    c.seed = opts.seed;

    write_file(out, curve::constants_json(c, manifest::file_checksum_hex(ckpt_path)));
    finish_manifest("constants", params, {out}, now_ms() - t0, out + ".manifest.json");
}

void run_eval(const json& params) {
    auto cfg = config_from_json(params.at("config"));
    cfg.validate();
    const std::string out = params.at("out").get<std::string>();
    const double v_star = params.at("v_star").get<double>();
    auto opts = bound_opts_from_json(params.at("bound"));
    opts.mc.threads = params.at("threads").get<unsigned>();
    const auto t0 = now_ms();

    const auto bd = opts.kernel == bound::PairwiseKernel::Baseline
                        ? bound::baseline_epsilon_bound(cfg, opts)
                        : bound::epsilon_bound(cfg, v_star, opts);
    constants::DenoiserConstants c;
    c.v_star = v_star;
    c.j_star = params.value("j_star", 0.0);
    c.k_e = params.value("k_e", 0.0);
    write_file(out, curve::breakdown_json(cfg, c, bd));
    finish_manifest("eval", params, {out}, now_ms() - t0, out + ".manifest.json");
    std::printf("eps_total %.6g (q0 %.6g) at p %.6g\n", bd.eps_total, bd.q0.linear(), cfg.p);
}

bound::SolverOptions solver_from_json(const json& j) {
    bound::SolverOptions s;
    s.lo_db = j.at("lo_db").get<double>();
    s.hi_db = j.at("hi_db").get<double>();
    s.tol_db = j.at("tol_db").get<double>();
    s.p_prime_ratios = j.at("p_prime_ratios").get<std::vector<double>>();
    return s;
}

void run_curve_ka(const json& params) {
    auto shape = config_from_json(params.at("config"));
    const std::string out = params.at("out").get<std::string>();
    const auto ka_list = params.at("ka_list").get<std::vector<std::uint32_t>>();
    const double target = params.at("target_eps").get<double>();
    const double v_star = params.at("v_star").get<double>();
    auto opts = bound_opts_from_json(params.at("bound"));
    opts.mc.threads = params.at("threads").get<unsigned>();
    const auto solver = solver_from_json(params.at("solver"));
    const auto t0 = now_ms();

    const auto variants =
        curve::standard_variants(v_star, params.at("include_gaussavg").get<bool>());
    const auto rows = curve::run_curve_ka(shape, ka_list, target, variants, solver, opts);
    write_file(out, curve::curve_ka_csv(rows));
    std::size_t failures = 0;
    for (const auto& r : rows)
        if (r.bracket_failed) ++failures;
    if (failures > 0)
        std::fprintf(stderr, "warning: bracket_failure on %zu row(s), marked nan\n", failures);
    finish_manifest("curve-ka", params, {out}, now_ms() - t0, out + ".manifest.json");
}

void run_curve_eps(const json& params) {
    auto shape = config_from_json(params.at("config"));
    const std::string out = params.at("out").get<std::string>();
    const auto grid = params.at("ebn0_grid").get<std::vector<double>>();
    const double v_star = params.at("v_star").get<double>();
    const double ratio = params.at("p_prime_ratio").get<double>();
    auto opts = bound_opts_from_json(params.at("bound"));
    opts.mc.threads = params.at("threads").get<unsigned>();
    const auto t0 = now_ms();

    const auto variants =
        curve::standard_variants(v_star, params.at("include_gaussavg").get<bool>());
    const auto rows = curve::run_curve_eps(shape, grid, ratio, variants, opts);
    write_file(out, curve::curve_eps_csv(rows));
    finish_manifest("curve-eps", params, {out}, now_ms() - t0, out + ".manifest.json");
}

// --- selftest ---------------------------------------------------------------

int run_selftest() {
    int failures = 0;
    auto report = [&](const char* name, bool ok) {
        std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name);
        if (!ok) ++failures;
    };

    {
        bool ok = true;
        for (unsigned n = 2; n <= 120 && ok; ++n)
            for (unsigned k = 1; k < n && ok; ++k) {
                const double lhs = numerics::log_sum_exp(numerics::log_binomial(n - 1, k - 1),
                                                         numerics::log_binomial(n - 1, k));
                const double rhs = numerics::log_binomial(n, k);
                ok = std::fabs(lhs - rhs) <= 1e-9 * std::max(1.0, std::fabs(rhs));
            }
        report("pascal identity (log scale)", ok);
    }
    {
        bool ok = true;
        for (double x = 0.0; x <= 40.0 && ok; x += 0.5)
            ok = std::fabs(numerics::reg_upper_gamma(1.0, x) - std::exp(-x)) <=
                 1e-12 * std::max(std::exp(-x), 1e-300);
        for (double a : {2.0, 64.0, 4096.0})
            for (double f : {0.5, 1.0, 1.4})
                ok = ok && std::fabs(numerics::reg_upper_gamma(a, a * f) +
                                     numerics::reg_lower_gamma(a, a * f) - 1.0) <= 1e-12;
        report("regularized gamma identities", ok);
    }
    {
        bool ok = true;
        std::mt19937_64 gen(7);
        std::uniform_int_distribution<std::uint32_t> ka_d(2, 24), n_d(1, 200);
        std::uniform_real_distribution<double> pp_d(0.1, 1.5), v_d(1.0, 2.5);
        for (int i = 0; i < 20 && ok; ++i) {
            sysmodel::SystemConfig c;
            c.ka = ka_d(gen);
            c.n = n_d(gen);
            c.k = 16;
            c.p_prime = pp_d(gen);
            c.p = c.p_prime * 1.5;
            const std::uint32_t t = 1 + static_cast<std::uint32_t>(gen() % c.ka);
            const double v = v_d(gen);
            const double a = numerics::log_binomial(c.ka, t);
            const double b = numerics::log_binomial_real(c.m_real() - c.ka, t) +
                             bound::pairwise_bound(t, c.p_prime, v, c.n).log_value;
            double grid = 0.0;
            for (int ii = 0; ii <= 100; ++ii)
                for (int jj = 0; jj <= 100; ++jj)
                    grid = std::min(grid, 0.01 * ii * a + 0.0001 * ii * jj * b);
            const double corner = bound::q1_term(c, t, v).value.log_value;
            ok = std::fabs(corner - std::min(grid, 0.0)) <= 1e-9 * std::max(1.0, std::fabs(grid));
        }
        report("q1 corner optimum = grid search", ok);
    }
    {
        bool ok = true;
        sysmodel::SystemConfig c;
        c.ka = 4;
        c.n = 32;
        c.k = 6;
        c.p = 1.2;
        c.p_prime = 1.0;
        for (std::uint64_t i = 0; i < 50 && ok; ++i) {
            const auto s = bound::sample_information_density(c, 2, 1234, i);
            const auto draw = sysmodel::sample_channel_output(c, 1234, i);
            double z2 = 0.0;
            for (double z : draw.noise) z2 += z * z;
            ok = std::fabs(s.quad2 - z2) <= 1e-9 * z2;
        }
        report("information density quad2 = |Z|^2", ok);
    }
    {
        sysmodel::SystemConfig c;
        c.ka = 3;
        c.n = 16;
        c.k = 6;
        c.p = 1.0;
        c.p_prime = 0.8;
        const auto a = sysmodel::sample_channel_output(c, 99, 1);
        const auto b = sysmodel::sample_channel_output(c, 99, 1);
        report("channel sampler determinism", a.y == b.y && a.codewords == b.codewords);
    }
    {
        const auto m = diffusion::ScoreModel::analytic(5, 2.5, 3, 0.6);
        const auto back = diffusion::load_checkpoint(diffusion::save_checkpoint(m));
        report("checkpoint round trip",
               diffusion::save_checkpoint(back) == diffusion::save_checkpoint(m));
    }
    if (failures > 0) {
        std::fprintf(stderr, "error: numerical: selftest failed %d check(s)\n", failures);
        return 3;
    }
    return 0;
}

void dispatch(const std::string& command, const json& params) {
    if (command == "train") run_train(params);
    else if (command == "constants") run_constants(params);
    else if (command == "eval") run_eval(params);
    else if (command == "curve-ka") run_curve_ka(params);
    else if (command == "curve-eps") run_curve_eps(params);
    else throw CliError(2, "config: manifest names unknown command " + command);
}

// Rewrites output paths into a directory (basenames preserved).
json redirect_outputs(json params, const std::string& dir) {
    auto base = [](const std::string& p) {
        const auto pos = p.find_last_of('/');
        return pos == std::string::npos ? p : p.substr(pos + 1);
    };
    if (params.contains("out"))
        params["out"] = dir + "/" + base(params["out"].get<std::string>());
    return params;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Achievability-bound evaluator for unsourced Gaussian multiple access"};
    app.require_subcommand(1);

    std::string config_path, checkpoint, constants_path, out_path, manifest_path;
    std::string model_name = "linear", ke_convention = "sqrt", denoiser = "native";
    std::string kernel_name = "split", idens_name = "raw", q2_mass_name = "product";
    std::string path_name = "auto", ka_list_str, grid_str, out_dir = ".";
    std::size_t n_samples = 50000, mc_samples = 10000;
    std::uint64_t seed = 1;
    std::uint32_t epochs = 24, batch = 64, hidden = 64, levels = 100, power_iters = 100;
    double step_size = 0.1, lr_decay = 0.3;
    double v_star_flag = -1.0, target_eps = -1.0, ratio_flag = -1.0;
    double lo_db = -2.0, hi_db = 12.0, tol_db = 0.01;
    std::vector<double> ratios{0.80, 0.85, 0.90, 0.95, 0.99};
    unsigned threads = default_thread_count();
    bool include_gaussavg = false, no_q2 = false, q2_only = false, no_bias = false;
    std::size_t subset_budget = 100000, pool_size = 16, pool_subset_budget = 200;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* opt = cmd->add_option("--config", config_path, "flat key-value config file");
        if (needs_config) opt->required();
        cmd->add_option("--threads", threads, "worker cap (URABOUND_THREADS also honored)");
        cmd->add_option("--seed", seed, "seed override");
    };
    auto add_bound_flags = [&](CLI::App* cmd) {
        cmd->add_option("--samples", mc_samples, "Monte Carlo samples per q2 estimate");
        cmd->add_option("--kernel", kernel_name, "split|gaussavg|baseline");
        cmd->add_option("--idens", idens_name, "raw|canonical");
        cmd->add_option("--q2-variant", q2_mass_name, "product|half");
        cmd->add_option("--mc-path", path_name, "auto|full|fast");
        cmd->add_option("--subset-budget", subset_budget, "exact enumeration cap");
        cmd->add_option("--pool-size", pool_size, "candidate pool (statistics path)");
        cmd->add_option("--pool-budget", pool_subset_budget, "pool enumeration cap");
        cmd->add_flag("--no-q2", no_q2, "disable the q2 term");
        cmd->add_flag("--q2-only", q2_only, "disable the q1 term");
        cmd->add_flag("--include-gaussavg", include_gaussavg,
                      "also emit the Gaussian-average kernel variant");
    };

    auto* c_train = app.add_subcommand("train", "train the score head on channel-output samples");
    add_common(c_train, true);
    c_train->add_option("--model", model_name, "analytic|linear|mlp")->capture_default_str();
    c_train->add_option("--samples", n_samples, "training sample count");
    c_train->add_option("--epochs", epochs);
    c_train->add_option("--step-size", step_size);
    c_train->add_option("--lr-decay", lr_decay);
    c_train->add_option("--batch", batch);
    c_train->add_option("--hidden", hidden, "mlp hidden width");
    c_train->add_flag("--no-bias", no_bias, "freeze the linear bias at zero");
    c_train->add_option("--levels", levels, "schedule length T");
    c_train->add_option("--out", out_path, "checkpoint path")->required();

    auto* c_const = app.add_subcommand("constants", "estimate J*, K_E, v* for a checkpoint");
    add_common(c_const, true);
    c_const->add_option("--checkpoint", checkpoint)->required();
    c_const->add_option("--n-samples", n_samples, "estimation sample count");
    c_const->add_option("--power-iters", power_iters);
    c_const->add_option("--ke-convention", ke_convention, "sqrt|eig");
    c_const->add_option("--denoiser", denoiser, "native|score|multistep:<level>");
    c_const->add_option("--out", out_path)->required();

    auto* c_eval = app.add_subcommand("eval", "evaluate the bound at a single operating point");
    add_common(c_eval, true);
    c_eval->add_option("--constants", constants_path, "constants record (for v*)");
    c_eval->add_option("--v-star", v_star_flag, "explicit v* (overrides --constants)");
    add_bound_flags(c_eval);
    c_eval->add_option("--out", out_path)->required();

    auto* c_cka = app.add_subcommand("curve-ka", "required Eb/N0 vs number of active users");
    add_common(c_cka, true);
    c_cka->add_option("--constants", constants_path, "constants record (for v*)");
    c_cka->add_option("--v-star", v_star_flag, "explicit v*");
    c_cka->add_option("--ka-list", ka_list_str, "comma list, e.g. 25,50,75")->required();
    c_cka->add_option("--target-eps", target_eps, "target per-user error");
    c_cka->add_option("--lo-db", lo_db);
    c_cka->add_option("--hi-db", hi_db);
    c_cka->add_option("--tol-db", tol_db);
    c_cka->add_option("--ratios", ratios, "P'/P grid")->delimiter(',');
    add_bound_flags(c_cka);
    c_cka->add_option("--out", out_path)->required();

    auto* c_ceps = app.add_subcommand("curve-eps", "error bound vs Eb/N0");
    add_common(c_ceps, true);
    c_ceps->add_option("--constants", constants_path, "constants record (for v*)");
    c_ceps->add_option("--v-star", v_star_flag, "explicit v*");
    c_ceps->add_option("--ebn0-grid", grid_str, "comma list or lo:step:hi")->required();
    c_ceps->add_option("--ratio", ratio_flag, "P'/P for the sweep");
    add_bound_flags(c_ceps);
    c_ceps->add_option("--out", out_path)->required();

    auto* c_self = app.add_subcommand("selftest", "run the built-in property checks");
    (void)c_self;

    auto* c_replay = app.add_subcommand("replay", "re-execute a recorded run manifest");
    c_replay->add_option("manifest", manifest_path)->required();
    c_replay->add_option("--out-dir", out_dir, "redirect outputs into this directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_self->parsed()) return run_selftest();

        if (c_replay->parsed()) {
            const auto m = manifest::RunManifest::load(manifest_path);
            json params = m.params;
            params.erase("runtime_ms");
            dispatch(m.command, redirect_outputs(params, out_dir));
            return 0;
        }

        // Resolve config file + flag overrides.
        config::ResolvedConfig rc;
        if (!config_path.empty()) {
            auto kv = config::KeyValueFile::load(config_path);
            rc = config::resolve_config(kv);
        }
        bool seed_overridden = false;
        for (auto* cmd : {c_train, c_const, c_eval, c_cka, c_ceps})
            if (cmd->parsed() && cmd->count("--seed")) seed_overridden = true;
        if (seed_overridden) rc.system.seed = seed;

        bound::BoundOptions bopts = rc.bound_opts;
        bopts.mc.samples = mc_samples;
        bopts.mc.seed = rc.system.seed;
        bopts.mc.subset_budget = subset_budget;
        bopts.mc.pool_size = pool_size;
        bopts.mc.pool_subset_budget = pool_subset_budget;
        bopts.enable_q2 = !no_q2;
        bopts.enable_q1 = !q2_only;
        bool kernel_flagged = false;
        for (auto* cmd : {c_eval, c_cka, c_ceps})
            if (cmd->parsed() && cmd->count("--kernel")) kernel_flagged = true;
        if (kernel_flagged) {
            if (kernel_name == "gaussavg") bopts.kernel = bound::PairwiseKernel::GaussianAverage;
            else if (kernel_name == "baseline") bopts.kernel = bound::PairwiseKernel::Baseline;
            else if (kernel_name == "split") bopts.kernel = bound::PairwiseKernel::Split;
            else throw CliError(2, "config: unknown kernel " + kernel_name);
        }
        if (idens_name == "canonical") bopts.idens = bound::InfoDensityVariant::Canonical;
        if (q2_mass_name == "half") bopts.q2_mass = bound::Q2MassForm::Half;
        if (path_name == "full") bopts.mc.path = bound::McOptions::Path::Full;
        else if (path_name == "fast") bopts.mc.path = bound::McOptions::Path::Fast;

        double v_star = 1.0;
        double j_star = 0.0, k_e = 0.0;
        if (!constants_path.empty()) {
            const auto c = curve::constants_from_json(read_file(constants_path));
            v_star = c.v_star;
            j_star = c.j_star;
            k_e = c.k_e;
        }
        if (v_star_flag >= 1.0) v_star = v_star_flag;

        if (c_train->parsed()) {
            json params;
            params["config"] = config_to_json(rc.system);
            params["model"] = model_name;
            params["samples"] = n_samples;
            params["seed"] = rc.system.seed;
            params["epochs"] = epochs;
            params["step_size"] = step_size;
            params["lr_decay"] = lr_decay;
            params["batch"] = batch;
            params["hidden"] = hidden;
            params["fit_bias"] = !no_bias;
            params["levels"] = levels;
            params["out"] = out_path;
            run_train(params);
        } else if (c_const->parsed()) {
            json params;
            params["config"] = config_to_json(rc.system);
            params["checkpoint"] = checkpoint;
            params["n_samples"] = n_samples;
            params["power_iters"] = power_iters;
            params["seed"] = rc.system.seed;
            params["threads"] = threads;
            params["ke_convention"] = ke_convention;
            params["denoiser"] = denoiser;
            params["out"] = out_path;
            run_constants(params);
        } else if (c_eval->parsed()) {
            if (!rc.has_power) throw CliError(2, "config: eval needs p or ebn0_db");
            json params;
            params["config"] = config_to_json(rc.system);
            params["v_star"] = v_star;
            params["j_star"] = j_star;
            params["k_e"] = k_e;
            params["bound"] = bound_opts_to_json(bopts);
            params["threads"] = threads;
            params["out"] = out_path;
            run_eval(params);
        } else if (c_cka->parsed()) {
            std::vector<std::uint32_t> ka_list;
            std::stringstream ss(ka_list_str);
            for (std::string tok; std::getline(ss, tok, ',');)
                ka_list.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
            if (ka_list.empty()) throw CliError(2, "config: empty --ka-list");
            json params;
            params["config"] = config_to_json(rc.system);
            params["ka_list"] = ka_list;
            params["target_eps"] = target_eps > 0.0 ? target_eps : rc.system.eps_target;
            params["v_star"] = v_star;
            params["include_gaussavg"] = include_gaussavg;
            params["bound"] = bound_opts_to_json(bopts);
            params["solver"] = json{{"lo_db", lo_db},
                                    {"hi_db", hi_db},
                                    {"tol_db", tol_db},
                                    {"p_prime_ratios", ratios}};
            params["threads"] = threads;
            params["out"] = out_path;
            run_curve_ka(params);
        } else if (c_ceps->parsed()) {
            std::vector<double> grid;
            if (grid_str.find(':') != std::string::npos) {
                double lo, step, hi;
                if (std::sscanf(grid_str.c_str(), "%lf:%lf:%lf", &lo, &step, &hi) != 3 ||
                    step <= 0.0)
                    throw CliError(2, "config: bad --ebn0-grid range");
                for (double x = lo; x <= hi + 1e-12; x += step) grid.push_back(x);
            } else {
                std::stringstream ss(grid_str);
                for (std::string tok; std::getline(ss, tok, ',');)
                    grid.push_back(std::stod(tok));
            }
            double ratio = ratio_flag;
            if (!(ratio > 0.0)) ratio = rc.has_power ? rc.system.p_prime / rc.system.p : 0.9;
            json params;
            params["config"] = config_to_json(rc.system);
            params["ebn0_grid"] = grid;
            params["p_prime_ratio"] = ratio;
            params["v_star"] = v_star;
            params["include_gaussavg"] = include_gaussavg;
            params["bound"] = bound_opts_to_json(bopts);
            params["threads"] = threads;
            params["out"] = out_path;
            run_curve_eps(params);
        }
        return 0;
    } catch (const CliError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.code;
    } catch (const bound::BracketFailure& e) {
        std::fprintf(stderr, "error: numerical: bracket failure eps_lo=%.6g eps_hi=%.6g\n",
                     e.eps_lo, e.eps_hi);
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: config: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: config: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: numerical: %s\n", e.what());
        return 3;
    }
}
