#include "urabound/curve.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace urabound::curve {

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

std::vector<Variant> standard_variants(double v_star_measured, bool include_gaussavg) {
    std::vector<Variant> vs;
    vs.push_back({"denoiser", bound::PairwiseKernel::Split, v_star_measured});
    vs.push_back({"denoiser_v1", bound::PairwiseKernel::Split, 1.0});
    if (include_gaussavg)
        vs.push_back({"denoiser_gaussavg", bound::PairwiseKernel::GaussianAverage, v_star_measured});
    vs.push_back({"baseline", bound::PairwiseKernel::Baseline, 1.0});
    return vs;
}

std::vector<CurveKaRow> run_curve_ka(const sysmodel::SystemConfig& shape,
                                     const std::vector<std::uint32_t>& ka_list,
                                     double target_eps, const std::vector<Variant>& variants,
                                     const bound::SolverOptions& solver,
                                     const bound::BoundOptions& opts) {
    if (ka_list.empty()) throw std::invalid_argument("curve-ka: empty ka list");
    std::vector<CurveKaRow> rows;
    for (const std::uint32_t ka : ka_list) {
        sysmodel::SystemConfig cfg = shape;
        cfg.ka = ka;
        cfg.eps_target = target_eps;
        for (const auto& var : variants) {
            bound::BoundOptions bo = opts;
            bo.kernel = var.kernel;
            CurveKaRow row;
            row.ka = ka;
            row.variant = var.name;
            row.v_star = var.v_star;
            try {
                const auto res = bound::required_ebn0(cfg, target_eps, var.v_star, solver, bo);
                row.ebn0_db = res.ebn0_db;
                row.eps_total = res.witness.eps_total;
                row.q0 = res.witness.q0.linear();
                row.best_p_prime = res.best_p_prime;
            } catch (const bound::BracketFailure&) {
                row.ebn0_db = std::numeric_limits<double>::quiet_NaN();
                row.eps_total = std::numeric_limits<double>::quiet_NaN();
                row.q0 = std::numeric_limits<double>::quiet_NaN();
                row.best_p_prime = std::numeric_limits<double>::quiet_NaN();
                row.bracket_failed = true;
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::vector<CurveEpsRow> run_curve_eps(const sysmodel::SystemConfig& shape,
                                       const std::vector<double>& ebn0_grid_db,
                                       double p_prime_ratio,
                                       const std::vector<Variant>& variants,
                                       const bound::BoundOptions& opts) {
    if (ebn0_grid_db.empty()) throw std::invalid_argument("curve-eps: empty grid");
    if (!(p_prime_ratio > 0.0) || !(p_prime_ratio < 1.0))
        throw std::invalid_argument("curve-eps: p_prime ratio must be in (0,1)");
    std::vector<CurveEpsRow> rows;
    for (const auto& var : variants) {
        bound::BoundOptions bo = opts;
        bo.kernel = var.kernel;
        bound::BoundEvaluator ev(shape, bo);
        for (const double db : ebn0_grid_db) {
            const double p = sysmodel::ebn0_db_to_power(db, shape.n, shape.k);
            const auto bd = ev.evaluate(p, p_prime_ratio * p, var.v_star);
            CurveEpsRow row;
            row.ka = shape.ka;
            row.variant = var.name;
            row.ebn0_db = db;
            row.eps_total = bd.eps_total;
            row.q0 = bd.q0.linear();
            row.best_p_prime = p_prime_ratio * p;
            row.v_star = var.v_star;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string curve_ka_csv(const std::vector<CurveKaRow>& rows) {
    std::string out = "ka,ebn0_db,eps_total,q0,best_p_prime,v_star,variant\n";
    for (const auto& r : rows) {
        out += std::to_string(r.ka) + "," + fmt(r.ebn0_db) + "," + fmt(r.eps_total) + "," +
               fmt(r.q0) + "," + fmt(r.best_p_prime) + "," + fmt(r.v_star) + "," + r.variant +
               "\n";
    }
    return out;
}

std::string curve_eps_csv(const std::vector<CurveEpsRow>& rows) {
    std::string out = "ka,ebn0_db,eps_total,q0,best_p_prime,v_star,variant\n";
    for (const auto& r : rows) {
        out += std::to_string(r.ka) + "," + fmt(r.ebn0_db) + "," + fmt(r.eps_total) + "," +
               fmt(r.q0) + "," + fmt(r.best_p_prime) + "," + fmt(r.v_star) + "," + r.variant +
               "\n";
    }
    return out;
}

std::string breakdown_json(const sysmodel::SystemConfig& config,
                           const constants::DenoiserConstants& consts,
                           const bound::BoundBreakdown& bd) {
    nlohmann::json j;
    j["config"] = {{"ka", config.ka},       {"n", config.n},
                   {"k", config.k},         {"p", config.p},
                   {"p_prime", config.p_prime}, {"eps_target", config.eps_target},
                   {"seed", config.seed}};
    j["constants"] = {{"j_star", consts.j_star},
                      {"k_e", consts.k_e},
                      {"v_star", consts.v_star},
                      {"n_samples", consts.sample_count},
                      {"seed", consts.seed}};
    j["eps_total"] = bd.eps_total;
    j["q0"] = bd.q0.linear();
    j["q0_log"] = bd.q0.log_value;
    nlohmann::json per_t = nlohmann::json::array();
    for (const auto& term : bd.per_t) {
        nlohmann::json tj;
        tj["t"] = term.t;
        tj["q1_log"] = term.q1.log_value;
        tj["rho0"] = term.rho0;
        tj["rho1"] = term.rho1;
        tj["q2_evaluated"] = term.q2.evaluated;
        if (term.q2.evaluated) {
            tj["q2_log"] = term.q2.value.log_value;
            tj["psi"] = term.q2.psi;
            tj["r1"] = term.q2.r1;
            tj["r2"] = term.q2.r2;
            tj["mc_samples"] = term.q2.mc_samples;
            tj["mc_halfwidth"] = term.q2.mc_halfwidth;
            tj["mc_exact"] = term.q2.exact;
        }
        tj["contribution_log"] = term.contribution.log_value;
        per_t.push_back(std::move(tj));
    }
    j["per_t"] = std::move(per_t);
    j["truncated_from"] = bd.truncated_from;
    j["variants"] = {{"kernel", bound::kernel_name(bd.kernel)},
                     {"idens", bound::idens_name(bd.idens)},
                     {"q2_mass", bound::q2_mass_name(bd.q2_mass)}};
    j["v_star_used"] = bd.v_star_used;
    return j.dump(2) + "\n";
}

std::string constants_json(const constants::DenoiserConstants& consts,
                           const std::string& model_checksum) {
    nlohmann::json j;
    j["j_star"] = consts.j_star;
    j["k_e"] = consts.k_e;
    j["v_star"] = consts.v_star;
    j["n_samples"] = consts.sample_count;
    j["power_iters"] = consts.power_iters;
    j["seed"] = consts.seed;
    j["model_checksum"] = model_checksum;
    return j.dump(2) + "\n";
}

constants::DenoiserConstants constants_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    constants::DenoiserConstants c;
    c.j_star = j.at("j_star").get<double>();
    c.k_e = j.at("k_e").get<double>();
    c.v_star = j.at("v_star").get<double>();
    c.sample_count = j.value("n_samples", std::size_t{0});
    c.power_iters = j.value("power_iters", 0u);
    c.seed = j.value("seed", std::uint64_t{0});
    return c;
}

double parse_csv_double(const std::string& field) {
    if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
    return std::stod(field);
}

}  // namespace urabound::curve
