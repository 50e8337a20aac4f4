// Curve generation: required-Eb/N0 vs K_a and epsilon vs Eb/N0, plus the
// CSV/JSON record formats shared by the CLI and the test suites.
#ifndef URABOUND_CURVE_HPP
#define URABOUND_CURVE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "urabound/bound.hpp"
#include "urabound/constants.hpp"
#include "urabound/sysmodel.hpp"

namespace urabound::curve {

// A named bound variant plotted side by side.
struct Variant {
    std::string name;  // denoiser | denoiser_v1 | denoiser_gaussavg | baseline
    bound::PairwiseKernel kernel = bound::PairwiseKernel::Split;
    double v_star = 1.0;
};

// The standard comparison set: the denoiser bound with measured v*, the
// same at v* = 1, and the classical baseline; the Gaussian-average kernel
// optionally.
std::vector<Variant> standard_variants(double v_star_measured, bool include_gaussavg);

struct CurveKaRow {
    std::uint32_t ka = 0;
    std::string variant;
    double ebn0_db = 0.0;      // NaN when the bracket failed
    double eps_total = 0.0;
    double q0 = 0.0;           // linear
    double best_p_prime = 0.0;
    double v_star = 1.0;
    bool bracket_failed = false;
};

std::vector<CurveKaRow> run_curve_ka(const sysmodel::SystemConfig& shape,
                                     const std::vector<std::uint32_t>& ka_list,
                                     double target_eps, const std::vector<Variant>& variants,
                                     const bound::SolverOptions& solver,
                                     const bound::BoundOptions& opts);

struct CurveEpsRow {
    std::uint32_t ka = 0;
    std::string variant;
    double ebn0_db = 0.0;
    double eps_total = 0.0;
    double q0 = 0.0;
    double best_p_prime = 0.0;
    double v_star = 1.0;
};

// One bound evaluation per (grid point, variant); p' = ratio * p with common
// random numbers across the grid.
std::vector<CurveEpsRow> run_curve_eps(const sysmodel::SystemConfig& shape,
                                       const std::vector<double>& ebn0_grid_db,
                                       double p_prime_ratio,
                                       const std::vector<Variant>& variants,
                                       const bound::BoundOptions& opts);

// CSV with the pinned column set; '.' decimals, LF endings, header row.
std::string curve_ka_csv(const std::vector<CurveKaRow>& rows);
std::string curve_eps_csv(const std::vector<CurveEpsRow>& rows);

// Results record for a single bound evaluation (JSON text). Timing lives in
// the run manifest so records replay byte-identically.
std::string breakdown_json(const sysmodel::SystemConfig& config,
                           const constants::DenoiserConstants& consts,
                           const bound::BoundBreakdown& bd);

// Constants record (JSON text).
std::string constants_json(const constants::DenoiserConstants& consts,
                           const std::string& model_checksum);
constants::DenoiserConstants constants_from_json(const std::string& text);

double parse_csv_double(const std::string& field);

}  // namespace urabound::curve

#endif
