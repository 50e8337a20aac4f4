#include "urabound/bound.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "urabound/numerics.hpp"
#include "urabound/parallel.hpp"
#include "urabound/rng.hpp"

namespace urabound::bound {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// ln C(M - ka, t) with the population passed as a double; zero competitors
// make the coefficient vanish rather than fault.
double log_competitors(double population, std::uint32_t t) {
    if (population < static_cast<double>(t)) return kNegInf;
    return numerics::log_binomial_real(population, t);
}

double kernel_log(std::uint32_t t, double p_prime, double v_star, std::uint32_t n,
                  PairwiseKernel kernel) {
    const double tp = static_cast<double>(t) * p_prime;
    switch (kernel) {
        case PairwiseKernel::Split:
            return -1.0 / (2.0 * tp + 16.0 * v_star) -
                   static_cast<double>(n) * std::log1p(tp / (8.0 * v_star));
        case PairwiseKernel::GaussianAverage:
            return -0.5 * static_cast<double>(n) * std::log1p(tp / (4.0 * v_star));
        case PairwiseKernel::Baseline:
            return -0.5 * static_cast<double>(n) * std::log1p(tp / 2.0);
    }
    throw std::logic_error("unreachable");
}

struct CombinationWalker {
    std::vector<std::uint32_t> idx;
    std::uint32_t limit;

    CombinationWalker(std::uint32_t t, std::uint32_t lim) : idx(t), limit(lim) {
        for (std::uint32_t i = 0; i < t; ++i) idx[i] = i;
    }
    bool advance() {
        const std::uint32_t t = static_cast<std::uint32_t>(idx.size());
        std::uint32_t i = t;
        while (i-- > 0) {
            if (idx[i] + (t - i) <= limit - 1) {
                ++idx[i];
                for (std::uint32_t j = i + 1; j < t; ++j) idx[j] = idx[j - 1] + 1;
                return true;
            }
        }
        return false;
    }
};

double binom_count(std::uint32_t n, std::uint32_t t) {
    double c = 1.0;
    for (std::uint32_t i = 1; i <= t; ++i)
        c *= static_cast<double>(n - t + i) / static_cast<double>(i);
    return c;
}

}  // namespace

const char* kernel_name(PairwiseKernel k) {
    switch (k) {
        case PairwiseKernel::Split: return "split";
        case PairwiseKernel::GaussianAverage: return "gaussavg";
        case PairwiseKernel::Baseline: return "baseline";
    }
    return "?";
}

const char* idens_name(InfoDensityVariant v) {
    return v == InfoDensityVariant::Raw ? "raw" : "canonical";
}

const char* q2_mass_name(Q2MassForm f) { return f == Q2MassForm::Product ? "product" : "half"; }

LogProb q0_term(const sysmodel::SystemConfig& config) {
    config.validate();
    std::vector<double> terms;
    if (config.ka >= 2)
        terms.push_back(numerics::log_binomial(config.ka, 2) - config.log_m());
    const double x = static_cast<double>(config.n) * config.p / config.p_prime;
    terms.push_back(std::log(static_cast<double>(config.ka)) +
                    numerics::log_reg_upper_gamma(config.n, x));
    return LogProb::from_log(numerics::log_sum_exp(terms));
}

LogProb pairwise_bound(std::uint32_t t, double p_prime, double v_star, std::uint32_t n,
                       PairwiseKernel kernel) {
    if (t < 1) throw std::domain_error("pairwise_bound: t must be >= 1");
    if (kernel != PairwiseKernel::Baseline && !(v_star >= 1.0))
        throw std::domain_error("pairwise_bound: v_star must be >= 1");
    return LogProb::from_log(kernel_log(t, p_prime, v_star, n, kernel));
}

Q1Result q1_term(const sysmodel::SystemConfig& config, std::uint32_t t, double v_star,
                 PairwiseKernel kernel) {
    if (t < 1 || t > config.ka) throw std::domain_error("q1_term: t out of range");
    if (kernel != PairwiseKernel::Baseline && !(v_star >= 1.0))
        throw std::domain_error("q1_term: v_star must be >= 1");
    const double a = numerics::log_binomial(config.ka, t);
    const double b = log_competitors(config.m_real() - static_cast<double>(config.ka), t) +
                     kernel_log(t, config.p_prime, v_star, config.n, kernel);
    // min over the corners {rho -> 0, (1,1), (1,0)}; a >= 0 rules out (1,0).
    Q1Result r;
    if (a + b < 0.0) {
        r.value = LogProb::from_log(a + b);
        r.rho0 = 1.0;
        r.rho1 = 1.0;
    } else {
        r.value = LogProb::one();
        r.rho0 = 0.0;
        r.rho1 = 0.0;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Information density
// ---------------------------------------------------------------------------

InfoDensitySample sample_information_density(const sysmodel::SystemConfig& config,
                                             std::uint32_t t, std::uint64_t seed,
                                             std::uint64_t index, std::size_t subset_budget,
                                             InfoDensityVariant variant) {
    if (t < 1 || t > config.ka) throw std::domain_error("information density: t out of range");
    const auto sample = sysmodel::sample_channel_output(config, seed, index);
    const std::size_t n = config.n;
    const std::uint32_t ka = config.ka;

    // c([ka]) and |Z|^2 once; per-subset terms assembled literally below.
    std::vector<double> c_all(n, 0.0);
    for (const auto& c : sample.codewords)
        for (std::size_t j = 0; j < n; ++j) c_all[j] += c[j];

    auto subset_quads = [&](const std::vector<std::uint32_t>& s0, double& quad1_raw,
                            double& quad2) {
        std::vector<double> c_s0(n, 0.0);
        for (auto i : s0)
            for (std::size_t j = 0; j < n; ++j) c_s0[j] += sample.codewords[i][j];
        quad1_raw = 0.0;
        quad2 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double c_comp = c_all[j] - c_s0[j];  // c(S0^c)
            const double d1 = sample.y[j] - c_comp;
            const double d2 = sample.y[j] - c_s0[j] - c_comp;
            quad1_raw += d1 * d1;
            quad2 += d2 * d2;
        }
    };

    const double tp = static_cast<double>(t) * config.p_prime;
    const double log_term = 0.5 * static_cast<double>(n) * std::log1p(tp);

    bool exact = binom_count(ka, t) <= static_cast<double>(subset_budget);
    std::vector<std::uint32_t> best_subset;
    if (exact) {
        double best = std::numeric_limits<double>::infinity();
        CombinationWalker walk(t, ka);
        do {
            double q1r, q2v;
            subset_quads(walk.idx, q1r, q2v);
            if (q1r < best) {
                best = q1r;
                best_subset = walk.idx;
            }
        } while (walk.advance());
    } else {
        // Greedy: the t codewords with smallest marginal |Z + c_i|^2.
        std::vector<std::pair<double, std::uint32_t>> marg(ka);
        for (std::uint32_t i = 0; i < ka; ++i) {
            double m = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double v = sample.noise[j] + sample.codewords[i][j];
                m += v * v;
            }
            marg[i] = {m, i};
        }
        std::sort(marg.begin(), marg.end());
        for (std::uint32_t i = 0; i < t; ++i) best_subset.push_back(marg[i].second);
        std::sort(best_subset.begin(), best_subset.end());
    }

    double quad1_raw, quad2;
    subset_quads(best_subset, quad1_raw, quad2);

    InfoDensitySample out;
    out.t = t;
    out.seed = seed;
    out.exact = exact;
    out.log_term = log_term;
    out.quad1 = quad1_raw / (1.0 + tp);
    out.quad2 = quad2;
    out.i_t = (variant == InfoDensityVariant::Raw)
                  ? log_term + out.quad1 - out.quad2
                  : log_term + 0.5 * out.quad1 - 0.5 * out.quad2;
    return out;
}

// ---------------------------------------------------------------------------
// Cached Monte Carlo statistics for q2
// ---------------------------------------------------------------------------

namespace {

// Sufficient statistics of one draw for pricing |c(S)+Z|^2 at any P':
// unit-power codeword Gram, projections onto Z, and |Z|^2. The statistics
// are power- and t-independent, so one cache serves the whole sweep.
struct DrawFull {
    std::vector<double> gram;  // ka x ka
    std::vector<double> b;     // <g_i, Z>
    double z2 = 0.0;
};

// Low-dimensional equivalent: component along Z, perpendicular norms, and a
// triangular frame for the candidate pool's perpendicular parts.
struct DrawFast {
    double z2 = 0.0;
    std::vector<float> a;              // <g_i, zhat>
    std::vector<float> w;              // |perp g_i|^2
    std::vector<std::uint32_t> pool;   // member ids, ranked at the reference P'
    std::vector<float> frame;          // rows 0..L-1; row j holds j+1 coords
};

struct McCache {
    bool fast = false;
    std::vector<DrawFull> full;
    std::vector<DrawFast> fastd;
};

DrawFull gen_full(const sysmodel::SystemConfig& cfg, std::uint64_t seed, std::size_t k) {
    const std::size_t n = cfg.n;
    const std::uint32_t ka = cfg.ka;
    Rng rng(seed, stream_tag::kInfoDensity, k);
    std::vector<double> z(n);
    rng.fill_gaussian(z.data(), n);
    double z2 = 0.0;
    for (double v : z) z2 += v * v;

    std::vector<std::vector<double>> g(ka);
    DrawFull d;
    d.z2 = z2;
    d.b.resize(ka);
    d.gram.assign(static_cast<std::size_t>(ka) * ka, 0.0);
    for (std::uint32_t i = 0; i < ka; ++i) {
        g[i].resize(n);
        rng.fill_gaussian(g[i].data(), n);
        double bi = 0.0;
        for (std::size_t j = 0; j < n; ++j) bi += g[i][j] * z[j];
        d.b[i] = bi;
    }
    for (std::uint32_t i = 0; i < ka; ++i)
        for (std::uint32_t j = i; j < ka; ++j) {
            double dot = 0.0;
            for (std::size_t m = 0; m < n; ++m) dot += g[i][m] * g[j][m];
            d.gram[i * ka + j] = dot;
            d.gram[j * ka + i] = dot;
        }
    return d;
}

DrawFast gen_fast(const sysmodel::SystemConfig& cfg, std::uint64_t seed, std::size_t k,
                  std::size_t pool_size, double p_prime_ref) {
    const std::uint32_t ka = cfg.ka;
    const double n = cfg.n;
    Rng rng(seed, stream_tag::kInfoDensity, k);

    DrawFast d;
    d.z2 = rng.next_chi2(n);
    d.a.resize(ka);
    d.w.resize(ka);
    for (std::uint32_t i = 0; i < ka; ++i) {
        d.a[i] = static_cast<float>(rng.next_gaussian());
        d.w[i] = static_cast<float>(rng.next_chi2(n - 1.0));
    }
    const std::size_t L = std::min<std::size_t>(pool_size, std::min<std::size_t>(ka, cfg.n - 2));
    if (L == 0) return d;

    // Pool: L smallest marginals at the reference power (ranking is stable
    // across the power sweep; the pool is part of the flagged heuristic).
    const double sz = std::sqrt(d.z2);
    std::vector<std::pair<double, std::uint32_t>> marg(ka);
    for (std::uint32_t i = 0; i < ka; ++i) {
        const double ai = d.a[i];
        marg[i] = {p_prime_ref * (ai * ai + d.w[i]) + 2.0 * std::sqrt(p_prime_ref) * sz * ai, i};
    }
    std::sort(marg.begin(), marg.end());
    d.pool.resize(L);
    for (std::size_t j = 0; j < L; ++j) d.pool[j] = marg[j].second;

    // Sequential frame for the pool members' perpendicular parts: member j is
    // expressed as j coordinates against the span of the previous members
    // plus one new axis, conditioned on its total norm w.
    d.frame.resize(L * (L + 1) / 2);
    std::size_t off = 0;
    const double dim = n - 1.0;
    for (std::size_t j = 0; j < L; ++j) {
        const double wj = d.w[d.pool[j]];
        double ssq = 0.0;
        for (std::size_t m = 0; m < j; ++m) {
            const double gm = rng.next_gaussian();
            d.frame[off + m] = static_cast<float>(gm);  // placeholder, scaled below
            ssq += gm * gm;
        }
        const double rest = rng.next_chi2(dim - static_cast<double>(j));
        const double denom = std::sqrt(ssq + rest);
        for (std::size_t m = 0; m < j; ++m)
            d.frame[off + m] = static_cast<float>(std::sqrt(wj) * d.frame[off + m] / denom);
        d.frame[off + j] = static_cast<float>(std::sqrt(wj * rest) / denom);
        off += j + 1;
    }
    return d;
}

struct McEval {
    std::vector<double> values;
    bool exact = false;
    bool available = true;
};

// I_t for every cached draw at the requested power.
McEval eval_cache(const McCache& cache, const sysmodel::SystemConfig& cfg, std::uint32_t t,
                  double p_prime, const McOptions& mc, InfoDensityVariant variant,
                  unsigned threads) {
    const std::uint32_t ka = cfg.ka;
    const double tp = static_cast<double>(t) * p_prime;
    const double log_term = 0.5 * static_cast<double>(cfg.n) * std::log1p(tp);
    const double sp = std::sqrt(p_prime);
    const double inv1tp = 1.0 / (1.0 + tp);
    const bool canonical = variant == InfoDensityVariant::Canonical;

    // c_plus_z_sq is |c(S0)+Z|^2 = |y - c(S0^c)|^2 at the minimizing subset.
    auto finish = [&](double c_plus_z_sq, double z2) {
        const double q1v = c_plus_z_sq * inv1tp;
        return canonical ? log_term + 0.5 * q1v - 0.5 * z2 : log_term + q1v - z2;
    };

    McEval out;
    const std::size_t m = cache.fast ? cache.fastd.size() : cache.full.size();
    out.values.resize(m);

    if (!cache.fast) {
        const bool exact = binom_count(ka, t) <= static_cast<double>(mc.subset_budget);
        out.exact = exact;
        parallel_chunks(m, 256, threads, [&](std::size_t, std::size_t lo, std::size_t hi) {
            for (std::size_t kk = lo; kk < hi; ++kk) {
                const auto& d = cache.full[kk];
                auto subset_value = [&](const std::vector<std::uint32_t>& s) {
                    double gsum = 0.0, bsum = 0.0;
                    for (std::size_t i = 0; i < s.size(); ++i) {
                        bsum += d.b[s[i]];
                        gsum += d.gram[s[i] * ka + s[i]];
                        for (std::size_t j = i + 1; j < s.size(); ++j)
                            gsum += 2.0 * d.gram[s[i] * ka + s[j]];
                    }
                    return p_prime * gsum + 2.0 * sp * bsum + d.z2;
                };
                double best = std::numeric_limits<double>::infinity();
                if (exact) {
                    CombinationWalker walk(t, ka);
                    do {
                        best = std::min(best, subset_value(walk.idx));
                    } while (walk.advance());
                } else {
                    std::vector<std::pair<double, std::uint32_t>> marg(ka);
                    for (std::uint32_t i = 0; i < ka; ++i)
                        marg[i] = {p_prime * d.gram[i * ka + i] + 2.0 * sp * d.b[i], i};
                    std::sort(marg.begin(), marg.end());
                    std::vector<std::uint32_t> s(t);
                    for (std::uint32_t i = 0; i < t; ++i) s[i] = marg[i].second;
                    best = subset_value(s);
                }
                out.values[kk] = finish(best, d.z2);
            }
        });
        return out;
    }

    // Statistics path.
    if (t == 1) {
        out.exact = true;
        parallel_chunks(m, 1024, threads, [&](std::size_t, std::size_t lo, std::size_t hi) {
            for (std::size_t kk = lo; kk < hi; ++kk) {
                const auto& d = cache.fastd[kk];
                const double sz = std::sqrt(d.z2);
                double best = std::numeric_limits<double>::infinity();
                for (std::uint32_t i = 0; i < ka; ++i) {
                    const double ai = d.a[i];
                    best = std::min(best,
                                    p_prime * (ai * ai + d.w[i]) + 2.0 * sp * sz * ai);
                }
                out.values[kk] = finish(best + d.z2, d.z2);
            }
        });
        return out;
    }

    // t >= 2: enumerate within the pool (or fall back to the pool greedy).
    const std::size_t L0 = cache.fastd.empty() ? 0 : cache.fastd.front().pool.size();
    if (L0 < t) {
        out.available = false;
        return out;
    }
    const bool enumerate = binom_count(static_cast<std::uint32_t>(L0), t) <=
                           static_cast<double>(mc.pool_subset_budget);
    out.exact = enumerate && L0 == ka;  // pool spanning all users makes the min exact
    parallel_chunks(m, 256, threads, [&](std::size_t, std::size_t lo, std::size_t hi) {
        std::vector<double> axis(L0);
        for (std::size_t kk = lo; kk < hi; ++kk) {
            const auto& d = cache.fastd[kk];
            const std::size_t L = d.pool.size();
            const double sz = std::sqrt(d.z2);
            auto pool_subset_value = [&](const std::vector<std::uint32_t>& pos) {
                double asum = 0.0;
                std::fill(axis.begin(), axis.begin() + static_cast<std::ptrdiff_t>(L), 0.0);
                for (auto pj : pos) {
                    asum += d.a[d.pool[pj]];
                    const std::size_t off = static_cast<std::size_t>(pj) * (pj + 1) / 2;
                    for (std::size_t mth = 0; mth <= pj; ++mth) axis[mth] += d.frame[off + mth];
                }
                double perp2 = 0.0;
                for (std::size_t mth = 0; mth < L; ++mth) perp2 += axis[mth] * axis[mth];
                const double par = sz + sp * asum;
                return par * par + p_prime * perp2;
            };
            double best = std::numeric_limits<double>::infinity();
            if (enumerate) {
                CombinationWalker walk(t, static_cast<std::uint32_t>(L));
                do {
                    best = std::min(best, pool_subset_value(walk.idx));
                } while (walk.advance());
            } else {
                std::vector<std::pair<double, std::uint32_t>> marg(L);
                for (std::uint32_t p = 0; p < L; ++p) {
                    const double ai = d.a[d.pool[p]];
                    marg[p] = {p_prime * (ai * ai + d.w[d.pool[p]]) + 2.0 * sp * sz * ai, p};
                }
                std::sort(marg.begin(), marg.end());
                std::vector<std::uint32_t> pos(t);
                for (std::uint32_t i = 0; i < t; ++i) pos[i] = marg[i].second;
                best = pool_subset_value(pos);
            }
            out.values[kk] = finish(best, d.z2);
        }
    });
    return out;
}

Q2Result q2_from_values(std::vector<double> values, double log_mass, double r1, double r2,
                        bool exact) {
    Q2Result res;
    res.mc_samples = values.size();
    res.r1 = r1;
    res.r2 = r2;
    res.exact = exact;
    std::sort(values.begin(), values.end());
    const double m = static_cast<double>(values.size());

    double best = 1.0;  // psi -> infinity endpoint
    double best_psi = values.back();
    double best_phat = 1.0;

    auto consider = [&](double psi, double phat) {
        const double e = log_mass - psi;
        const double second = e > 0.0 ? std::numeric_limits<double>::infinity() : std::exp(e);
        const double cand = phat + second;
        if (cand < best) {
            best = cand;
            best_psi = psi;
            best_phat = phat;
        }
    };

    // Left limits at each distinct sample value: P[I <= psi-) = (# strictly below)/m.
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0 && values[i] == values[i - 1]) continue;
        consider(values[i], static_cast<double>(i) / m);
    }

    // Normal-approximation stationary point, priced against the empirical CDF.
    double mu = 0.0;
    for (double v : values) mu += v;
    mu /= m;
    double var = 0.0;
    for (double v : values) var += (v - mu) * (v - mu);
    var /= m;
    if (var > 0.0 && std::isfinite(log_mass)) {
        const double sd = std::sqrt(var);
        double psi = mu;
        for (int it = 0; it < 40; ++it) {
            const double u = (psi - mu) / sd;
            const double g = -0.5 * u * u - std::log(sd * std::sqrt(2.0 * M_PI)) + psi - log_mass;
            const double dg = -u / sd + 1.0;
            if (std::fabs(dg) < 1e-14) break;
            const double next = psi - g / dg;
            if (!std::isfinite(next)) break;
            if (std::fabs(next - psi) < 1e-10 * (1.0 + std::fabs(next))) {
                psi = next;
                break;
            }
            psi = next;
        }
        if (std::isfinite(psi)) {
            const auto ub = std::upper_bound(values.begin(), values.end(), psi);
            consider(psi, static_cast<double>(ub - values.begin()) / m);
        }
    }

    res.value = LogProb::from_linear(std::min(best, 1.0));
    res.psi = best_psi;
    res.mc_halfwidth = 1.96 * std::sqrt(std::max(0.0, best_phat * (1.0 - best_phat)) / m);
    return res;
}

}  // namespace

// ---------------------------------------------------------------------------
// BoundEvaluator
// ---------------------------------------------------------------------------

struct BoundEvaluator::Impl {
    sysmodel::SystemConfig shape;
    BoundOptions opts;
    std::unique_ptr<McCache> cache;

    Impl(sysmodel::SystemConfig s, BoundOptions o) : shape(s), opts(o) {}

    bool use_fast_path() const {
        if (shape.n < 3) return false;  // the statistics sampler needs n >= 3
        switch (opts.mc.path) {
            case McOptions::Path::Full: return false;
            case McOptions::Path::Fast: return true;
            case McOptions::Path::Auto:
                return static_cast<double>(shape.ka) * shape.ka * shape.n > 40000.0;
        }
        return true;
    }

    const McCache& cache_for(double p_prime_ref) {
        if (cache) return *cache;
        auto c = std::make_unique<McCache>();
        c->fast = use_fast_path();
        const std::size_t m = opts.mc.samples;
        const unsigned threads = opts.mc.threads ? opts.mc.threads : 1;
        if (c->fast) {
            c->fastd.resize(m);
            parallel_chunks(m, 256, threads, [&](std::size_t, std::size_t lo, std::size_t hi) {
                for (std::size_t k = lo; k < hi; ++k)
                    c->fastd[k] = gen_fast(shape, opts.mc.seed, k, opts.mc.pool_size,
                                           p_prime_ref);
            });
        } else {
            c->full.resize(m);
            parallel_chunks(m, 64, threads, [&](std::size_t, std::size_t lo, std::size_t hi) {
                for (std::size_t k = lo; k < hi; ++k)
                    c->full[k] = gen_full(shape, opts.mc.seed, k);
            });
        }
        cache = std::move(c);
        return *cache;
    }

    Q2Result q2_at(std::uint32_t t, double p_prime) {
        if (opts.mc.samples < 100) throw std::invalid_argument("q2: need at least 100 samples");
        sysmodel::SystemConfig cfg = shape;
        cfg.p_prime = p_prime;
        const auto& cc = cache_for(p_prime);
        const unsigned threads = opts.mc.threads ? opts.mc.threads : 1;
        auto mc = eval_cache(cc, cfg, t, p_prime, opts.mc, opts.idens, threads);

        const double log_c_ka = numerics::log_binomial(shape.ka, t);
        const double log_c_comp =
            log_competitors(shape.m_real() - static_cast<double>(shape.ka), t);
        const double r1 = log_c_comp / (static_cast<double>(shape.n) * t);
        const double r2 = log_c_ka / static_cast<double>(shape.n);
        if (!mc.available) {
            Q2Result r;
            r.evaluated = false;
            r.r1 = r1;
            r.r2 = r2;
            return r;
        }
        const double log_mass = opts.q2_mass == Q2MassForm::Product
                                    ? log_c_ka + log_c_comp
                                    : 0.5 * (log_c_ka + log_c_comp);
        return q2_from_values(std::move(mc.values), log_mass, r1, r2, mc.exact);
    }

    BoundBreakdown evaluate(double p, double p_prime, double v_star) {
        sysmodel::SystemConfig cfg = shape;
        cfg.p = p;
        cfg.p_prime = p_prime;
        cfg.validate();
        if (cfg.m_real() < static_cast<double>(cfg.ka))
            throw std::invalid_argument("bound: codebook smaller than user count");
        if (opts.kernel != PairwiseKernel::Baseline && !(v_star >= 1.0))
            throw std::domain_error("bound: v_star must be >= 1");
        if (!opts.enable_q1 && !opts.enable_q2)
            throw std::invalid_argument("bound: q1 and q2 cannot both be disabled");

        BoundBreakdown bd;
        bd.kernel = opts.kernel;
        bd.idens = opts.idens;
        bd.q2_mass = opts.q2_mass;
        bd.v_star_used = v_star;
        bd.q0 = q0_term(cfg);

        const double log_ka = std::log(static_cast<double>(cfg.ka));
        std::vector<double> log_terms{bd.q0.log_value};
        std::deque<double> recent;

        for (std::uint32_t t = 1; t <= cfg.ka; ++t) {
            PerTTerm term;
            term.t = t;
            term.q2.evaluated = false;

            LogProb qmin = LogProb::one();
            bool have = false;
            if (opts.enable_q1) {
                const auto q1 = q1_term(cfg, t, v_star, opts.kernel);
                term.q1 = q1.value;
                term.rho0 = q1.rho0;
                term.rho1 = q1.rho1;
                qmin = q1.value.clamped();
                have = true;
            } else {
                term.q1 = LogProb::one();
            }

            bool want_q2 = opts.enable_q2;
            if (want_q2 && opts.enable_q1) {
                // (t/ka) q1 already far below target: q2 cannot matter.
                const double contrib_q1 = std::log(static_cast<double>(t)) - log_ka +
                                          term.q1.clamped().log_value;
                if (contrib_q1 < std::log(opts.q2_skip_factor * cfg.eps_target)) want_q2 = false;
            }
            if (want_q2) {
                term.q2 = q2_at(t, p_prime);
                if (term.q2.evaluated) {
                    if (!have || term.q2.value.clamped() < qmin) qmin = term.q2.value.clamped();
                    have = true;
                }
            }
            if (!have) qmin = LogProb::one();

            term.contribution =
                LogProb::from_log(std::log(static_cast<double>(t)) - log_ka + qmin.log_value);
            log_terms.push_back(term.contribution.log_value);
            bd.per_t.push_back(term);

            // The total already clamps to 1: remaining terms cannot matter.
            if (t < cfg.ka && numerics::log_sum_exp(log_terms) >= 0.0) {
                bd.truncated_from = t + 1;
                break;
            }

            // Monotone-tail truncation.
            recent.push_back(term.contribution.linear());
            if (recent.size() > 3) recent.pop_front();
            if (t < cfg.ka && recent.size() == 3) {
                const double thresh = opts.tail_skip_factor * cfg.eps_target;
                if (recent[0] > recent[1] && recent[1] > recent[2] && recent[0] < thresh) {
                    bd.truncated_from = t + 1;
                    break;
                }
            }
        }

        bd.eps_log = numerics::log_sum_exp(log_terms);
        bd.eps_total = std::min(1.0, std::exp(bd.eps_log));
        return bd;
    }
};

BoundEvaluator::BoundEvaluator(sysmodel::SystemConfig shape, BoundOptions opts)
    : impl_(std::make_unique<Impl>(shape, opts)) {}
BoundEvaluator::~BoundEvaluator() = default;
BoundEvaluator::BoundEvaluator(BoundEvaluator&&) noexcept = default;
BoundEvaluator& BoundEvaluator::operator=(BoundEvaluator&&) noexcept = default;

BoundBreakdown BoundEvaluator::evaluate(double p, double p_prime, double v_star) {
    return impl_->evaluate(p, p_prime, v_star);
}

Q2Result BoundEvaluator::q2(std::uint32_t t, double p_prime) {
    if (t < 1 || t > impl_->shape.ka) throw std::domain_error("q2: t out of range");
    return impl_->q2_at(t, p_prime);
}

const BoundOptions& BoundEvaluator::options() const { return impl_->opts; }

Q2Result q2_term(const sysmodel::SystemConfig& config, std::uint32_t t, const BoundOptions& opts) {
    BoundEvaluator ev(config, opts);
    return ev.q2(t, config.p_prime);
}

InfoDensityDraws info_density_mc_values(const sysmodel::SystemConfig& config, std::uint32_t t,
                                        const BoundOptions& opts) {
    if (t < 1 || t > config.ka) throw std::domain_error("info density: t out of range");
    BoundEvaluator::Impl impl(config, opts);
    const auto& cache = impl.cache_for(config.p_prime);
    auto mc = eval_cache(cache, config, t, config.p_prime, opts.mc, opts.idens,
                         opts.mc.threads ? opts.mc.threads : 1);
    return {std::move(mc.values), mc.exact, mc.available};
}

BoundBreakdown epsilon_bound(const sysmodel::SystemConfig& config, double v_star,
                             const BoundOptions& opts) {
    BoundEvaluator ev(config, opts);
    return ev.evaluate(config.p, config.p_prime, v_star);
}

BoundBreakdown baseline_epsilon_bound(const sysmodel::SystemConfig& config,
                                      const BoundOptions& opts) {
    BoundOptions o = opts;
    o.kernel = PairwiseKernel::Baseline;
    return epsilon_bound(config, 1.0, o);
}

BracketFailure::BracketFailure(double lo, double hi)
    : std::runtime_error("required_ebn0: bracket failure"), eps_lo(lo), eps_hi(hi) {}

RequiredEbn0Result required_ebn0(const sysmodel::SystemConfig& shape, double target_eps,
                                 double v_star, const SolverOptions& solver,
                                 const BoundOptions& opts) {
    if (!(target_eps > 0.0)) throw std::invalid_argument("required_ebn0: target must be > 0");
    if (!(solver.hi_db > solver.lo_db)) throw std::invalid_argument("required_ebn0: bad bracket");
    if (solver.p_prime_ratios.empty())
        throw std::invalid_argument("required_ebn0: empty p_prime grid");
    for (double r : solver.p_prime_ratios)
        if (!(r > 0.0) || !(r < 1.0))
            throw std::invalid_argument("required_ebn0: p_prime ratios must be in (0,1)");

    BoundEvaluator ev(shape, opts);
    struct Eval {
        double eps;
        double p_prime;
        BoundBreakdown bd;
    };
    auto eval_at = [&](double db) {
        const double p = sysmodel::ebn0_db_to_power(db, shape.n, shape.k);
        Eval best{std::numeric_limits<double>::infinity(), 0.0, {}};
        for (double r : solver.p_prime_ratios) {
            sysmodel::SystemConfig probe = shape;
            probe.p = p;
            probe.p_prime = r * p;
            // q0 alone already misses the target: this ratio cannot be the
            // feasible witness, so skip its Monte Carlo work.
            if (std::isfinite(best.eps) && q0_term(probe).linear() > target_eps) continue;
            auto bd = ev.evaluate(p, r * p, v_star);
            if (bd.eps_total < best.eps) best = {bd.eps_total, r * p, std::move(bd)};
        }
        return best;
    };

    auto lo_eval = eval_at(solver.lo_db);
    if (lo_eval.eps <= target_eps)
        return {solver.lo_db, lo_eval.p_prime, std::move(lo_eval.bd)};
    auto hi_eval = eval_at(solver.hi_db);
    if (hi_eval.eps > target_eps) throw BracketFailure(lo_eval.eps, hi_eval.eps);

    double lo = solver.lo_db, hi = solver.hi_db;
    Eval witness = std::move(hi_eval);
    while (hi - lo > solver.tol_db) {
        const double mid = 0.5 * (lo + hi);
        auto e = eval_at(mid);
        if (e.eps <= target_eps) {
            hi = mid;
            witness = std::move(e);
        } else {
            lo = mid;
        }
    }
    return {hi, witness.p_prime, std::move(witness.bd)};
}

}  // namespace urabound::bound
