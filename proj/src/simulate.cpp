#include "jm/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace jm {

TruthTable::TruthTable(std::size_t experiments, std::vector<std::uint8_t> theta)
    : experiments_(experiments), theta_(std::move(theta)) {
    if (experiments_ == 0 || theta_.size() % experiments_ != 0) {
        throw std::invalid_argument("TruthTable: theta size is not a multiple of K");
    }
    const std::size_t m = theta_.size() / experiments_;
    kappa_.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t nulls = 0;
        for (std::size_t k = 0; k < experiments_; ++k) nulls += theta_[i * experiments_ + k] == 0;
        kappa_[i] = nulls;
    }
}

std::vector<std::size_t> TruthTable::kappa_counts() const {
    std::vector<std::size_t> counts(experiments_ + 1, 0);
    for (std::size_t k : kappa_) ++counts[k];
    return counts;
}

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double two_sided_pvalue(double z) noexcept { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

namespace {

std::size_t draw_category(std::mt19937_64& rng, std::span<const double> cumulative) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    for (std::size_t c = 0; c + 1 < cumulative.size(); ++c) {
        if (u < cumulative[c]) return c;
    }
    return cumulative.size() - 1;
}

std::vector<double> cumulative_weights(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("mixture weights must be non-negative");
        total += w;
    }
    if (!(total > 0.0)) throw ConfigError("mixture weights must not all be zero");
    std::vector<double> cumulative(weights.size());
    double running = 0.0;
    for (std::size_t c = 0; c < weights.size(); ++c) {
        running += weights[c] / total;
        cumulative[c] = running;
    }
    return cumulative;
}

}  // namespace

SimData gen_pointmass(const PointMassConfig& config, std::uint64_t seed) {
    const auto cumulative = cumulative_weights(config.weights);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    SimData data;
    data.pvals = Matrix(config.m, 2);
    data.z = Matrix(config.m, 2);
    std::vector<std::uint8_t> theta(config.m * 2);
    for (std::size_t i = 0; i < config.m; ++i) {
        const std::size_t state = draw_category(rng, cumulative);
        theta[2 * i] = static_cast<std::uint8_t>(state >> 1);
        theta[2 * i + 1] = static_cast<std::uint8_t>(state & 1);
        for (std::size_t k = 0; k < 2; ++k) {
            const double z = config.means[state][k] + noise(rng);
            data.z(i, k) = z;
            data.pvals(i, k) = two_sided_pvalue(z);
        }
    }
    data.truth = TruthTable(2, std::move(theta));
    return data;
}

SimData gen_pointmass(std::uint64_t seed, std::size_t m) {
    PointMassConfig config;
    config.m = m;
    return gen_pointmass(config, seed);
}

std::array<double, 4> MediationConfig::proportions() const {
    const double pi11 = tilde_pi1 * (1.0 - pi00);
    const double pi_single = (1.0 - pi00 - pi11) / 2.0;
    return {pi00, pi_single, pi_single, pi11};
}

MediationConfig mediation_preset(const std::string& name) {
    MediationConfig config;
    config.alpha_effect = 0.5;
    config.beta_effect = 0.75;
    if (name == "gnull") {
        config.pi00 = 1.0;
        config.tilde_pi1 = 0.0;
    } else if (name == "snull") {
        config.pi00 = 0.9;
        config.tilde_pi1 = 0.0;
    } else if (name == "dnull") {
        config.pi00 = 0.6;
        config.tilde_pi1 = 0.0;
    } else if (name == "salter") {
        config.pi00 = 0.88;
        config.tilde_pi1 = 0.02 / 0.12;
    } else if (name == "dalter") {
        config.pi00 = 0.4;
        config.tilde_pi1 = 0.2 / 0.6;
    } else {
        throw ConfigError("unknown mediation configuration '" + name + "'");
    }
    return config;
}

SimData gen_mediation(const MediationConfig& config, std::uint64_t seed) {
    if (config.n <= 3) {
        throw ConfigError("mediation simulation needs more than three subjects");
    }
    if (!(config.pi00 >= 0.0 && config.pi00 <= 1.0 && config.tilde_pi1 >= 0.0 && config.tilde_pi1 <= 1.0)) {
        throw ConfigError("mediation proportions must lie in [0,1]");
    }
    if (!(config.exposure_prob > 0.0 && config.exposure_prob < 1.0)) {
        throw ConfigError("exposure probability must lie in (0,1)");
    }
    const auto props = config.proportions();
    // States ordered (alpha, beta) = (0,0), (0,1), (1,0), (1,1), matching theta = (theta_1, theta_2).
    const std::array<double, 4> weights{props[0], props[1], props[2], props[3]};
    const auto cumulative = cumulative_weights(weights);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::bernoulli_distribution exposure(config.exposure_prob);
    const std::size_t n = config.n;

    std::vector<double> x(n);
    double x_mean = 0.0;
    double sxx = 0.0;
    do {
        for (auto& v : x) v = exposure(rng) ? 1.0 : 0.0;
        x_mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
        sxx = 0.0;
        for (double v : x) sxx += (v - x_mean) * (v - x_mean);
    } while (sxx == 0.0);

    const boost::math::students_t dist_alpha(static_cast<double>(n - 2));
    const boost::math::students_t dist_beta(static_cast<double>(n - 3));
    auto two_sided_t = [](const boost::math::students_t& dist, double t) {
        if (!std::isfinite(t)) return 0.0;
        return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    };

    SimData data;
    data.pvals = Matrix(config.m, 2);
    std::vector<std::uint8_t> theta(config.m * 2);
    std::vector<double> mediator(n);
    std::vector<double> outcome(n);
    for (std::size_t i = 0; i < config.m; ++i) {
        const std::size_t state = draw_category(rng, cumulative);
        const bool alpha_on = (state >> 1) != 0;
        const bool beta_on = (state & 1) != 0;
        theta[2 * i] = alpha_on ? 1 : 0;
        theta[2 * i + 1] = beta_on ? 1 : 0;
        const double alpha = alpha_on ? config.alpha_effect : 0.0;
        const double beta = beta_on ? config.beta_effect : 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            mediator[s] = alpha * x[s] + noise(rng);
        }
        for (std::size_t s = 0; s < n; ++s) {
            outcome[s] = beta * mediator[s] + config.beta0 * x[s] + noise(rng);
        }

        double m_mean = 0.0;
        double y_mean = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            m_mean += mediator[s];
            y_mean += outcome[s];
        }
        m_mean /= static_cast<double>(n);
        y_mean /= static_cast<double>(n);
        double smm = 0.0, sxm = 0.0, smy = 0.0, sxy = 0.0, syy = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            const double dx = x[s] - x_mean;
            const double dm = mediator[s] - m_mean;
            const double dy = outcome[s] - y_mean;
            smm += dm * dm;
            sxm += dx * dm;
            smy += dm * dy;
            sxy += dx * dy;
            syy += dy * dy;
        }

        // M on X.
        const double alpha_hat = sxm / sxx;
        const double rss_alpha = std::max(smm - alpha_hat * sxm, 0.0);
        const double se_alpha = std::sqrt(rss_alpha / static_cast<double>(n - 2) / sxx);
        data.pvals(i, 0) = two_sided_t(dist_alpha, alpha_hat / se_alpha);

        // Y on (M, X).
        const double det = smm * sxx - sxm * sxm;
        const double beta_hat = (sxx * smy - sxm * sxy) / det;
        const double exposure_hat = (smm * sxy - sxm * smy) / det;
        const double rss_beta = std::max(syy - beta_hat * smy - exposure_hat * sxy, 0.0);
        const double se_beta = std::sqrt(rss_beta / static_cast<double>(n - 3) * sxx / det);
        data.pvals(i, 1) = two_sided_t(dist_beta, beta_hat / se_beta);
    }
    data.truth = TruthTable(2, std::move(theta));
    return data;
}

SimData gen_replicability(const ReplicabilityConfig& config, std::uint64_t seed) {
    const std::size_t m = config.m;
    const std::size_t dim = config.experiments;
    if (dim < 2 || dim > 30) {
        throw ConfigError("replicability simulation needs 2 <= K <= 30");
    }
    if (config.blocks == 0 || m % config.blocks != 0) {
        throw ConfigError("block count must divide m");
    }
    if (!(config.pi0_global >= 0.0 && config.pi1 >= 0.0 && config.pi0_global + config.pi1 <= 1.0)) {
        throw ConfigError("replicability proportions must be non-negative and sum to at most one");
    }
    if (!(config.rho >= 0.0 && config.rho < 1.0)) {
        throw ConfigError("within-block correlation must lie in [0,1)");
    }
    if (config.mu_pool.empty()) {
        throw ConfigError("signal mean pool is empty");
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pool_pick(0, config.mu_pool.size() - 1);
    const std::uint64_t full = (std::uint64_t{1} << dim) - 1;
    std::uniform_int_distribution<std::uint64_t> mixed_pick(1, full - 1);

    std::vector<std::uint8_t> theta(m * dim);
    for (std::size_t i = 0; i < m; ++i) {
        const double u = unit(rng);
        std::uint64_t pattern = 0;
        if (u < config.pi1) pattern = full;
        else if (u < config.pi1 + config.pi0_global) pattern = 0;
        else pattern = mixed_pick(rng);
        for (std::size_t k = 0; k < dim; ++k) theta[i * dim + k] = (pattern >> k) & 1;
    }

    SimData data;
    data.z = Matrix(m, dim);
    data.pvals = Matrix(m, dim);
    const std::size_t block_size = m / config.blocks;
    const double shared_scale = std::sqrt(config.rho);
    const double own_scale = std::sqrt(1.0 - config.rho);
    const double kd = static_cast<double>(dim);
    for (std::size_t k = 0; k < dim; ++k) {
        const double factor = 2.0 - config.w0 - 2.0 * static_cast<double>(k + 1) * (1.0 - config.w0) / kd;
        for (std::size_t b = 0; b < config.blocks; ++b) {
            const double shared = noise(rng);
            for (std::size_t j = 0; j < block_size; ++j) {
                const std::size_t i = b * block_size + j;
                const double mu0 = theta[i * dim + k] ? config.mu_pool[pool_pick(rng)] : 0.0;
                const double z = mu0 * factor + shared_scale * shared + own_scale * noise(rng);
                data.z(i, k) = z;
                data.pvals(i, k) = two_sided_pvalue(z);
            }
        }
    }
    data.truth = TruthTable(dim, std::move(theta));
    return data;
}

DirectionalData gen_directional(const DirectionalSimConfig& config, std::uint64_t seed) {
    if (config.experiments == 0) throw ConfigError("directional simulation needs K >= 1");
    if (!(config.pi_pos >= 0.0 && config.pi_neg >= 0.0 && config.pi_pos + config.pi_neg <= 1.0)) {
        throw ConfigError("directional proportions must be non-negative and sum to at most one");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (!(config.zero_prob >= 0.0 && config.zero_prob <= 1.0)) {
        throw ConfigError("directional zero-mean probability must lie in [0,1]");
    }
    const std::size_t dim = config.experiments;
    DirectionalData data;
    data.z = Matrix(config.m, dim);
    data.true_signs.assign(config.m, 0);
    std::vector<double> mean(dim);
    for (std::size_t i = 0; i < config.m; ++i) {
        const double u = unit(rng);
        if (u < config.pi_pos) {
            std::fill(mean.begin(), mean.end(), config.effect);
        } else if (u < config.pi_pos + config.pi_neg) {
            std::fill(mean.begin(), mean.end(), -config.effect);
        } else {
            for (auto& v : mean) {
                const double w = unit(rng);
                v = w < config.zero_prob ? 0.0 : (w < 0.5 + 0.5 * config.zero_prob ? config.effect : -config.effect);
            }
        }
        const bool all_pos = std::all_of(mean.begin(), mean.end(), [](double v) { return v > 0.0; });
        const bool all_neg = std::all_of(mean.begin(), mean.end(), [](double v) { return v < 0.0; });
        data.true_signs[i] = all_pos ? 1 : (all_neg ? -1 : 0);
        for (std::size_t k = 0; k < dim; ++k) data.z(i, k) = mean[k] + noise(rng);
    }
    return data;
}

double directional_fdp(std::span<const int> estimated, std::span<const int> truth) {
    if (estimated.size() != truth.size()) {
        throw std::invalid_argument("directional_fdp: length mismatch");
    }
    std::size_t calls = 0;
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < estimated.size(); ++i) {
        if (estimated[i] == 0) continue;
        ++calls;
        wrong += estimated[i] != truth[i];
    }
    return static_cast<double>(wrong) / static_cast<double>(std::max<std::size_t>(calls, 1));
}

ExpectedCounts expected_counts(double t, std::span<const FeatureGroup> groups) {
    if (!(t > 0.0 && t < 0.5)) {
        throw ConfigError("expected_counts: t must lie in (0, 1/2)");
    }
    ExpectedCounts out;
    double null_features = 0.0;
    for (const FeatureGroup& group : groups) {
        const auto count = static_cast<double>(group.count);
        std::size_t kappa = 0;
        std::vector<double> at_t;
        std::vector<double> upper_tail;  // 1 - F(1 - t)
        for (const auto& component : group.components) {
            if (!component) {
                ++kappa;
                continue;
            }
            at_t.push_back((*component)(t));
            upper_tail.push_back(1.0 - (*component)(1.0 - t));
        }
        const double null_part = std::pow(t, static_cast<double>(kappa));
        const double alt_product = std::accumulate(at_t.begin(), at_t.end(), 1.0, std::multiplies<>());
        if (kappa > 0) {
            out.false_discoveries += count * null_part * alt_product;
            null_features += count;
        }
        double controls = static_cast<double>(kappa) * null_part * alt_product;
        for (std::size_t a = 0; a < at_t.size(); ++a) {
            double others = 1.0;
            for (std::size_t l = 0; l < at_t.size(); ++l) {
                if (l != a) others *= at_t[l];
            }
            controls += null_part * upper_tail[a] * others;
        }
        out.controls += count * controls;
    }
    out.js_bound = null_features * t;
    return out;
}

Cdf folded_normal_pvalue_cdf(double mean) {
    return [mean](double t) {
        if (t <= 0.0) return 0.0;
        if (t >= 1.0) return 1.0;
        const boost::math::normal standard;
        const double cut = boost::math::quantile(boost::math::complement(standard, t / 2.0));
        return normal_cdf(-cut - mean) + normal_cdf(mean - cut);
    };
}

std::vector<FeatureGroup> pointmass_groups(const PointMassConfig& config, const TruthTable& truth) {
    std::array<std::size_t, 4> counts{};
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ++counts[static_cast<std::size_t>(truth.theta(i, 0) * 2 + truth.theta(i, 1))];
    }
    std::vector<FeatureGroup> groups;
    for (std::size_t state = 0; state < 4; ++state) {
        FeatureGroup group;
        group.count = counts[state];
        const bool alt[2] = {(state >> 1) != 0, (state & 1) != 0};
        for (std::size_t k = 0; k < 2; ++k) {
            if (alt[k]) group.components.emplace_back(folded_normal_pvalue_cdf(config.means[state][k]));
            else group.components.emplace_back(std::nullopt);
        }
        groups.push_back(std::move(group));
    }
    return groups;
}

Metrics metrics(std::span<const std::size_t> rejected, const TruthTable& truth) {
    Metrics out;
    std::size_t true_discoveries = 0;
    for (std::size_t i : rejected) {
        if (i >= truth.size()) throw std::out_of_range("metrics: rejected index out of range");
        const std::size_t kappa = truth.kappa(i);
        if (kappa > 0) {
            ++out.false_discoveries;
            out.weighted_false_discoveries += kappa;
        } else {
            ++true_discoveries;
        }
    }
    out.rejections = rejected.size();
    std::size_t alternatives = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) alternatives += truth.kappa(i) == 0;
    const auto denom = static_cast<double>(std::max<std::size_t>(rejected.size(), 1));
    out.fdp = static_cast<double>(out.false_discoveries) / denom;
    out.mfdp = static_cast<double>(out.weighted_false_discoveries) / denom;
    out.power = static_cast<double>(true_discoveries) / static_cast<double>(std::max<std::size_t>(alternatives, 1));
    return out;
}

std::vector<std::size_t> bh_max_p(const PValueMatrix& pvals, double q) {
    const std::size_t m = pvals.rows();
    std::vector<double> pc(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto row = pvals.row(i);
        pc[i] = row.empty() ? 1.0 : *std::max_element(row.begin(), row.end());
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pc[a] < pc[b]; });
    std::size_t cutoff = 0;
    for (std::size_t r = m; r >= 1; --r) {
        if (pc[order[r - 1]] <= q * static_cast<double>(r) / static_cast<double>(m)) {
            cutoff = r;
            break;
        }
    }
    std::vector<std::size_t> out(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cutoff));
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace jm
