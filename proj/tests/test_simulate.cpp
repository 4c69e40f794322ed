#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "jm/simulate.hpp"

using namespace jm;

namespace {

// Kolmogorov-Smirnov distance of a sample from U(0,1).
double ks_uniform(std::vector<double> x) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        d = std::max(d, std::max((i + 1) / n - x[i], x[i] - i / n));
    }
    return d;
}

// Asymptotic 1% critical value of the one-sample KS statistic.
double ks_critical_01(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

std::vector<FeatureGroup> all_null_groups(std::size_t m, std::size_t dim) {
    FeatureGroup g;
    g.count = m;
    g.components.assign(dim, std::nullopt);
    return {g};
}

}  // namespace

TEST(TruthTable, Kappa) {
    const TruthTable t(2, {0, 0, 0, 1, 1, 0, 1, 1});
    EXPECT_EQ(t.size(), 4u);
    EXPECT_EQ(t.kappa(0), 2u);
    EXPECT_EQ(t.kappa(1), 1u);
    EXPECT_EQ(t.kappa(3), 0u);
    EXPECT_TRUE(t.is_null(2));
    EXPECT_FALSE(t.is_null(3));
    EXPECT_EQ(t.kappa_counts(), (std::vector<std::size_t>{1, 2, 1}));
    EXPECT_THROW(TruthTable(2, {0, 1, 1}), std::invalid_argument);
}

TEST(Generators, ReproducibleBitForBit) {
    EXPECT_EQ(gen_pointmass(3, 500).pvals, gen_pointmass(3, 500).pvals);
    EXPECT_NE(gen_pointmass(3, 500).pvals, gen_pointmass(4, 500).pvals);
    MediationConfig med;
    med.m = 200;
    EXPECT_EQ(gen_mediation(med, 1).pvals, gen_mediation(med, 1).pvals);
    ReplicabilityConfig rep;
    rep.m = 1000;
    rep.blocks = 10;
    EXPECT_EQ(gen_replicability(rep, 2).z, gen_replicability(rep, 2).z);
    DirectionalSimConfig dir;
    dir.m = 300;
    EXPECT_EQ(gen_directional(dir, 5).z, gen_directional(dir, 5).z);
}

TEST(PointMass, MixtureWeights) {
    const std::size_t m = 10000;
    const SimData d = gen_pointmass(7, m);
    const auto counts = d.truth.kappa_counts();
    const double sd = std::sqrt(m * 0.4 * 0.6);
    EXPECT_NEAR(static_cast<double>(counts[2]), 0.4 * m, 4.0 * sd);
    EXPECT_NEAR(static_cast<double>(counts[0]), 0.2 * m, 4.0 * std::sqrt(m * 0.2 * 0.8));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < 2; ++k) {
            EXPECT_DOUBLE_EQ(d.pvals(i, k), two_sided_pvalue(d.z(i, k)));
        }
    }
}

TEST(PointMass, NullColumnsUniform) {
    std::vector<double> nulls;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const SimData d = gen_pointmass(seed, 2000);
        for (std::size_t i = 0; i < d.pvals.rows(); ++i)
            for (std::size_t k = 0; k < 2; ++k)
                if (d.truth.theta(i, k) == 0) nulls.push_back(d.pvals(i, k));
    }
    EXPECT_LT(ks_uniform(nulls), ks_critical_01(nulls.size()));
}

TEST(Mediation, Proportions) {
    MediationConfig c;
    c.pi00 = 0.4;
    c.tilde_pi1 = 0.5;
    const auto p = c.proportions();
    EXPECT_DOUBLE_EQ(p[3], 0.3);
    EXPECT_DOUBLE_EQ(p[1], 0.15);
    EXPECT_DOUBLE_EQ(p[2], 0.15);
    EXPECT_NEAR(p[0] + p[1] + p[2] + p[3], 1.0, 1e-15);
    EXPECT_THROW(mediation_preset("bogus"), ConfigError);
    EXPECT_DOUBLE_EQ(mediation_preset("dalter").alpha_effect, 0.5);
}

TEST(Mediation, NoMediatorsWhenTildePiZero) {
    MediationConfig c;
    c.m = 500;
    c.tilde_pi1 = 0.0;
    const SimData d = gen_mediation(c, 3);
    for (std::size_t i = 0; i < d.truth.size(); ++i) EXPECT_GE(d.truth.kappa(i), 1u);
    c.n = 3;
    EXPECT_THROW(gen_mediation(c, 3), ConfigError);
}

TEST(Mediation, GlobalNullPValuesUniform) {
    MediationConfig c;
    c.m = 5000;
    c.pi00 = 1.0;
    c.tilde_pi1 = 0.0;
    std::vector<double> col0, col1;
    for (std::uint64_t seed = 0; seed < 2; ++seed) {
        const SimData d = gen_mediation(c, seed);
        for (std::size_t i = 0; i < d.pvals.rows(); ++i) {
            col0.push_back(d.pvals(i, 0));
            col1.push_back(d.pvals(i, 1));
        }
    }
    EXPECT_LT(ks_uniform(col0), ks_critical_01(col0.size()));
    EXPECT_LT(ks_uniform(col1), ks_critical_01(col1.size()));
}

TEST(Mediation, SignalsHaveSmallPValues) {
    MediationConfig c;
    c.m = 2000;
    const SimData d = gen_mediation(c, 9);
    double alt = 0, n_alt = 0;
    for (std::size_t i = 0; i < d.pvals.rows(); ++i) {
        if (d.truth.theta(i, 1)) {
            alt += d.pvals(i, 1) < 0.05;
            ++n_alt;
        }
    }
    EXPECT_GT(alt / n_alt, 0.5);
}

TEST(Replicability, Validation) {
    ReplicabilityConfig c;
    c.m = 1000;
    c.blocks = 7;
    EXPECT_THROW(gen_replicability(c, 0), ConfigError);
    c.blocks = 10;
    c.experiments = 1;
    EXPECT_THROW(gen_replicability(c, 0), ConfigError);
}

TEST(Replicability, IndependentWhenRhoZero) {
    ReplicabilityConfig c;
    c.m = 10000;
    c.blocks = c.m;
    c.rho = 0.0;
    const SimData d = gen_replicability(c, 11);
    for (std::size_t k = 0; k < c.experiments; ++k) {
        std::vector<double> a, b;
        for (std::size_t i = 0; i + 1 < c.m; i += 2) {
            if (d.truth.theta(i, k) || d.truth.theta(i + 1, k)) continue;
            a.push_back(d.z(i, k));
            b.push_back(d.z(i + 1, k));
        }
        EXPECT_LT(std::abs(correlation(a, b)), 0.05);
    }
}

TEST(Replicability, BlockCorrelation) {
    ReplicabilityConfig c;
    c.m = 10000;
    c.blocks = 10;
    c.rho = 0.5;
    c.pi1 = 0.0;
    c.pi0_global = 1.0;
    // One block's shared term is a single draw, so pool pairs over many seeds.
    std::vector<double> a, b, across_a, across_b;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const SimData d = gen_replicability(c, seed);
        for (std::size_t i = 0; i < 1000; i += 100) {
            a.push_back(d.z(i, 0));
            b.push_back(d.z(i + 1, 0));
            across_a.push_back(d.z(i, 0));
            across_b.push_back(d.z(i, 1));
        }
    }
    EXPECT_NEAR(correlation(a, b), 0.5, 0.15);
    EXPECT_LT(std::abs(correlation(across_a, across_b)), 0.15);
}

TEST(Replicability, Proportions) {
    ReplicabilityConfig c;
    c.m = 20000;
    c.blocks = 100;
    c.experiments = 4;
    c.pi1 = 0.03;
    c.pi0_global = 0.8;
    const SimData d = gen_replicability(c, 12);
    const auto counts = d.truth.kappa_counts();
    EXPECT_NEAR(counts[0] / 20000.0, 0.03, 0.006);
    EXPECT_NEAR(counts[4] / 20000.0, 0.8, 0.015);
    // Signal means come from the pool scaled by 1 when w0 = 1.
    for (std::size_t i = 0; i < 200; ++i) {
        for (std::size_t k = 0; k < 4; ++k) {
            if (d.truth.theta(i, k)) {
                EXPECT_GT(std::abs(d.z(i, k)), 0.0);
            }
        }
    }
}

TEST(ExpectedCounts, AllNullCollapses) {
    const auto groups = all_null_groups(1000, 3);
    const ExpectedCounts e = expected_counts(0.1, groups);
    EXPECT_NEAR(e.false_discoveries, 1000 * 1e-3, 1e-12);
    EXPECT_NEAR(e.controls, 3 * 1000 * 1e-3, 1e-12);
    EXPECT_NEAR(e.js_bound, 100.0, 1e-12);
    EXPECT_THROW(expected_counts(0.5, groups), ConfigError);
    EXPECT_THROW(expected_counts(0.0, groups), ConfigError);
}

TEST(ExpectedCounts, FoldedNormalCdf) {
    const Cdf null_cdf = folded_normal_pvalue_cdf(0.0);
    EXPECT_NEAR(null_cdf(0.3), 0.3, 1e-12);
    const Cdf alt = folded_normal_pvalue_cdf(2.0);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> noise(2.0, 1.0);
    const int n = 200000;
    int hits = 0;
    for (int i = 0; i < n; ++i) hits += two_sided_pvalue(noise(rng)) <= 0.05;
    const double expected = alt(0.05);
    EXPECT_NEAR(expected, 0.5160, 1e-3);
    EXPECT_NEAR(hits / static_cast<double>(n), expected, 4.0 * std::sqrt(expected * (1 - expected) / n));
}

TEST(ExpectedCounts, DominanceProperties) {
    PointMassConfig pm;
    pm.m = 10000;
    const SimData d = gen_pointmass(pm, 1);
    const auto groups = pointmass_groups(pm, d.truth);
    for (double t = 0.01; t < 0.5; t += 0.01) {
        const ExpectedCounts e = expected_counts(t, groups);
        EXPECT_GE(e.controls, e.false_discoveries);
        if (t <= 0.1 + 1e-12) {
            EXPECT_LT(e.controls, e.js_bound);
        }
    }
}

TEST(ExpectedCounts, MatchesMonteCarloAtFivePercent) {
    PointMassConfig pm;
    pm.m = 10000;
    const double t = 0.05;
    const int reps = 40;
    std::vector<double> controls;
    double analytic = 0.0;
    for (int r = 0; r < reps; ++r) {
        const SimData d = gen_pointmass(pm, 1000 + r);
        std::size_t c = 0;
        for (std::size_t i = 0; i < d.pvals.rows(); ++i) {
            const double p0 = d.pvals(i, 0), p1 = d.pvals(i, 1);
            c += (p0 >= 1 - t && p1 <= t) + (p0 <= t && p1 >= 1 - t);
        }
        controls.push_back(static_cast<double>(c));
        analytic += expected_counts(t, pointmass_groups(pm, d.truth)).controls / reps;
    }
    double mean = 0, var = 0;
    for (double c : controls) mean += c / reps;
    for (double c : controls) var += (c - mean) * (c - mean) / (reps - 1);
    EXPECT_NEAR(mean, analytic, 3.0 * std::sqrt(var / reps));
}

TEST(Metrics, Guards) {
    const TruthTable t(2, {0, 0, 0, 1, 1, 1});
    const Metrics empty = metrics({}, t);
    EXPECT_EQ(empty.fdp, 0.0);
    EXPECT_EQ(empty.mfdp, 0.0);
    EXPECT_EQ(empty.power, 0.0);
    const std::vector<std::size_t> one{0};
    const Metrics m = metrics(one, t);
    EXPECT_DOUBLE_EQ(m.fdp, 1.0);
    EXPECT_DOUBLE_EQ(m.mfdp, 2.0);
    const std::vector<std::size_t> bad{3};
    EXPECT_THROW(metrics(bad, t), std::out_of_range);
}

TEST(Metrics, BruteForce) {
    std::mt19937_64 rng(5);
    for (int run = 0; run < 200; ++run) {
        const std::size_t m = 50, dim = 1 + rng() % 3;
        std::vector<std::uint8_t> theta(m * dim);
        for (auto& v : theta) v = rng() % 3 != 0;
        const TruthTable t(dim, theta);
        std::vector<std::size_t> rejected;
        for (std::size_t i = 0; i < m; ++i)
            if (rng() % 2) rejected.push_back(i);
        double fd = 0, weighted = 0, td = 0, h1 = 0;
        for (std::size_t i = 0; i < m; ++i) {
            std::size_t nulls = 0;
            for (std::size_t k = 0; k < dim; ++k) nulls += theta[i * dim + k] == 0;
            h1 += nulls == 0;
            if (std::find(rejected.begin(), rejected.end(), i) == rejected.end()) continue;
            if (nulls > 0) {
                ++fd;
                weighted += nulls;
            } else {
                ++td;
            }
        }
        const double denom = std::max<double>(rejected.size(), 1);
        const Metrics got = metrics(rejected, t);
        EXPECT_DOUBLE_EQ(got.fdp, fd / denom);
        EXPECT_DOUBLE_EQ(got.mfdp, weighted / denom);
        EXPECT_DOUBLE_EQ(got.power, td / std::max(h1, 1.0));
        EXPECT_GE(got.mfdp, got.fdp);
    }
}

TEST(BhMaxP, Trivial) {
    EXPECT_EQ(bh_max_p(Matrix(1, 2, std::vector<double>{0.01, 0.005}), 0.05), (std::vector<std::size_t>{0}));
    EXPECT_TRUE(bh_max_p(Matrix(4, 2, 1.0), 0.2).empty());
}

TEST(BhMaxP, BruteForce) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int run = 0; run < 200; ++run) {
        const std::size_t m = 100;
        Matrix p(m, 2);
        for (auto& v : p.data()) v = std::pow(unit(rng), run % 2 ? 4.0 : 1.0);
        const double q = 0.1;
        std::vector<double> pc(m);
        for (std::size_t i = 0; i < m; ++i) pc[i] = std::max(p(i, 0), p(i, 1));
        std::vector<double> sorted = pc;
        std::sort(sorted.begin(), sorted.end());
        double cut = -1.0;
        for (std::size_t k = 1; k <= m; ++k)
            if (sorted[k - 1] <= k * q / m) cut = sorted[k - 1];
        std::vector<std::size_t> expected;
        for (std::size_t i = 0; i < m; ++i)
            if (pc[i] <= cut) expected.push_back(i);
        EXPECT_EQ(bh_max_p(p, q), expected);
    }
}

TEST(DirectionalSim, TrueSigns) {
    DirectionalSimConfig c;
    c.m = 3000;
    const DirectionalData d = gen_directional(c, 1);
    std::size_t pos = 0, neg = 0;
    for (int s : d.true_signs) {
        pos += s == 1;
        neg += s == -1;
    }
    // All-positive rows: 0.1 directly plus 0.8 * 0.1^2 from the independent draws.
    const double share = 0.1 + 0.8 * 0.01;
    EXPECT_NEAR(pos / 3000.0, share, 0.03);
    EXPECT_NEAR(neg / 3000.0, share, 0.03);
    EXPECT_DOUBLE_EQ(directional_fdp(std::vector<int>{1, -1, 0}, std::vector<int>{1, 1, 0}), 0.5);
    EXPECT_DOUBLE_EQ(directional_fdp(std::vector<int>{0, 0}, std::vector<int>{1, 1}), 0.0);
}
