#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "jm/directional.hpp"
#include "jm/regions.hpp"
#include "jm/simulate.hpp"

using namespace jm;

namespace {

Matrix random_z(std::size_t m, std::size_t dim, std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_int_distribution<int> level(-1, 1);
    Matrix z(m, dim);
    for (std::size_t i = 0; i < m; ++i) {
        const int shared = level(rng);
        for (std::size_t k = 0; k < dim; ++k) z(i, k) = 3.0 * shared + noise(rng);
    }
    return z;
}

}  // namespace

TEST(Directional, CountsMatchBruteForce) {
    std::mt19937_64 rng(1);
    for (std::size_t dim : {1u, 2u, 3u}) {
        const Matrix z = random_z(400, dim, rng);
        const std::vector<double> grid{0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 6.0};
        const DirectionalResult res = run_directional(z, 0.01, grid);
        for (const DirectionalPoint& pt : res.trajectory) {
            std::size_t rej = 0, mir = 0;
            for (std::size_t i = 0; i < z.rows(); ++i) {
                const auto label = classify_directional(z.row(i), pt.threshold);
                rej += label.kind == DirectionalLabel::Kind::PositiveRejection ||
                       label.kind == DirectionalLabel::Kind::NegativeRejection;
                mir += directional_mirror_multiplicity(z.row(i), pt.threshold);
            }
            EXPECT_EQ(pt.rejection_total, rej);
            EXPECT_EQ(pt.mirror_total, mir);
            EXPECT_DOUBLE_EQ(pt.dfdp_hat, dfdp_hat(mir, rej));
        }
    }
}

TEST(Directional, StopsAtFirstThresholdMeetingLevel) {
    std::mt19937_64 rng(2);
    const Matrix z = random_z(2000, 2, rng);
    const double q = 0.1;
    const DirectionalResult res = run_directional(z, q);
    ASSERT_TRUE(res.threshold.has_value());
    for (std::size_t s = 0; s + 1 < res.trajectory.size(); ++s) {
        EXPECT_FALSE(fdp_within_level(res.trajectory[s].mirror_total, res.trajectory[s].rejection_total, q));
        EXPECT_LT(res.trajectory[s].threshold, res.trajectory[s + 1].threshold);
    }
    const auto& last = res.trajectory.back();
    EXPECT_TRUE(fdp_within_level(last.mirror_total, last.rejection_total, q));
    std::size_t calls = 0;
    for (std::size_t i = 0; i < z.rows(); ++i) {
        const auto row = z.row(i);
        if (res.signs[i] == 1) {
            for (double v : row) EXPECT_GE(v, *res.threshold);
        } else if (res.signs[i] == -1) {
            for (double v : row) EXPECT_LE(v, -*res.threshold);
        }
        calls += res.signs[i] != 0;
    }
    EXPECT_EQ(calls, last.rejection_total);
}

TEST(Directional, NegationFlipsSigns) {
    std::mt19937_64 rng(3);
    const Matrix z = random_z(1000, 2, rng);
    Matrix neg = z;
    for (auto& v : neg.data()) v = -v;
    const DirectionalResult a = run_directional(z, 0.2);
    const DirectionalResult b = run_directional(neg, 0.2);
    EXPECT_EQ(a.threshold, b.threshold);
    for (std::size_t i = 0; i < z.rows(); ++i) EXPECT_EQ(a.signs[i], -b.signs[i]);
}

TEST(Directional, StrongCoherentSignals) {
    Matrix z(20, 2, 5.0);
    for (std::size_t i = 10; i < 20; ++i) {
        z(i, 0) = -5.0 - static_cast<double>(i) * 0.01;
        z(i, 1) = -6.0;
    }
    const DirectionalResult res = run_directional(z, 0.1);
    ASSERT_TRUE(res.threshold.has_value());
    for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(res.signs[i], 1);
    for (std::size_t i = 10; i < 20; ++i) EXPECT_EQ(res.signs[i], -1);
}

TEST(Directional, NoCoherentRows) {
    const Matrix z(3, 2, std::vector<double>{1.0, -1.0, -2.0, 3.0, 0.0, 4.0});
    EXPECT_TRUE(default_threshold_grid(z).empty());
    const DirectionalResult res = run_directional(z, 0.1);
    EXPECT_FALSE(res.threshold.has_value());
    EXPECT_EQ(res.signs, (std::vector<int>{0, 0, 0}));
}

TEST(Directional, Errors) {
    const Matrix z(2, 2, 1.0);
    EXPECT_THROW(run_directional(z, 0.0), ConfigError);
    EXPECT_THROW(run_directional(z, 0.1, std::vector<double>{}), ConfigError);
    EXPECT_THROW(run_directional(z, 0.1, std::vector<double>{1.0, 1.0}), ConfigError);
    EXPECT_THROW(run_directional(z, 0.1, std::vector<double>{-1.0}), ConfigError);
    Matrix bad = z;
    bad(0, 0) = INFINITY;
    EXPECT_THROW(run_directional(bad, 0.1), InputError);
}

TEST(Directional, SimulationControlsSignErrors) {
    DirectionalSimConfig config;
    config.m = 5000;
    double total = 0.0;
    const int reps = 20;
    for (int r = 0; r < reps; ++r) {
        const DirectionalData d = gen_directional(config, 100 + r);
        total += directional_fdp(run_directional(d.z, 0.2).signs, d.true_signs);
    }
    EXPECT_LE(total / reps, 0.23);
}

TEST(Directional, WorkedExample) {
    Matrix z(20, 2, 5.0);
    for (std::size_t i = 10; i < 20; ++i) z(i, 0) = z(i, 1) = -5.0;
    const std::vector<double> grid{2.0, 3.0, 4.0};
    const DirectionalResult res = run_directional(z, 0.2, grid);
    ASSERT_TRUE(res.threshold.has_value());
    EXPECT_DOUBLE_EQ(*res.threshold, 2.0);
    EXPECT_DOUBLE_EQ(res.trajectory.front().dfdp_hat, 0.05);
    for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(res.signs[i], i < 10 ? 1 : -1);

    // Everything inside the smallest cube: nothing to call.
    const Matrix small(5, 2, 0.5);
    const DirectionalResult none = run_directional(small, 0.2, grid);
    EXPECT_FALSE(none.threshold.has_value());
    EXPECT_EQ(none.signs, std::vector<int>(5, 0));
}
