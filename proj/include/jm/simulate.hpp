#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jm/matrix.hpp"

namespace jm {

/// Latent truth of every component hypothesis: theta(i, k) = 1 for an alternative.
class TruthTable {
public:
    TruthTable() = default;
    /// `theta` is row-major m x K with entries in {0, 1}.
    TruthTable(std::size_t experiments, std::vector<std::uint8_t> theta);

    std::size_t size() const noexcept { return kappa_.size(); }
    std::size_t experiments() const noexcept { return experiments_; }
    std::uint8_t theta(std::size_t i, std::size_t k) const noexcept { return theta_[i * experiments_ + k]; }
    /// Number of null components of feature i.
    std::size_t kappa(std::size_t i) const noexcept { return kappa_[i]; }
    bool is_null(std::size_t i) const noexcept { return kappa_[i] > 0; }
    /// |H^(kappa)| for kappa = 0..K.
    std::vector<std::size_t> kappa_counts() const;

private:
    std::size_t experiments_ = 0;
    std::vector<std::uint8_t> theta_;
    std::vector<std::size_t> kappa_;
};

struct SimData {
    PValueMatrix pvals;
    TruthTable truth;
    /// Underlying z-statistics when the generator has them; empty otherwise.
    Matrix z;
};

/// Two-sided normal p-value 2 * Phi(-|z|).
double two_sided_pvalue(double z) noexcept;
/// Standard normal CDF.
double normal_cdf(double x) noexcept;

// --- Point-mass mixture, K = 2 -------------------------------------------

struct PointMassConfig {
    std::size_t m = 2000;
    /// Mixture weights of theta = (0,0), (0,1), (1,0), (1,1); normalised on use.
    std::array<double, 4> weights{0.4, 0.2, 0.2, 0.2};
    /// Means (mu_1, mu_2) for the same four states.
    std::array<std::array<double, 2>, 4> means{{{0.0, 0.0}, {0.0, 2.5}, {1.5, 0.0}, {2.0, 3.0}}};
};

SimData gen_pointmass(const PointMassConfig& config, std::uint64_t seed);
SimData gen_pointmass(std::uint64_t seed, std::size_t m);

// --- Mediation: X ~ Bernoulli(0.2), M = alpha X + e, Y = beta M + beta0 X + e -------

struct MediationConfig {
    std::size_t n = 250;
    std::size_t m = 5000;
    double pi00 = 0.4;
    double tilde_pi1 = 0.5;
    double alpha_effect = 0.25;
    double beta_effect = 0.375;
    double beta0 = 0.3;
    double exposure_prob = 0.2;

    /// (pi00, pi01, pi10, pi11) with pi11 = tilde_pi1 (1 - pi00) and pi01 = pi10.
    /// Component 1 is the exposure-marker test, so pi10 marks alpha != 0, beta = 0.
    std::array<double, 4> proportions() const;
};

/// Named configurations: "gnull", "snull", "dnull", "salter", "dalter" (effects 0.5
/// and 0.75). Throws ConfigError for other names.
MediationConfig mediation_preset(const std::string& name);

/// p-values from two-sided t-tests of alpha (M on X, df n - 2) and beta (Y on M and
/// X, df n - 3). Throws ConfigError for n <= 3 or invalid proportions.
SimData gen_mediation(const MediationConfig& config, std::uint64_t seed);

// --- Replicability: K experiments, block compound-symmetric z-values ------------------

struct ReplicabilityConfig {
    std::size_t m = 10000;
    std::size_t experiments = 2;
    double pi0_global = 0.8;
    double pi1 = 0.03;
    double w0 = 1.0;
    std::size_t blocks = 100;
    double rho = 0.5;
    std::vector<double> mu_pool{-5.0, -4.0, -3.0, 3.0, 4.0, 5.0};
};

/// Mean of z_ki is mu0_ki (2 - w0 - 2k(1 - w0)/K) for k = 1..K with mu0 drawn from the
/// pool where theta_ki = 1. Within an experiment, z-values in the same block have
/// correlation rho; experiments are independent. Throws ConfigError when the block
/// count does not divide m or K < 2.
SimData gen_replicability(const ReplicabilityConfig& config, std::uint64_t seed);

// --- Directional signals ----------------------------------------------------------

struct DirectionalSimConfig {
    std::size_t m = 5000;
    std::size_t experiments = 2;
    double pi_pos = 0.1;  ///< all means +effect
    double pi_neg = 0.1;  ///< all means -effect
    double effect = 3.0;
    /// Remaining rows draw each mean independently: 0 with this probability,
    /// otherwise +effect or -effect with equal chance.
    double zero_prob = 0.8;
};

struct DirectionalData {
    Matrix z;
    /// +1 if every mean is positive, -1 if every mean is negative, 0 otherwise.
    std::vector<int> true_signs;
};

DirectionalData gen_directional(const DirectionalSimConfig& config, std::uint64_t seed);

/// Share of nonzero sign calls that are wrong (null or opposite sign).
double directional_fdp(std::span<const int> estimated, std::span<const int> truth);

// --- Analytic counts for the cube [0, t]^K ---------------------------------------

using Cdf = std::function<double(double)>;

/// Features sharing one law: per component either a null (uniform p-value, empty)
/// or an alternative p-value CDF.
struct FeatureGroup {
    std::size_t count = 0;
    std::vector<std::optional<Cdf>> components;
};

struct ExpectedCounts {
    double false_discoveries = 0.0;  ///< E #{null features in [0,t]^K}
    double controls = 0.0;           ///< E sum_k #{features in the k-th mirror of [0,t]^K}
    double js_bound = 0.0;           ///< (m - m0) t, m0 = number of all-alternative features
};

/// Throws ConfigError unless 0 < t < 1/2.
ExpectedCounts expected_counts(double t, std::span<const FeatureGroup> groups);

/// CDF of 2 Phi(-|X|) with X ~ N(mean, 1).
Cdf folded_normal_pvalue_cdf(double mean);

/// One group per point-mass state with its realised count from `truth`.
std::vector<FeatureGroup> pointmass_groups(const PointMassConfig& config, const TruthTable& truth);

// --- Metrics and baseline --------------------------------------------------------

struct Metrics {
    double fdp = 0.0;
    double mfdp = 0.0;
    double power = 0.0;
    std::size_t rejections = 0;
    std::size_t false_discoveries = 0;
    std::size_t weighted_false_discoveries = 0;
};

/// FDP = |S n H0| / (|S| v 1); mFDP weights each false discovery by its kappa;
/// power = |S n H1| / (|H1| v 1). Throws std::out_of_range for indices >= m.
Metrics metrics(std::span<const std::size_t> rejected, const TruthTable& truth);

/// Benjamini-Hochberg at level q on max_k p_ki. Returns ascending indices.
std::vector<std::size_t> bh_max_p(const PValueMatrix& pvals, double q);

}  // namespace jm
