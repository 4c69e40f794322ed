#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "jm/matrix.hpp"

namespace jm {

/// Symmetric positive-definite K x K bandwidth matrix H of the Gaussian kernel.
///
/// Stores the inverse Cholesky factor so that (x - y)' H^{-1} (x - y) is the squared
/// Euclidean distance between whitened points.
class Bandwidth {
public:
    /// Throws ConfigError if H is not square, not symmetric, or not positive-definite.
    explicit Bandwidth(Eigen::MatrixXd h);

    const Eigen::MatrixXd& matrix() const noexcept { return h_; }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(h_.rows()); }

    /// out = L^{-1} x with H = L L'.
    void whiten(std::span<const double> x, std::span<double> out) const;

private:
    Eigen::MatrixXd h_;
    Eigen::MatrixXd inv_factor_;
};

/// Rule-of-thumb bandwidth (4 / (n (K + 2)))^{2 / (K + 4)} * S, where S is the sample
/// covariance of the rows plus a ridge of 1e-8 * trace(S) / K (1e-8 when the trace
/// is zero). Throws InputError for fewer than two rows.
Bandwidth silverman_bandwidth(const Matrix& points);

/// The Silverman scale factor (4 / (n (K + 2)))^{2 / (K + 4)}.
double silverman_factor(std::size_t n, std::size_t dim);

/// Gaussian kernel ratio K_H(x - y) / K_H(0) = exp(-(x - y)' H^{-1} (x - y) / 2).
double kernel_weight(const Bandwidth& h, std::span<const double> x, std::span<const double> y);

/// Weights below this are treated as zero.
inline constexpr double kWeightFloor = 1e-300;

/// Numerator/denominator pair of the kernel estimate of P(rejection side | masked value).
struct QHat {
    double num = 0.0;
    double den = 0.0;

    bool defined() const noexcept { return den > 0.0; }
    double value() const noexcept { return num / den; }
};

/// Kernel estimates for a fixed set of masked candidates.
///
/// Every revealed point (seed) contributes v_H(candidate, seed) to the denominator,
/// and to the numerator when it lies on the rejection side. Contributions are
/// accumulated per candidate in seed order, lazily: estimate() folds in the seeds
/// added since the candidate was last read. The result is bit-identical to adding
/// each seed to every candidate as it arrives.
class QHatState {
public:
    QHatState(Bandwidth h, const Matrix& candidates);

    std::size_t size() const noexcept { return active_.size(); }
    std::size_t seed_count() const noexcept { return seed_rejection_.size(); }
    const Bandwidth& bandwidth() const noexcept { return h_; }

    /// Adds an unmasked point that is not one of the candidates.
    void add_seed(std::span<const double> masked, bool on_rejection_side);

    /// Moves candidate i into the seed set. Throws std::logic_error on a second reveal.
    void reveal(std::size_t candidate, bool on_rejection_side);

    bool active(std::size_t candidate) const noexcept { return active_[candidate] != 0; }

    /// Current (num, den) of an active candidate. Throws std::logic_error if revealed.
    QHat estimate(std::size_t candidate);

    /// Infinity norm of the candidate's masked vector.
    double sup_norm(std::size_t candidate) const noexcept { return sup_norm_[candidate]; }

private:
    void push_seed(const double* whitened, bool on_rejection_side);

    Bandwidth h_;
    std::size_t dim_;
    std::vector<double> white_;
    std::vector<double> sup_norm_;
    std::vector<std::uint8_t> active_;
    std::vector<double> seed_white_;
    std::vector<std::uint8_t> seed_rejection_;
    std::vector<double> num_;
    std::vector<double> den_;
    std::vector<std::size_t> synced_;
};

/// State with the given seeds already folded in (seeds are rows of `seeds`).
QHatState qhat_init(const Bandwidth& h, const Matrix& candidates, const Matrix& seeds,
                    std::span<const std::uint8_t> seed_on_rejection_side);

/// Candidate with the smallest estimate num / den.
///
/// Candidates with den = 0 rank after every candidate with den > 0. If no candidate
/// has den > 0 the one with the largest infinity norm is taken. Exact ties are
/// resolved uniformly at random with `rng`, which is only drawn from when a tie
/// exists. Throws std::logic_error for an empty candidate set.
std::size_t select_next(std::span<const std::size_t> candidates, QHatState& state, std::mt19937_64& rng);

}  // namespace jm
