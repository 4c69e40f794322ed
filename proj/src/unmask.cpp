#include "jm/unmask.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace jm {

Bandwidth::Bandwidth(Eigen::MatrixXd h) : h_(std::move(h)) {
    if (h_.rows() == 0 || h_.rows() != h_.cols()) {
        throw ConfigError("bandwidth matrix must be square and non-empty");
    }
    if (!h_.allFinite()) {
        throw ConfigError("bandwidth matrix has non-finite entries");
    }
    const double scale = std::max(h_.cwiseAbs().maxCoeff(), 1e-300);
    if ((h_ - h_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw ConfigError("bandwidth matrix must be symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(h_);
    if (llt.info() != Eigen::Success) {
        throw ConfigError("bandwidth matrix must be positive-definite");
    }
    const Eigen::MatrixXd lower = llt.matrixL();
    inv_factor_ = lower.triangularView<Eigen::Lower>().solve(
        Eigen::MatrixXd::Identity(h_.rows(), h_.cols()));
}

void Bandwidth::whiten(std::span<const double> x, std::span<double> out) const {
    const std::size_t k = dim();
    if (x.size() != k || out.size() != k) {
        throw std::invalid_argument("Bandwidth::whiten: dimension mismatch");
    }
    for (std::size_t r = 0; r < k; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c <= r; ++c) {
            acc += inv_factor_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * x[c];
        }
        out[r] = acc;
    }
}

double silverman_factor(std::size_t n, std::size_t dim) {
    const double kd = static_cast<double>(dim);
    return std::pow(4.0 / (static_cast<double>(n) * (kd + 2.0)), 2.0 / (kd + 4.0));
}

Bandwidth silverman_bandwidth(const Matrix& points) {
    const std::size_t n = points.rows();
    const std::size_t dim = points.cols();
    if (n < 2) {
        throw InputError("Silverman bandwidth needs at least two points");
    }
    if (dim == 0) {
        throw InputError("Silverman bandwidth needs at least one dimension");
    }
    const auto kd = static_cast<Eigen::Index>(dim);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(kd);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < dim; ++k) mean(static_cast<Eigen::Index>(k)) += points(i, k);
    }
    mean /= static_cast<double>(n);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(kd, kd);
    Eigen::VectorXd centred(kd);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < dim; ++k) {
            centred(static_cast<Eigen::Index>(k)) = points(i, k) - mean(static_cast<Eigen::Index>(k));
        }
        cov.noalias() += centred * centred.transpose();
    }
    cov /= static_cast<double>(n - 1);
    const double trace = cov.trace();
    const double ridge = trace > 0.0 ? 1e-8 * trace / static_cast<double>(dim) : 1e-8;
    cov.diagonal().array() += ridge;
    return Bandwidth(silverman_factor(n, dim) * cov);
}

namespace {

double weight_from_whitened(const double* a, const double* b, std::size_t dim) noexcept {
    double dist2 = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        const double d = a[k] - b[k];
        dist2 += d * d;
    }
    const double w = std::exp(-0.5 * dist2);
    return w < kWeightFloor ? 0.0 : w;
}

}  // namespace

double kernel_weight(const Bandwidth& h, std::span<const double> x, std::span<const double> y) {
    const std::size_t dim = h.dim();
    if (x.size() != dim || y.size() != dim) {
        throw std::invalid_argument("kernel_weight: dimension mismatch");
    }
    std::vector<double> diff(dim);
    std::vector<double> white(dim);
    for (std::size_t k = 0; k < dim; ++k) diff[k] = x[k] - y[k];
    h.whiten(diff, white);
    double dist2 = 0.0;
    for (double v : white) dist2 += v * v;
    const double w = std::exp(-0.5 * dist2);
    return w < kWeightFloor ? 0.0 : w;
}

QHatState::QHatState(Bandwidth h, const Matrix& candidates)
    : h_(std::move(h)), dim_(h_.dim()) {
    if (candidates.cols() != dim_) {
        throw std::invalid_argument("QHatState: candidate dimension does not match bandwidth");
    }
    const std::size_t n = candidates.rows();
    white_.resize(n * dim_);
    sup_norm_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = candidates.row(i);
        h_.whiten(row, std::span<double>(white_.data() + i * dim_, dim_));
        sup_norm_[i] = *std::max_element(row.begin(), row.end());
    }
    active_.assign(n, 1);
    num_.assign(n, 0.0);
    den_.assign(n, 0.0);
    synced_.assign(n, 0);
}

void QHatState::push_seed(const double* whitened, bool on_rejection_side) {
    seed_white_.insert(seed_white_.end(), whitened, whitened + dim_);
    seed_rejection_.push_back(on_rejection_side ? 1 : 0);
}

void QHatState::add_seed(std::span<const double> masked, bool on_rejection_side) {
    if (masked.size() != dim_) {
        throw std::invalid_argument("QHatState::add_seed: dimension mismatch");
    }
    std::vector<double> white(dim_);
    h_.whiten(masked, white);
    push_seed(white.data(), on_rejection_side);
}

void QHatState::reveal(std::size_t candidate, bool on_rejection_side) {
    if (candidate >= active_.size()) {
        throw std::out_of_range("QHatState::reveal: candidate out of range");
    }
    if (!active_[candidate]) {
        throw std::logic_error("QHatState::reveal: candidate already revealed");
    }
    active_[candidate] = 0;
    push_seed(white_.data() + candidate * dim_, on_rejection_side);
}

QHat QHatState::estimate(std::size_t candidate) {
    if (candidate >= active_.size()) {
        throw std::out_of_range("QHatState::estimate: candidate out of range");
    }
    if (!active_[candidate]) {
        throw std::logic_error("QHatState::estimate: candidate already revealed");
    }
    const double* x = white_.data() + candidate * dim_;
    double num = num_[candidate];
    double den = den_[candidate];
    const std::size_t total = seed_rejection_.size();
    for (std::size_t s = synced_[candidate]; s < total; ++s) {
        const double w = weight_from_whitened(x, seed_white_.data() + s * dim_, dim_);
        den += w;
        if (seed_rejection_[s]) num += w;
    }
    num_[candidate] = num;
    den_[candidate] = den;
    synced_[candidate] = total;
    return {num, den};
}

QHatState qhat_init(const Bandwidth& h, const Matrix& candidates, const Matrix& seeds,
                    std::span<const std::uint8_t> seed_on_rejection_side) {
    if (seeds.rows() != seed_on_rejection_side.size()) {
        throw std::invalid_argument("qhat_init: seed flags do not match seed rows");
    }
    QHatState state(h, candidates);
    for (std::size_t s = 0; s < seeds.rows(); ++s) {
        state.add_seed(seeds.row(s), seed_on_rejection_side[s] != 0);
    }
    for (std::size_t i = 0; i < candidates.rows(); ++i) state.estimate(i);
    return state;
}

namespace {

std::size_t pick_tie(std::vector<std::size_t>& ties, std::mt19937_64& rng) {
    if (ties.size() == 1) return ties.front();
    std::sort(ties.begin(), ties.end());
    std::uniform_int_distribution<std::size_t> pick(0, ties.size() - 1);
    return ties[pick(rng)];
}

}  // namespace

std::size_t select_next(std::span<const std::size_t> candidates, QHatState& state, std::mt19937_64& rng) {
    if (candidates.empty()) {
        throw std::logic_error("select_next: empty candidate set");
    }
    if (candidates.size() == 1) {
        return candidates.front();
    }
    std::vector<std::size_t> ties;
    double best = 0.0;
    for (std::size_t c : candidates) {
        const QHat q = state.estimate(c);
        if (!q.defined()) continue;
        const double v = q.value();
        if (ties.empty() || v < best) {
            best = v;
            ties.assign(1, c);
        } else if (v == best) {
            ties.push_back(c);
        }
    }
    if (!ties.empty()) {
        return pick_tie(ties, rng);
    }
    // Cold start: nothing revealed nearby yet.
    for (std::size_t c : candidates) {
        const double v = state.sup_norm(c);
        if (ties.empty() || v > best) {
            best = v;
            ties.assign(1, c);
        } else if (v == best) {
            ties.push_back(c);
        }
    }
    return pick_tie(ties, rng);
}

}  // namespace jm
