#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "jm/matrix.hpp"
#include "jm/poset.hpp"
#include "jm/regions.hpp"

namespace jm {

/// Which partial order restricts the reveal candidates.
enum class Variant : std::uint8_t {
    Max,         ///< infinity-norm order
    Product,     ///< componentwise order
    EmptyPoset,  ///< no restriction; the kernel estimate alone picks
};

PartialOrder partial_order(Variant variant) noexcept;
std::string to_string(Variant variant);
/// Accepts "max", "product", "empty" (also "emptyposet"). Throws ConfigError otherwise.
Variant parse_variant(const std::string& name);

struct JMConfig {
    double q = 0.1;
    Variant variant = Variant::Product;
    MaskingScheme scheme = MaskingScheme::standard();
    std::uint64_t seed = 0;
    /// Kernel bandwidth; the Silverman rule over the masked vectors when empty.
    std::optional<Eigen::MatrixXd> fixed_bandwidth;
};

/// Throws ConfigError unless 0 < q < 1.
void validate(const JMConfig& config);

/// Region labels, masked flags and the running counts A_t (masked mirror-side
/// features) and R_t (masked rejection-side features).
class MaskState {
public:
    MaskState(const PValueMatrix& pvals, const MaskingScheme& scheme);

    std::size_t size() const noexcept { return labels_.size(); }
    const RegionLabel& label(std::size_t i) const noexcept { return labels_[i]; }
    const std::vector<RegionLabel>& labels() const noexcept { return labels_; }
    bool masked(std::size_t i) const noexcept { return masked_[i] != 0; }

    std::size_t mirror_count() const noexcept { return mirror_; }
    std::size_t rejection_count() const noexcept { return rejection_; }
    std::size_t masked_count() const noexcept { return mirror_ + rejection_; }
    std::size_t step() const noexcept { return step_; }

    /// Unmasks feature i and decrements the matching counter; returns whether it sat
    /// on the rejection side. Throws std::logic_error if i is not masked.
    bool reveal(std::size_t i);

    /// Counts recomputed by scanning the masked features' labels: (A, R).
    std::pair<std::size_t, std::size_t> recount() const;

private:
    std::vector<RegionLabel> labels_;
    std::vector<std::uint8_t> masked_;
    std::size_t mirror_ = 0;
    std::size_t rejection_ = 0;
    std::size_t step_ = 0;
};

struct TrajectoryPoint {
    std::size_t step = 0;
    std::size_t mirror_count = 0;
    std::size_t rejection_count = 0;
    double fdp_hat = 0.0;

    friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

/// unmask_rank value of features that start outside every region.
inline constexpr std::int64_t kInitiallyUnmasked = -1;
/// unmask_rank value of features still masked at termination.
inline constexpr std::int64_t kNeverRevealed = std::numeric_limits<std::int64_t>::max();

struct JMResult {
    /// Masked rejection-side features at termination, ascending.
    std::vector<std::size_t> rejected;
    /// Step at which each feature was revealed, or one of the sentinels above.
    std::vector<std::int64_t> unmask_rank;
    std::vector<RegionLabel> labels;
    /// One point per evaluated step, starting at t = 0.
    std::vector<TrajectoryPoint> trajectory;
    double terminal_fdp_hat = 1.0;

    friend bool operator==(const JMResult&, const JMResult&) = default;
};

/// The sequential joint mirror procedure.
///
/// Starts with every rejection- or mirror-side feature masked. While the estimated
/// FDP exceeds q and rejection-side features remain masked, reveals one candidate
/// from the maximal set of the masked vectors under the variant's order (the one
/// with the smallest kernel estimate of lying on the rejection side) and updates
/// the counts. Deterministic in (pvals, config).
///
/// Throws ConfigError for an invalid config and InputError for p-values that are
/// non-finite or outside [0,1].
JMResult run_jm(const PValueMatrix& pvals, const JMConfig& config);

/// run_jm under a generalized masking scheme; the FDP estimate is scaled by 1/zeta.
JMResult run_generalized(const PValueMatrix& pvals, const JMConfig& config);

}  // namespace jm
