#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "jm/matrix.hpp"

namespace jm {

/// Parameters of the masking map h and the rejection/control sides.
///
/// The rejection side is [0, alpha_m)^K. Mirror side k holds vectors whose k-th
/// component lies in (lambda, nu] while every other component is below alpha_m.
/// Inside (lambda, nu] the map is h(t) = (nu - t) / zeta with
/// zeta = (nu - lambda) / alpha_m, so the mirror interval lands on [0, alpha_m).
class MaskingScheme {
public:
    /// Throws ConfigError unless 0 < alpha_m <= lambda < nu <= 1.
    MaskingScheme(double alpha_m, double lambda, double nu);

    /// (1/2, 1/2, 1): the plain min(p, 1 - p) projection with zeta = 1.
    static MaskingScheme standard() { return {0.5, 0.5, 1.0}; }

    double alpha_m() const noexcept { return alpha_m_; }
    double lambda() const noexcept { return lambda_; }
    double nu() const noexcept { return nu_; }
    double zeta() const noexcept { return zeta_; }
    bool is_standard() const noexcept;

    /// The scalar masking map h.
    double h(double p) const noexcept;

    friend bool operator==(const MaskingScheme&, const MaskingScheme&) = default;

private:
    double alpha_m_;
    double lambda_;
    double nu_;
    double zeta_;
};

/// Region of a p-value vector relative to the rejection and mirror sides.
/// `experiment` is the 0-based mirror coordinate and is meaningful only for Mirror.
struct RegionLabel {
    enum class Kind : std::uint8_t { Rejection, Mirror, Outside };

    Kind kind = Kind::Outside;
    std::size_t experiment = 0;

    static RegionLabel rejection() { return {Kind::Rejection, 0}; }
    static RegionLabel mirror(std::size_t k) { return {Kind::Mirror, k}; }
    static RegionLabel outside() { return {Kind::Outside, 0}; }

    bool is_rejection() const noexcept { return kind == Kind::Rejection; }
    bool is_mirror() const noexcept { return kind == Kind::Mirror; }
    bool is_outside() const noexcept { return kind == Kind::Outside; }

    friend bool operator==(const RegionLabel&, const RegionLabel&) = default;
};

/// "rejection", "mirror<k>" (0-based k) or "outside".
std::string to_string(const RegionLabel& label);

/// Componentwise min(p_k, 1 - p_k). Throws InputError for components outside [0,1].
std::vector<double> proj(std::span<const double> p);

/// Componentwise h from `scheme`. Throws InputError for components outside [0,1].
std::vector<double> proj_h(std::span<const double> p, const MaskingScheme& scheme);

/// Writes proj_h(p) into `out` without allocating; no domain checks.
void proj_h_into(std::span<const double> p, const MaskingScheme& scheme, std::span<double> out) noexcept;

/// Rejection iff all components < alpha_m; Mirror(k) iff p_k in (lambda, nu] and
/// all others < alpha_m; Outside otherwise.
RegionLabel classify(std::span<const double> p, const MaskingScheme& scheme);

/// Estimated FDP (1 + A) / (zeta * max(R, 1)).
double fdp_hat(std::size_t mirror_count, std::size_t rejection_count, double zeta = 1.0);

/// Stopping rule of the sequential procedure: true iff (1 + A) <= q * zeta * max(R, 1).
/// Equality stops. Evaluated on the product form so no division enters the boundary.
bool fdp_within_level(std::size_t mirror_count, std::size_t rejection_count, double q,
                      double zeta = 1.0) noexcept;

/// Sign-aware region for z-value vectors with the cube family R+ = [t, inf)^K.
/// `experiment` is meaningful only for the mirror kinds.
struct DirectionalLabel {
    enum class Kind : std::uint8_t { PositiveRejection, NegativeRejection, MirrorPos, MirrorNeg, Outside };

    Kind kind = Kind::Outside;
    std::size_t experiment = 0;

    friend bool operator==(const DirectionalLabel&, const DirectionalLabel&) = default;
};

std::string to_string(const DirectionalLabel& label);

/// Requires t > 0 (ConfigError otherwise). When several mirror sets contain z
/// (only possible for K <= 2), the lowest experiment index wins, MirrorPos before
/// MirrorNeg, which keeps the labelling symmetric under z -> -z.
DirectionalLabel classify_directional(std::span<const double> z, double t);

/// Number of the 2K mirror sets A^{k,+} and A^{k,-} (k = 1..K) containing z, summed
/// over k of the indicator of A^{k,+} union A^{k,-}.
std::size_t directional_mirror_multiplicity(std::span<const double> z, double t);

/// Estimated directional FDP (1 + A_total) / max(R_total, 1).
double dfdp_hat(std::size_t mirror_total, std::size_t rejection_total);

}  // namespace jm
