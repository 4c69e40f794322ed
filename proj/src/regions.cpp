#include "jm/regions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "jm/matrix.hpp"

namespace jm {

namespace {

void check_unit_interval(std::span<const double> p) {
    if (p.empty()) {
        throw InputError("p-value vector must have at least one component");
    }
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (!(p[k] >= 0.0 && p[k] <= 1.0)) {
            std::ostringstream msg;
            msg << "p-value component " << k << " = " << p[k] << " is outside [0,1]";
            throw InputError(msg.str());
        }
    }
}

}  // namespace

MaskingScheme::MaskingScheme(double alpha_m, double lambda, double nu)
    : alpha_m_(alpha_m), lambda_(lambda), nu_(nu), zeta_(0.0) {
    if (!(alpha_m > 0.0 && alpha_m <= lambda && lambda < nu && nu <= 1.0)) {
        std::ostringstream msg;
        msg << "masking scheme requires 0 < alpha_m <= lambda < nu <= 1, got (" << alpha_m << ", "
            << lambda << ", " << nu << ")";
        throw ConfigError(msg.str());
    }
    zeta_ = (nu - lambda) / alpha_m;
}

bool MaskingScheme::is_standard() const noexcept {
    return alpha_m_ == 0.5 && lambda_ == 0.5 && nu_ == 1.0;
}

double MaskingScheme::h(double p) const noexcept {
    if (p > lambda_ && p <= nu_) {
        return (nu_ - p) / zeta_;
    }
    return p;
}

std::string to_string(const RegionLabel& label) {
    switch (label.kind) {
        case RegionLabel::Kind::Rejection:
            return "rejection";
        case RegionLabel::Kind::Mirror:
            return "mirror" + std::to_string(label.experiment);
        case RegionLabel::Kind::Outside:
            break;
    }
    return "outside";
}

std::vector<double> proj(std::span<const double> p) {
    check_unit_interval(p);
    std::vector<double> out(p.size());
    std::transform(p.begin(), p.end(), out.begin(), [](double v) { return std::min(v, 1.0 - v); });
    return out;
}

std::vector<double> proj_h(std::span<const double> p, const MaskingScheme& scheme) {
    check_unit_interval(p);
    std::vector<double> out(p.size());
    proj_h_into(p, scheme, out);
    return out;
}

void proj_h_into(std::span<const double> p, const MaskingScheme& scheme, std::span<double> out) noexcept {
    for (std::size_t k = 0; k < p.size(); ++k) {
        out[k] = scheme.h(p[k]);
    }
}

RegionLabel classify(std::span<const double> p, const MaskingScheme& scheme) {
    check_unit_interval(p);
    std::size_t mirror_k = p.size();
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] < scheme.alpha_m()) {
            continue;
        }
        const bool in_mirror_interval = p[k] > scheme.lambda() && p[k] <= scheme.nu();
        if (!in_mirror_interval || mirror_k != p.size()) {
            return RegionLabel::outside();
        }
        mirror_k = k;
    }
    return mirror_k == p.size() ? RegionLabel::rejection() : RegionLabel::mirror(mirror_k);
}

double fdp_hat(std::size_t mirror_count, std::size_t rejection_count, double zeta) {
    return (1.0 + static_cast<double>(mirror_count)) /
           (zeta * static_cast<double>(std::max<std::size_t>(rejection_count, 1)));
}

bool fdp_within_level(std::size_t mirror_count, std::size_t rejection_count, double q,
                      double zeta) noexcept {
    const double lhs = 1.0 + static_cast<double>(mirror_count);
    const double rhs = q * zeta * static_cast<double>(std::max<std::size_t>(rejection_count, 1));
    return lhs <= rhs;
}

std::string to_string(const DirectionalLabel& label) {
    switch (label.kind) {
        case DirectionalLabel::Kind::PositiveRejection:
            return "positive";
        case DirectionalLabel::Kind::NegativeRejection:
            return "negative";
        case DirectionalLabel::Kind::MirrorPos:
            return "mirrorpos" + std::to_string(label.experiment);
        case DirectionalLabel::Kind::MirrorNeg:
            return "mirrorneg" + std::to_string(label.experiment);
        case DirectionalLabel::Kind::Outside:
            break;
    }
    return "outside";
}

namespace {

// +1 for z >= t, -1 for z <= -t, 0 in between.
int tail_sign(double z, double t) noexcept {
    if (z >= t) return 1;
    if (z <= -t) return -1;
    return 0;
}

void check_threshold(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw ConfigError("directional threshold must be a positive finite number");
    }
}

}  // namespace

DirectionalLabel classify_directional(std::span<const double> z, double t) {
    check_threshold(t);
    const std::size_t dim = z.size();
    std::size_t positives = 0;
    std::size_t negatives = 0;
    for (double v : z) {
        const int s = tail_sign(v, t);
        positives += s > 0;
        negatives += s < 0;
    }
    if (positives + negatives != dim || dim == 0) {
        return {DirectionalLabel::Kind::Outside, 0};
    }
    if (positives == dim) return {DirectionalLabel::Kind::PositiveRejection, 0};
    if (negatives == dim) return {DirectionalLabel::Kind::NegativeRejection, 0};
    for (std::size_t k = 0; k < dim; ++k) {
        const int s = tail_sign(z[k], t);
        if (s < 0 && negatives == 1) return {DirectionalLabel::Kind::MirrorPos, k};
        if (s > 0 && positives == 1) return {DirectionalLabel::Kind::MirrorNeg, k};
    }
    return {DirectionalLabel::Kind::Outside, 0};
}

std::size_t directional_mirror_multiplicity(std::span<const double> z, double t) {
    check_threshold(t);
    const std::size_t dim = z.size();
    std::size_t positives = 0;
    std::size_t negatives = 0;
    for (double v : z) {
        const int s = tail_sign(v, t);
        positives += s > 0;
        negatives += s < 0;
    }
    if (positives + negatives != dim || dim == 0) {
        return 0;
    }
    // A^{k,+}: coordinate k in the lower tail, all others upper; A^{k,-} mirrored.
    std::size_t count = 0;
    for (std::size_t k = 0; k < dim; ++k) {
        const int s = tail_sign(z[k], t);
        const bool in_pos = s < 0 && negatives == 1;
        const bool in_neg = s > 0 && positives == 1;
        count += (in_pos || in_neg) ? 1 : 0;
    }
    return count;
}

double dfdp_hat(std::size_t mirror_total, std::size_t rejection_total) {
    return fdp_hat(mirror_total, rejection_total, 1.0);
}

}  // namespace jm
