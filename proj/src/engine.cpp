#include "jm/engine.hpp"

#include <algorithm>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "jm/unmask.hpp"

namespace jm {

PartialOrder partial_order(Variant variant) noexcept {
    switch (variant) {
        case Variant::Max:
            return PartialOrder::MaxNorm;
        case Variant::Product:
            return PartialOrder::Product;
        case Variant::EmptyPoset:
            break;
    }
    return PartialOrder::Empty;
}

std::string to_string(Variant variant) {
    switch (variant) {
        case Variant::Max:
            return "max";
        case Variant::Product:
            return "product";
        case Variant::EmptyPoset:
            break;
    }
    return "empty";
}

Variant parse_variant(const std::string& name) {
    if (name == "max") return Variant::Max;
    if (name == "product") return Variant::Product;
    if (name == "empty" || name == "emptyposet") return Variant::EmptyPoset;
    throw ConfigError("unknown variant '" + name + "' (expected max, product or empty)");
}

void validate(const JMConfig& config) {
    if (!(config.q > 0.0 && config.q < 1.0)) {
        std::ostringstream msg;
        msg << "target level q must lie in (0,1), got " << config.q;
        throw ConfigError(msg.str());
    }
}

MaskState::MaskState(const PValueMatrix& pvals, const MaskingScheme& scheme)
    : labels_(pvals.rows()), masked_(pvals.rows(), 0) {
    for (std::size_t i = 0; i < pvals.rows(); ++i) {
        labels_[i] = classify(pvals.row(i), scheme);
        if (labels_[i].is_rejection()) {
            ++rejection_;
            masked_[i] = 1;
        } else if (labels_[i].is_mirror()) {
            ++mirror_;
            masked_[i] = 1;
        }
    }
}

bool MaskState::reveal(std::size_t i) {
    if (i >= masked_.size() || !masked_[i]) {
        throw std::logic_error("MaskState::reveal: feature is not masked");
    }
    masked_[i] = 0;
    ++step_;
    if (labels_[i].is_rejection()) {
        --rejection_;
        return true;
    }
    --mirror_;
    return false;
}

std::pair<std::size_t, std::size_t> MaskState::recount() const {
    std::size_t a = 0;
    std::size_t r = 0;
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (!masked_[i]) continue;
        if (labels_[i].is_rejection()) ++r;
        else ++a;
    }
    return {a, r};
}

JMResult run_jm(const PValueMatrix& pvals, const JMConfig& config) {
    validate(config);
    if (pvals.rows() == 0 || pvals.cols() == 0) {
        throw InputError("p-value matrix must have at least one row and one column");
    }
    validate_pvalues(pvals);
    const std::size_t dim = pvals.cols();
    if (config.fixed_bandwidth && static_cast<std::size_t>(config.fixed_bandwidth->rows()) != dim) {
        throw ConfigError("fixed bandwidth dimension does not match the number of experiments");
    }
    std::optional<Bandwidth> fixed;
    if (config.fixed_bandwidth) fixed.emplace(*config.fixed_bandwidth);

    const MaskingScheme& scheme = config.scheme;
    const double zeta = scheme.zeta();
    MaskState state(pvals, scheme);

    JMResult result;
    result.labels = state.labels();
    result.unmask_rank.assign(pvals.rows(), kNeverRevealed);

    std::vector<std::size_t> masked_ids;
    masked_ids.reserve(state.masked_count());
    for (std::size_t i = 0; i < pvals.rows(); ++i) {
        if (state.masked(i)) masked_ids.push_back(i);
        else result.unmask_rank[i] = kInitiallyUnmasked;
    }

    auto record = [&] {
        const double fdp = fdp_hat(state.mirror_count(), state.rejection_count(), zeta);
        result.trajectory.push_back({state.step(), state.mirror_count(), state.rejection_count(), fdp});
        result.terminal_fdp_hat = fdp;
    };
    auto keep_going = [&] {
        return !fdp_within_level(state.mirror_count(), state.rejection_count(), config.q, zeta) &&
               state.rejection_count() > 0;
    };

    record();
    if (keep_going()) {
        Matrix masked(masked_ids.size(), dim);
        for (std::size_t n = 0; n < masked_ids.size(); ++n) {
            proj_h_into(pvals.row(masked_ids[n]), scheme, masked.row(n));
        }
        PosetIndex poset = PosetIndex::build(masked, partial_order(config.variant));
        spdlog::debug("jm: {} masked features, {} roots, {} edges", masked_ids.size(), poset.roots().size(),
                      poset.edge_count());

        std::mt19937_64 rng(config.seed);
        std::unique_ptr<QHatState> qhat;
        std::vector<std::pair<std::size_t, bool>> reveals;
        reveals.reserve(masked_ids.size());

        while (keep_going()) {
            const auto roots = poset.roots();
            std::size_t node = roots.front();
            if (roots.size() > 1) {
                if (!qhat) {
                    Bandwidth h = fixed ? *fixed : silverman_bandwidth(masked);
                    qhat = std::make_unique<QHatState>(std::move(h), masked);
                    for (const auto& [prior, side] : reveals) qhat->reveal(prior, side);
                }
                node = select_next(roots, *qhat, rng);
            }
            const std::size_t feature = masked_ids[node];
            result.unmask_rank[feature] = static_cast<std::int64_t>(state.step());
            const bool on_rejection_side = state.reveal(feature);
            poset.remove_root(node);
            reveals.emplace_back(node, on_rejection_side);
            if (qhat) qhat->reveal(node, on_rejection_side);
            record();
        }
    }

    for (std::size_t i : masked_ids) {
        if (state.masked(i) && state.label(i).is_rejection()) result.rejected.push_back(i);
    }
    spdlog::debug("jm: stopped after {} reveals with {} rejections (fdp_hat {:.6g})", state.step(),
                  result.rejected.size(), result.terminal_fdp_hat);
    return result;
}

JMResult run_generalized(const PValueMatrix& pvals, const JMConfig& config) {
    return run_jm(pvals, config);
}

}  // namespace jm
