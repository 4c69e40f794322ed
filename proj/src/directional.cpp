#include "jm/directional.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "jm/regions.hpp"

namespace jm {

namespace {

struct RowSummary {
    double critical = 0.0;   // min_k |z_k|; the row sits in a tail region iff t <= critical
    bool coherent = false;   // all entries share one nonzero sign
    std::size_t mirror_multiplicity = 0;
};

RowSummary summarize(std::span<const double> z) {
    RowSummary s;
    double critical = z.empty() ? 0.0 : std::abs(z[0]);
    std::size_t positives = 0;
    std::size_t negatives = 0;
    for (double v : z) {
        critical = std::min(critical, std::abs(v));
        positives += v > 0.0;
        negatives += v < 0.0;
    }
    s.critical = critical;
    if (critical <= 0.0) return s;
    s.coherent = positives == z.size() || negatives == z.size();
    s.mirror_multiplicity = directional_mirror_multiplicity(z, critical);
    return s;
}

}  // namespace

std::vector<double> default_threshold_grid(const Matrix& z) {
    std::vector<double> grid;
    for (std::size_t i = 0; i < z.rows(); ++i) {
        const RowSummary s = summarize(z.row(i));
        if (s.coherent) grid.push_back(s.critical);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

DirectionalResult run_directional(const Matrix& z, double q, std::span<const double> grid) {
    if (!(q > 0.0 && q < 1.0)) {
        throw ConfigError("target level q must lie in (0,1)");
    }
    if (grid.empty()) {
        throw ConfigError("directional threshold grid is empty");
    }
    for (std::size_t g = 0; g < grid.size(); ++g) {
        if (!(grid[g] > 0.0) || !std::isfinite(grid[g]) || (g > 0 && !(grid[g] > grid[g - 1]))) {
            throw ConfigError("directional threshold grid must be positive and strictly increasing");
        }
    }
    validate_finite(z);

    // Critical values sorted descending with running totals, so the counts at a
    // threshold t are prefix sums over rows with critical >= t.
    std::vector<double> rejection_critical;
    std::vector<std::pair<double, std::size_t>> mirror_critical;
    for (std::size_t i = 0; i < z.rows(); ++i) {
        const RowSummary s = summarize(z.row(i));
        if (s.coherent) rejection_critical.push_back(s.critical);
        if (s.mirror_multiplicity > 0) mirror_critical.emplace_back(s.critical, s.mirror_multiplicity);
    }
    std::sort(rejection_critical.begin(), rejection_critical.end(), std::greater<>());
    std::sort(mirror_critical.begin(), mirror_critical.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<std::size_t> mirror_prefix(mirror_critical.size() + 1, 0);
    for (std::size_t j = 0; j < mirror_critical.size(); ++j) {
        mirror_prefix[j + 1] = mirror_prefix[j] + mirror_critical[j].second;
    }

    DirectionalResult result;
    result.signs.assign(z.rows(), 0);
    for (double t : grid) {
        const auto r_end = std::upper_bound(rejection_critical.begin(), rejection_critical.end(), t,
                                            [](double value, double c) { return c < value; });
        const auto m_end = std::upper_bound(mirror_critical.begin(), mirror_critical.end(), t,
                                            [](double value, const auto& c) { return c.first < value; });
        DirectionalPoint point;
        point.threshold = t;
        point.rejection_total = static_cast<std::size_t>(r_end - rejection_critical.begin());
        point.mirror_total = mirror_prefix[static_cast<std::size_t>(m_end - mirror_critical.begin())];
        point.dfdp_hat = dfdp_hat(point.mirror_total, point.rejection_total);
        result.trajectory.push_back(point);
        if (fdp_within_level(point.mirror_total, point.rejection_total, q)) {
            result.threshold = t;
            break;
        }
    }

    if (result.threshold) {
        const double t = *result.threshold;
        for (std::size_t i = 0; i < z.rows(); ++i) {
            const auto row = z.row(i);
            const bool up = std::all_of(row.begin(), row.end(), [t](double v) { return v >= t; });
            const bool down = std::all_of(row.begin(), row.end(), [t](double v) { return v <= -t; });
            result.signs[i] = up ? 1 : (down ? -1 : 0);
        }
    }
    return result;
}

DirectionalResult run_directional(const Matrix& z, double q) {
    const std::vector<double> grid = default_threshold_grid(z);
    if (grid.empty()) {
        if (!(q > 0.0 && q < 1.0)) throw ConfigError("target level q must lie in (0,1)");
        validate_finite(z);
        DirectionalResult result;
        result.signs.assign(z.rows(), 0);
        return result;
    }
    return run_directional(z, q, grid);
}

}  // namespace jm
